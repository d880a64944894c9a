"""Tight spans, metric trees and Gromov-Hausdorff stability of finite metric spaces."""

from .metric_core import (
    DEFAULT_TOL,
    FiniteMetricSpace,
    MetricValidationError,
    ValidationReport,
    diameter,
    is_four_point,
    is_net,
    make_fixture,
    spans_check,
    validate_metric,
)
from .tight_span import (
    ExtremalFunction,
    NetSample,
    TightSpan,
    TightSpanComplex,
    ball_intersection,
    canonical_embed,
    is_extremal,
    retract,
    sample_net,
    star,
    tight_span_complex,
)
from .tree_ops import (
    SimplicialTree,
    TreePoint,
    TreeSpace,
    spanned_subtree,
    tree_from_metric,
    tree_net,
)
from .gh import (
    Correspondence,
    Relation,
    distortion,
    gh_distance,
    gh_lower_bound_diam,
    is_rough_isometry,
    line_distortion_lower_bound,
    min_distortion_correspondence,
    min_distortion_map_to_line,
    z_n_set,
)
from .extension import (
    ExtensionState,
    complete_to_correspondence,
    extend_step_injective,
    extend_step_tree,
    extend_to_net,
    extend_tree_relation,
    stability_certificate,
)
from .io_formats import (
    export_dot,
    parse_distance_matrix,
    parse_newick,
    serialize_distance_matrix,
)

__version__ = "0.1.0"
