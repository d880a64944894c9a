"""Extending roughly isometric relations without increasing distortion.

Two one-point extension steps are provided:

* :func:`extend_step_injective` for relations between injective spaces whose
  left projection spans: the new left point lands within ``alpha = dis/2`` of
  the query.
* :func:`extend_step_tree` for a tree on the left whose left projection
  strictly spans it: the query point itself gets a partner.

Both are repeated over finite nets, and the resulting relations certify
Gromov-Hausdorff bounds between tight spans or trees.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from . import gh
from .metric_core import DEFAULT_TOL, FiniteMetricSpace, is_four_point
from .tight_span import TightSpan
from .tree_ops import SimplicialTree, TreePoint, TreeSpace, tree_from_metric, tree_net

log = logging.getLogger(__name__)


class ExtensionError(RuntimeError):
    pass


class ExtensionState:
    """A relation under extension, with ``alpha = dis(R) / 2`` kept current."""

    def __init__(self, R: gh.Relation, tol: float = DEFAULT_TOL):
        if not len(R):
            raise ExtensionError("cannot extend an empty relation")
        self.R = R
        self.tol = tol
        self.dis0 = R.recompute()
        # which projection the spanning checks used, per step
        self.spanning_log: list[str] = []

    @property
    def X(self):
        return self.R.left

    @property
    def Y(self):
        return self.R.right

    @property
    def alpha(self) -> float:
        return self.R.distortion / 2

    def _scale_tol(self) -> float:
        return self.tol * max(1.0, self.R.distortion)

    def check_spanning(self, xq) -> None:
        """``|x xq| = max_a (|x a| - |xq a|)`` over the current left projection."""
        P = self.R.left_points()
        dq = gh._distances(self.X, xq, P)
        DP = gh._pairwise(self.X, P)
        gap = np.abs(dq - (DP - dq[None, :]).max(axis=1))
        if gap.max() > self._scale_tol() * 10:
            raise ExtensionError(f"left projection does not span at {xq!r}")
        self.spanning_log.append(f"current projection ({len(P)} points)")


def _add_checked(st: ExtensionState, p, q) -> None:
    before = st.R.distortion
    grown = st.R.added_distortion(p, q)
    if grown > before + st._scale_tol() * 10:
        raise ExtensionError(f"step would raise distortion from {before:.12g} to {grown:.12g}")
    st.R.add(p, q)


def _anchor(st: ExtensionState, xq):
    """``y0`` within ``|x xq| + alpha`` of every partner ``y`` of ``x``."""
    centers = [y for _, y in st.R.pairs]
    radii = gh._distances(st.X, xq, [x for x, _ in st.R.pairs]) + st.alpha
    return st.Y.ball_intersection(centers, radii)


def extend_step_injective(st: ExtensionState, xq, check_spanning: bool = True):
    """Add a pair ``(x0, y0)`` with ``|xq x0| <= alpha`` keeping the distortion.

    ``y0`` is a common point of the balls around ``y`` of radius
    ``|x xq| + alpha``; then ``x0`` is a common point of the balls around
    ``x`` of radius ``|y y0| + 2 alpha`` and the ball of radius ``alpha`` around
    ``xq``.
    """
    if check_spanning:
        st.check_spanning(xq)
    a = st.alpha
    y0 = _anchor(st, xq)
    centers = [x for x, _ in st.R.pairs] + [xq]
    radii = list(gh._distances(st.Y, y0, [y for _, y in st.R.pairs]) + 2 * a) + [a]
    x0 = st.X.ball_intersection(centers, radii)
    if st.X.distance(xq, x0) > a + st._scale_tol() * 10:
        raise ExtensionError("new point is farther than alpha from the query")
    _add_checked(st, x0, y0)
    return x0, y0


def _strict_witness(st: ExtensionState, x1, xq):
    """A pair ``(x2, y2)`` with ``xq`` on the geodesic from ``x1`` to ``x2``."""
    d1q = st.X.distance(x1, xq)
    best = None
    for x2, y2 in st.R.pairs:
        excess = abs(d1q + st.X.distance(xq, x2) - st.X.distance(x1, x2))
        if best is None or excess < best[0]:
            best = (excess, x2, y2)
    if best is None or best[0] > st._scale_tol() * 10:
        raise ExtensionError(f"no strict-spanning witness for {xq!r}")
    return best[1], best[2]


def extend_step_tree(st: ExtensionState, xq):
    """Give the tree point ``xq`` a partner without raising the distortion.

    With ``y0`` as in the injective step, let ``S`` be the pairs with
    ``|y y0| < |x xq| - alpha``.  If ``S`` is empty ``y0`` works.  Otherwise
    take the worst ``(x1, y1)`` in ``S``, a pair ``(x2, y2)`` with ``xq`` on the
    geodesic ``x1 x2``, and move from ``y0`` towards ``y2`` by
    ``t = min(alpha, |y0 y2|)``.
    """
    for x, y in st.R.pairs:
        if st.X.key(x) == st.X.key(xq):
            return y
    a = st.alpha
    tol = st._scale_tol()
    y0 = _anchor(st, xq)
    S = []
    for x, y in st.R.pairs:
        viol = (st.X.distance(x, xq) - a) - st.Y.distance(y, y0)
        if viol > tol:
            S.append((viol, x, y))
    if not S:
        ybar = y0
    else:
        _, x1, _ = max(S, key=lambda s: s[0])
        _, y2 = _strict_witness(st, x1, xq)
        d02 = st.Y.distance(y0, y2)
        t = min(a, d02)
        ybar = st.Y.ball_intersection([y0, y2], [t, d02 - t])
    _add_checked(st, xq, ybar)
    return ybar


def extend_to_net(st: ExtensionState, h: float, net=None) -> gh.Relation:
    """Run :func:`extend_step_injective` over a net of the left space."""
    if net is None:
        net = st.X.net(h)
    for q in net:
        extend_step_injective(st, q)
    return st.R


def extend_tree_relation(R: gh.Relation, h: float, tol: float = DEFAULT_TOL) -> gh.Relation:
    """Extend a relation between two trees over nets of both.

    The left side is extended over ``tree_net(X, h)``, then the roles swap and
    the right side is extended over ``tree_net(Y, h)``.  The result contains
    both nets in its projections and keeps the original distortion.
    """
    X, Y = R.left, R.right
    if not (isinstance(X, TreeSpace) and isinstance(Y, TreeSpace)):
        raise TypeError("extend_tree_relation needs TreeSpace endpoints")
    st = ExtensionState(gh.Relation(X, Y, R.pairs), tol)
    for q in X.net(h):
        extend_step_tree(st, q)
    st2 = ExtensionState(st.R.inverse(), tol)
    for q in Y.net(h):
        extend_step_tree(st2, q)
    return st2.R.inverse()


def complete_to_correspondence(R: gh.Relation, left_net, right_net):
    """Pair every uncovered net point with the partner of its nearest covered point.

    Returns ``(correspondence, beta_left, beta_right)`` where the betas are the
    covering radii of the projections over the nets.
    """
    if not left_net or not right_net:
        raise ValueError("nets must be nonempty")
    X, Y = R.left, R.right
    pairs = list(R.pairs)
    L, Rt = R.left_points(), R.right_points()

    def nearest(space, pts, q):
        d = [space.distance(q, p) for p in pts]
        k = int(np.argmin(d))
        return pts[k], d[k]

    beta_l = beta_r = 0.0
    lkeys = {X.key(p) for p in L}
    for q in left_net:
        x, d = nearest(X, L, q)
        beta_l = max(beta_l, d)
        if X.key(q) not in lkeys:
            pairs.append((q, R.partners(x)[0]))
    inv = R.inverse()
    rkeys = {Y.key(p) for p in Rt}
    for q in right_net:
        y, d = nearest(Y, Rt, q)
        beta_r = max(beta_r, d)
        if Y.key(q) not in rkeys:
            pairs.append((inv.partners(y)[0], q))
    C = gh.Correspondence(X, Y, pairs, left_set=L + list(left_net), right_set=Rt + list(right_net))
    return C, beta_l, beta_r


@dataclass
class Certificate:
    dis0: float
    dis_final: float
    alpha: float
    mesh: float
    theorem: str
    bound_chain: list = field(default_factory=list)
    passed: bool = False
    error: str | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        if d["error"] is None:
            del d["error"]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def tree_space_relation(TA: SimplicialTree, TB: SimplicialTree, A: FiniteMetricSpace,
                        B: FiniteMetricSpace, pairs, tol: float = DEFAULT_TOL) -> gh.Relation:
    XA, XB = TreeSpace(TA, tol), TreeSpace(TB, tol)
    return gh.Relation(XA, XB, [(TreePoint(node=TA.node_of(A.labels[a])),
                                 TreePoint(node=TB.node_of(B.labels[b]))) for a, b in pairs])


def stability_certificate(A: FiniteMetricSpace, B: FiniteMetricSpace, h: float,
                          tol: float = DEFAULT_TOL, budget: int = gh.DEFAULT_BUDGET) -> Certificate:
    """Certify ``d_GH(E A, E B) <= 2 d_GH(A, B)`` (or ``<= d_GH(A, B)`` for trees) at mesh ``h``."""
    res = gh.min_distortion_correspondence(A, B, budget=budget, tol=tol)
    dis0 = res.dis
    pairs = res.correspondence.pairs
    tree_case = is_four_point(A, tol) and is_four_point(B, tol)
    cert = Certificate(dis0, float("nan"), dis0 / 2, h, "3.2" if tree_case else "3.1")
    cert.bound_chain.append(f"d_GH(A,B) = {dis0 / 2:.12g}" + ("" if res.optimal else " (upper bound)"))
    try:
        if tree_case:
            TA, TB = tree_from_metric(A, tol), tree_from_metric(B, tol)
            R = extend_tree_relation(tree_space_relation(TA, TB, A, B, pairs, tol), h, tol)
            cert.dis_final = R.recompute()
            cert.bound_chain += [
                f"relation over {h:g}-nets of both trees with dis = {cert.dis_final:.12g}",
                f"d_GH(E A, E B) <= dis/2 + 2h = {cert.dis_final / 2 + 2 * h:.12g}",
            ]
            cert.passed = abs(cert.dis_final - dis0) <= tol * max(1.0, dis0) * 10
        else:
            EA, EB = TightSpan(A, tol), TightSpan(B, tol)
            R = gh.Relation(EA, EB, [(EA.embed(a), EB.embed(b)) for a, b in pairs])
            st = ExtensionState(R, tol)
            netA = EA.net(h)
            netB = EB.net(h)
            extend_to_net(st, h, netA)
            st2 = ExtensionState(st.R.inverse(), tol)
            extend_to_net(st2, h, netB)
            R2 = st2.R.inverse()
            C, bl, br = complete_to_correspondence(R2, netA, netB)
            cert.dis_final = C.recompute()
            cert.bound_chain += [
                f"extended relation dis = {R2.recompute():.12g}, net covering radii {bl:.6g}/{br:.6g}",
                f"correspondence between {h:g}-nets with dis = {cert.dis_final:.12g}",
                f"d_GH(E A, E B) <= dis/2 + 2h = {cert.dis_final / 2 + 2 * h:.12g}",
            ]
            cert.passed = cert.dis_final <= 2 * dis0 + 2 * h + tol * max(1.0, dis0) * 10
    except Exception as exc:  # report carries partial results
        log.exception("certificate pipeline failed")
        cert.error = f"{type(exc).__name__}: {exc}"
        cert.passed = False
    return cert
