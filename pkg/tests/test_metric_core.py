import itertools

import numpy as np
import pytest
from hypothesis import given

from tightspan.metric_core import (
    FiniteMetricSpace,
    MetricValidationError,
    covering_radius,
    diameter,
    four_point_violation,
    is_four_point,
    is_net,
    make_fixture,
    spans_check,
    validate_metric,
)

from conftest import metrics


def brute_triangle_ok(D, tol=1e-9):
    n = len(D)
    return all(D[i, j] <= D[i, k] + D[k, j] + tol
               for i, j, k in itertools.product(range(n), repeat=3))


def brute_spans(D, A):
    n = len(D)
    return all(abs(D[x, y] - max(D[x, a] - D[y, a] for a in A)) <= 1e-9
               for x in range(n) for y in range(n))


# -- fixtures -----------------------------------------------------------------

def test_intro_a_entries():
    A = make_fixture("INTRO_A")
    off = sorted(A.dist[np.triu_indices(4, 1)])
    assert off == [4, 4, 6, 6, 6, 6]


def test_seg2():
    assert make_fixture("SEG2").dist.tolist() == [[0, 2], [2, 0]]


def test_z1_equilateral():
    Z = make_fixture("Z_n", n=1)
    assert len(Z) == 3
    assert set(Z.dist[np.triu_indices(3, 1)]) == {8.0}


@pytest.mark.parametrize("name,kw", [("SEG2", {}), ("INTRO_A", {}), ("INTRO_B", {}),
                                     ("INTRO_VX", {}), ("INTRO_VY", {}),
                                     ("EX33_A", {"N": 8}), ("EX33_B", {"N": 8}),
                                     ("Z_n", {"n": 3})])
def test_fixtures_are_metrics(name, kw):
    X = make_fixture(name, **kw)
    assert validate_metric(X.dist).ok
    assert brute_triangle_ok(X.dist)


def test_fixture_parameter_errors():
    with pytest.raises(ValueError):
        make_fixture("EX33_A")
    with pytest.raises(ValueError):
        make_fixture("Z_n", n=0)
    with pytest.raises(ValueError):
        make_fixture("nope")


# -- validation ----------------------------------------------------------------

def test_validate_triangle_witness():
    rep = validate_metric([[0, 5, 10], [5, 0, 1], [10, 1, 0]])
    assert not rep.ok and not rep.triangle
    i, j, k = rep.violations["triangle"]
    D = np.array([[0, 5, 10], [5, 0, 1], [10, 1, 0]])
    assert D[i, j] > D[i, k] + D[k, j]
    assert {i, j} == {0, 2} and k == 1


def test_validate_asymmetry():
    rep = validate_metric([[0, 1], [2, 0]])
    assert not rep.symmetric
    assert rep.violations["symmetric"] == (0, 1)


@pytest.mark.parametrize("m,flag", [
    ([[0, 1, 2]], "square"),
    ([[0, np.inf], [np.inf, 0]], "finite"),
    ([[1, 1], [1, 0]], "zero_diagonal"),
    ([[0, -1], [-1, 0]], "nonnegative"),
    ([[0, 0], [0, 0]], "separation"),
])
def test_validate_each_axiom(m, flag):
    rep = validate_metric(m)
    assert not rep.ok
    assert getattr(rep, flag) is False
    assert flag in rep.violations


def test_validate_never_raises_and_tolerates_noise():
    assert validate_metric([[0, 1 + 1e-12], [1, 0]]).ok
    assert not validate_metric([[0, 1 + 1e-6], [1, 0]]).ok


def test_space_symmetrizes_and_freezes():
    X = FiniteMetricSpace(["a", "b"], [[0, 1 + 1e-12], [1, 0]])
    assert X.dist[0, 1] == X.dist[1, 0]
    with pytest.raises(ValueError):
        X.dist[0, 1] = 3


def test_space_rejects_bad_input():
    with pytest.raises(MetricValidationError) as exc:
        FiniteMetricSpace(["a", "b"], [[0, 1], [2, 0]])
    assert not exc.value.report.symmetric
    with pytest.raises(ValueError):
        FiniteMetricSpace(["a", "a"], [[0, 1], [1, 0]])
    with pytest.raises(ValueError):
        FiniteMetricSpace(["a"], [[0, 1], [1, 0]])


def test_space_lookup_and_subspace():
    X = make_fixture("INTRO_B")
    assert X.index("b3") == 2 and X.index(2) == 2
    assert X.distance("b1", "b3") == 8
    S = X.subspace(["b3", "b1"])
    assert S.labels == ("b3", "b1") and S.dist[0, 1] == 8
    with pytest.raises(KeyError):
        X.index("zz")


@given(metrics())
def test_validate_agrees_with_brute_force(X):
    assert validate_metric(X.dist).ok == brute_triangle_ok(X.dist)


@given(metrics(min_n=3))
def test_breaking_an_entry_is_detected(X):
    D = X.dist.copy()
    D[0, 1] = D[1, 0] = D[0, 2] + D[2, 1] + 1.0
    assert not validate_metric(D).triangle
    assert not brute_triangle_ok(D)


# -- diameter, four-point ----------------------------------------------------------

@pytest.mark.parametrize("name,expected", [("INTRO_A", 6), ("INTRO_B", 8), ("SEG2", 2)])
def test_diameter(name, expected):
    assert diameter(make_fixture(name)) == expected


def test_four_point_fixtures():
    assert is_four_point(make_fixture("INTRO_A"))
    assert not is_four_point(make_fixture("EX33_A", N=8))
    assert four_point_violation(make_fixture("EX33_A", N=8)) == (0, 1, 2, 3)
    assert is_four_point(make_fixture("EX33_B", N=8))


def four_point_sums(D):
    return sorted((D[0, 1] + D[2, 3], D[0, 2] + D[1, 3], D[0, 3] + D[1, 2]))


def test_four_point_sums_by_hand():
    assert four_point_sums(make_fixture("INTRO_A").dist) == [8, 12, 12]
    assert four_point_sums(make_fixture("EX33_A", N=8).dist) == [8, 16, 24]
    assert four_point_sums(make_fixture("EX33_B", N=8).dist) == [4, 20, 20]


@given(metrics(max_n=4))
def test_four_point_invariant_under_permutation(X):
    rng = np.random.default_rng(len(X))
    assert is_four_point(X) == is_four_point(X.permuted(rng.permutation(len(X))))


# -- spanning, nets -------------------------------------------------------------

def test_spans_full_set():
    assert spans_check(make_fixture("SEG2"), ["p", "q"]) == (True, None)


def test_leaves_span_vertex_space():
    VX = make_fixture("INTRO_VX")
    ok, _ = spans_check(VX, ["a1", "a2", "a3", "a4"], mode="strictly-spans")
    assert ok
    assert brute_spans(VX.dist, VX.indices(["a1", "a2", "a3", "a4"]))


def test_single_point_does_not_span():
    VX = make_fixture("INTRO_VX")
    ok, pair = spans_check(VX, ["a1"])
    assert not ok
    x, y = pair
    a = VX.index("a1")
    assert abs(VX.dist[x, y] - (VX.dist[x, a] - VX.dist[y, a])) > 1e-9
    # the pair (a3, a4) is a violating witness as well
    i, j = VX.index("a3"), VX.index("a4")
    assert VX.dist[i, j] > VX.dist[i, a] - VX.dist[j, a]


@given(metrics(min_n=3))
def test_spans_agrees_with_brute_force(X):
    for k in range(1, len(X) + 1):
        A = list(range(k))
        assert spans_check(X, A)[0] == brute_spans(X.dist, A)
        assert spans_check(X, A, "spans")[0] == spans_check(X, A, "strictly-spans")[0]


def test_is_net():
    S = make_fixture("SEG2")
    assert is_net(S, ["p"], 2)
    assert not is_net(S, ["p"], 1)
    assert is_net(make_fixture("INTRO_VX"), ["v1", "v2"], 2)
    assert covering_radius(make_fixture("INTRO_VX"), ["v1", "v2"]) == 2


@given(metrics())
def test_whole_space_is_zero_net(X):
    assert is_net(X, range(len(X)), 0)
    assert is_net(X, [0], diameter(X))
