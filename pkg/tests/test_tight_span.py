import itertools

import numpy as np
import pytest
from hypothesis import given

from tightspan.metric_core import FiniteMetricSpace, make_fixture
from tightspan.random_instances import random_extremal, random_metric
from tightspan.tight_span import (
    BallIntersectionError,
    ComplexError,
    InadmissibleError,
    ExtremalFunction,
    TightSpan,
    ball_intersection,
    canonical_embed,
    face_dimension,
    is_bounded_face,
    is_extremal,
    retract,
    sample_net,
    star,
    tight_span_complex,
)

from conftest import metrics, seeds


def polyhedron_vertices(D, tol=1e-9):
    """Oracle: vertices of {f : f_i + f_j >= d_ij} by brute force over constraint subsets."""
    n = len(D)
    rows = []
    for i in range(n):
        for j in range(i, n):
            a = np.zeros(n)
            a[i] += 1
            a[j] += 1
            rows.append((a, D[i, j]))
    found = []
    for sub in itertools.combinations(rows, n):
        M = np.array([a for a, _ in sub])
        if abs(np.linalg.det(M)) < 1e-9:
            continue
        f = np.linalg.solve(M, np.array([b for _, b in sub]))
        if (f[:, None] + f[None, :] - D >= -tol).all() and not any(
                np.abs(f - g).max() < 1e-7 for g in found):
            found.append(f)
    return sorted(found, key=lambda v: tuple(np.round(v, 7)))


def sup(a, b):
    return float(np.abs(np.asarray(a) - np.asarray(b)).max())


# -- star / extremal ------------------------------------------------------------

def test_star_examples():
    S = make_fixture("SEG2")
    assert star(S, [0, 2]).tolist() == [0, 2]
    assert star(S, [2, 2]).tolist() == [0, 0]
    A = make_fixture("INTRO_A")
    assert star(A, [0, 4, 6, 6]).tolist() == [0, 4, 6, 6]


@given(metrics(), seeds)
def test_star_nonexpansive(X, seed):
    rng = np.random.default_rng(seed)
    f, g = rng.uniform(0, 10, (2, len(X)))
    assert sup(star(X, f), star(X, g)) <= sup(f, g) + 1e-12


def test_is_extremal_examples():
    S = make_fixture("SEG2")
    assert is_extremal(S, [1, 1])
    assert not is_extremal(S, [2, 2])
    assert not is_extremal(S, [0, 1])
    assert not is_extremal(S, [np.nan, 1])


def test_canonical_embed():
    assert canonical_embed(make_fixture("SEG2"), "p").values.tolist() == [0, 2]
    assert canonical_embed(make_fixture("INTRO_A"), "a3").values.tolist() == [6, 6, 0, 4]


@given(metrics())
def test_embedding_is_isometric_and_extremal(X):
    E = [canonical_embed(X, z) for z in range(len(X))]
    for z, f in enumerate(E):
        assert is_extremal(X, f)
        for w, g in enumerate(E):
            assert abs(sup(f.values, g.values) - X.dist[z, w]) <= 1e-12


@given(metrics(), seeds)
def test_distance_to_embedded_point(X, seed):
    f = random_extremal(np.random.default_rng(seed), X)
    for z in range(len(X)):
        assert abs(sup(f.values, X.dist[z]) - f.values[z]) <= 1e-9


@given(metrics(), seeds)
def test_spanning_identity(X, seed):
    rng = np.random.default_rng(seed)
    f, g = random_extremal(rng, X), random_extremal(rng, X)
    assert abs(sup(f.values, g.values) - (f.values - g.values).max()) <= 1e-9


# -- retraction ---------------------------------------------------------------------

def test_retract_examples():
    S = make_fixture("SEG2")
    assert np.allclose(retract(S, [2, 2]).values, [1, 1])
    assert np.allclose(retract(S, [1, 1]).values, [1, 1])
    A = make_fixture("INTRO_A")
    h = retract(A, [1, 5, 7, 7])
    assert is_extremal(A, h)
    assert (h.values <= np.array([1, 5, 7, 7]) + 1e-12).all()
    assert sup(h.values, [0, 4, 6, 6]) <= 1 + 1e-9


def test_retract_rejects_inadmissible():
    with pytest.raises(InadmissibleError):
        retract(make_fixture("SEG2"), [0, 1])


@given(metrics(), seeds)
def test_retract_properties(X, seed):
    rng = np.random.default_rng(seed)
    n = len(X)
    g1 = X.dist[rng.integers(n)] + rng.uniform(0, 5, n)
    g2 = X.dist[rng.integers(n)] + rng.uniform(0, 5, n)
    p1, p2 = retract(X, g1), retract(X, g2)
    assert is_extremal(X, p1)
    assert (p1.values <= g1 + 1e-12).all()
    assert sup(retract(X, p1.values).values, p1.values) <= 1e-9
    assert sup(p1.values, p2.values) <= sup(g1, g2) + 1e-9


# -- ball intersection ----------------------------------------------------------------

def test_ball_intersection_examples():
    S = make_fixture("SEG2")
    f = ball_intersection(S, [[0, 2], [2, 0]], [1, 1])
    assert np.allclose(f.values, [1, 1])
    A = make_fixture("INTRO_A")
    c = canonical_embed(A, "a2")
    assert np.allclose(ball_intersection(A, [c], [0]).values, c.values)


def test_ball_intersection_on_tree_geodesic():
    B = make_fixture("INTRO_B")
    b1, b3 = canonical_embed(B, "b1"), canonical_embed(B, "b3")
    f = ball_intersection(B, [b1, b3], [3, 5])
    assert abs(sup(f.values, b1.values) - 3) <= 1e-9
    assert abs(sup(f.values, b3.values) - 5) <= 1e-9
    # on the central edge, 2 from b1's junction: distances to b1..b4 are 3, 3, 5, 5
    assert np.allclose(f.values, [3, 3, 5, 5])


def test_ball_intersection_incompatible():
    with pytest.raises(BallIntersectionError):
        ball_intersection(make_fixture("SEG2"), [[0, 2], [2, 0]], [0.5, 0.5])


@given(metrics(), seeds)
def test_ball_intersection_compatible_instances(X, seed):
    # radii r_i = |c_i x| + slack are compatible since x is a common point
    rng = np.random.default_rng(seed)
    x = random_extremal(rng, X)
    C = [random_extremal(rng, X) for _ in range(int(rng.integers(1, 5)))]
    r = [sup(c.values, x.values) + float(rng.uniform(0, 0.5)) for c in C]
    f = ball_intersection(X, C, r)
    assert is_extremal(X, f)
    for c, ri in zip(C, r):
        assert sup(f.values, c.values) <= ri + 1e-9


# -- complex -----------------------------------------------------------------------------

def test_face_dimension_counts_bipartite_components():
    # a single odd cycle pins everything
    assert face_dimension(3, [(0, 1), (1, 2), (0, 2)]) == 0
    assert face_dimension(2, [(0, 1)]) == 1
    assert face_dimension(2, [(0, 0), (0, 1)]) == 0
    assert not is_bounded_face(3, [(0, 1)])
    assert is_bounded_face(2, [(0, 1)])


def test_complex_seg2():
    C = tight_span_complex(make_fixture("SEG2"))
    assert sorted(map(tuple, C.vertex_matrix().tolist())) == [(0, 2), (2, 0)]
    assert C.edge_lengths() == [2]
    assert C.cells2 == [] and C.dimension == 1


def test_complex_ex33_a():
    X = make_fixture("EX33_A", N=8)
    C = tight_span_complex(X)
    V = C.vertex_matrix()
    assert len(V) == 4 and len(C.edges) == 4 and len(C.cells2) == 1
    d = sorted(sup(V[i], V[j]) for i, j in itertools.combinations(range(4), 2))
    assert np.allclose(d, [4, 4, 8, 8, 12, 12])
    oracle = polyhedron_vertices(X.dist)
    assert np.allclose(sorted(map(tuple, V)), sorted(map(tuple, oracle)))


def test_complex_ex33_b():
    C = tight_span_complex(make_fixture("EX33_B", N=8))
    assert len(C.vertices) == 6
    assert np.allclose(C.edge_lengths(), [1, 1, 1, 1, 8])
    assert C.cells2 == []


def test_complex_z2_has_two_cells():
    C = tight_span_complex(make_fixture("Z_n", n=2))
    assert len(C.cells2) == 2 and C.dimension == 2


def test_complex_size_limit():
    X = FiniteMetricSpace([f"p{i}" for i in range(9)], 1 - np.eye(9))
    with pytest.raises(ComplexError):
        tight_span_complex(X)


@given(metrics(min_n=2, max_n=5))
def test_complex_vertices_match_oracle(X):
    C = tight_span_complex(X)
    V = sorted(map(tuple, np.round(C.vertex_matrix(), 6)))
    W = sorted(map(tuple, np.round(polyhedron_vertices(X.dist), 6)))
    assert len(V) == len(W)
    assert np.allclose(V, W, atol=1e-6)
    for v in C.vertices:
        assert is_extremal(X, v)
    for a, b, w in C.edges:
        assert abs(w - sup(C.vertices[a].values, C.vertices[b].values)) <= 1e-9
        assert is_extremal(X, (C.vertices[a].values + C.vertices[b].values) / 2)


@given(metrics(max_n=5))
def test_complex_is_canonical_under_permutation(X):
    rng = np.random.default_rng(len(X))
    perm = rng.permutation(len(X))
    C1, C2 = tight_span_complex(X), tight_span_complex(X.permuted(perm))
    assert len(C1.vertices) == len(C2.vertices)
    assert np.allclose(C1.edge_lengths(), C2.edge_lengths())
    assert len(C1.cells2) == len(C2.cells2)


# -- nets ------------------------------------------------------------------------------------

def test_net_seg2():
    C = tight_span_complex(make_fixture("SEG2"))
    pts = sample_net(C, 0.5).matrix().tolist()
    assert pts == [[0, 2], [1, 1], [2, 0]]
    assert len(sample_net(C, 2).points) == 2


def test_net_counts_regression():
    # recomputed from the subdivision rule: legs of length 1 need no interior
    # points at spacing 1 and the central edge of length 8 gets 7 interior points
    assert len(sample_net(tight_span_complex(make_fixture("EX33_B", N=8)), 0.5).points) == 13
    assert len(sample_net(tight_span_complex(make_fixture("EX33_A", N=8)), 0.5).points) == 281


def test_net_rejects_bad_mesh():
    with pytest.raises(ValueError):
        sample_net(tight_span_complex(make_fixture("SEG2")), 0)


@given(metrics(max_n=5), seeds)
def test_net_covers_random_hull_points(X, seed):
    rng = np.random.default_rng(seed)
    h = float(rng.uniform(0.3, 1.5))
    net = sample_net(tight_span_complex(X), h).matrix()
    for v in net:
        assert is_extremal(X, v)
    for _ in range(10):
        f = random_extremal(rng, X).values
        assert np.abs(net - f[None, :]).max(axis=1).min() <= h + 1e-9


def test_tight_span_point_space():
    E = TightSpan(make_fixture("INTRO_A"))
    p, q = E.embed("a1"), E.embed("a3")
    assert E.distance(p, q) == 6
    assert E.distances(p, [p, q]).tolist() == [0, 6]
    assert E.key(p) == E.key(ExtremalFunction(E.base, p.values + 1e-12))
    assert len(E.net(1.0)) >= len(E.complex.vertices)
