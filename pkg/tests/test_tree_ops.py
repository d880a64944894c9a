import numpy as np
import pytest
from hypothesis import given
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from tightspan.metric_core import FiniteMetricSpace, make_fixture
from tightspan.random_instances import random_tree
from tightspan.tight_span import tight_span_complex
from tightspan.tree_ops import (
    FourPointError,
    SimplicialTree,
    TreePoint,
    TreeSpace,
    spanned_subtree,
    strictly_spans,
    tree_from_metric,
    tree_net,
)

from conftest import seeds, trees


def internal_nodes(T):
    return [v for v in range(T.n_nodes) if v not in T.labels]


def random_point(rng, T):
    e = int(rng.integers(len(T.edges)))
    return T.point(edge=e, offset=float(rng.uniform(0, T.edges[e][2])))


def oracle_distance(T, p, q):
    """Subdivide at p and q by hand and run Dijkstra on the resulting graph."""
    n = T.n_nodes
    extra = {}
    edges = []
    for e, (a, b, w) in enumerate(T.edges):
        cuts = sorted({x.offset for x in (p, q) if x.edge == e})
        prev, prev_off = a, 0.0
        for off in cuts:
            extra[(e, off)] = n
            edges.append((prev, n, off - prev_off))
            prev, prev_off = n, off
            n += 1
        edges.append((prev, b, w - prev_off))
    M = np.zeros((n, n))
    for a, b, w in edges:
        M[a, b] = M[b, a] = w
    S = shortest_path(csr_matrix(M), directed=False)

    def node(x):
        return x.node if x.edge is None else extra[(x.edge, x.offset)]

    return S[node(p), node(q)]


# -- reconstruction -------------------------------------------------------------

def test_reconstruct_intro_a():
    T = tree_from_metric(make_fixture("INTRO_A"))
    assert len(internal_nodes(T)) == 2
    assert T.edge_lengths() == [2, 2, 2, 2, 2]


def test_reconstruct_intro_b():
    assert tree_from_metric(make_fixture("INTRO_B")).edge_lengths() == [1, 1, 1, 1, 6]


def test_reconstruct_ex33_b():
    T = tree_from_metric(make_fixture("EX33_B", N=8))
    assert T.edge_lengths() == [1, 1, 1, 1, 8]


def test_reconstruct_rejects_non_tree_metric():
    with pytest.raises(FourPointError):
        tree_from_metric(make_fixture("EX33_A", N=8))


def test_reconstruct_point_on_path():
    # c sits between a and b: no Steiner node
    X = FiniteMetricSpace(["a", "b", "c"], [[0, 3, 1], [3, 0, 2], [1, 2, 0]])
    T = tree_from_metric(X)
    assert T.n_nodes == 3 and T.edge_lengths() == [1, 2]


def test_reconstruct_intro_vertex_spaces_keep_labels():
    T = tree_from_metric(make_fixture("INTRO_VX"))
    assert T.n_nodes == 6 and sorted(T.labels.values()) == ["a1", "a2", "a3", "a4", "v1", "v2"]


@given(trees())
def test_leaf_metric_round_trip(T):
    L = T.leaf_metric()
    R = tree_from_metric(L)
    assert np.allclose(R.leaf_metric().subspace(L.labels).dist, L.dist, atol=1e-9)
    # the generator never makes unlabeled leaves or unlabeled degree-2 nodes,
    # so the reconstruction is the same weighted tree
    assert R.n_nodes == T.n_nodes
    assert np.allclose(R.edge_lengths(), T.edge_lengths(), atol=1e-9)


@given(trees(max_leaves=6))
def test_tree_matches_tight_span_skeleton(T):
    L = T.leaf_metric()
    C = tight_span_complex(L)
    R = tree_from_metric(L)
    assert C.cells2 == []
    assert len(C.vertices) == R.n_nodes
    assert np.allclose(C.edge_lengths(), R.edge_lengths(), atol=1e-9)


@given(trees(), seeds)
def test_reconstruction_is_order_independent(T, seed):
    L = T.leaf_metric()
    perm = np.random.default_rng(seed).permutation(len(L))
    P = FiniteMetricSpace([f"q{k}" for k in perm], L.dist[np.ix_(perm, perm)])
    assert np.allclose(tree_from_metric(P).edge_lengths(), T.edge_lengths(), atol=1e-9)


# -- points and distances -----------------------------------------------------------

def test_point_distances_examples():
    T = tree_from_metric(make_fixture("INTRO_A"))
    v1 = next(v for v in internal_nodes(T) if T.node_distances[v, T.node_of("a1")] == 2)
    assert T.distance(TreePoint(node=v1), TreePoint(node=T.node_of("a3"))) == 4
    TB = tree_from_metric(make_fixture("INTRO_B"))
    e = next(k for k, (_, _, w) in enumerate(TB.edges) if w == 6)
    mid = TB.point(edge=e, offset=3)
    assert TB.distance(mid, TreePoint(node=TB.node_of("b1"))) == 4
    assert TB.distance(mid, mid) == 0


def test_point_normalization_and_errors():
    T = SimplicialTree(2, [(0, 1, 2.0)], {0: "p", 1: "q"})
    assert T.point(edge=0, offset=0) == TreePoint(node=0)
    assert T.point(edge=0, offset=2) == TreePoint(node=1)
    assert T.point(node="q") == TreePoint(node=1)
    with pytest.raises(ValueError):
        T.point(edge=0, offset=3)
    with pytest.raises(ValueError):
        SimplicialTree(2, [(0, 1, 0.0)])
    with pytest.raises(ValueError):
        SimplicialTree(3, [(0, 1, 1.0)])


@given(trees(), seeds)
def test_distance_matches_dijkstra(T, seed):
    rng = np.random.default_rng(seed)
    for _ in range(5):
        p, q = random_point(rng, T), random_point(rng, T)
        assert abs(T.distance(p, q) - oracle_distance(T, p, q)) <= 1e-9


@given(trees(), seeds)
def test_point_along_is_on_geodesic(T, seed):
    rng = np.random.default_rng(seed)
    u, v = rng.choice(T.n_nodes, 2, replace=False)
    d = T.node_distances[u, v]
    t = float(rng.uniform(0, d))
    p = T.point_along(int(u), int(v), t)
    assert abs(T.distance(TreePoint(node=int(u)), p) - t) <= 1e-9
    assert abs(T.distance(p, TreePoint(node=int(v))) - (d - t)) <= 1e-9


# -- spanned subtrees -------------------------------------------------------------------

def test_spanned_subtree_of_leaves_is_whole_tree():
    T = tree_from_metric(make_fixture("INTRO_A"))
    leaves = [TreePoint(node=T.node_of(a)) for a in ("a1", "a2", "a3", "a4")]
    S = spanned_subtree(T, leaves)
    assert S.tree.n_nodes == T.n_nodes and S.tree.edge_lengths() == T.edge_lengths()


def test_spanned_subtree_of_two_leaves_is_path():
    T = tree_from_metric(make_fixture("INTRO_A"))
    S = spanned_subtree(T, [TreePoint(node=T.node_of("a1")), TreePoint(node=T.node_of("a3"))])
    assert sum(S.tree.edge_lengths()) == 6
    assert all(S.tree.degree(v) <= 2 for v in range(S.tree.n_nodes))


def test_spanned_subtree_single_point():
    T = tree_from_metric(make_fixture("INTRO_B"))
    S = spanned_subtree(T, [T.point(edge=0, offset=T.edges[0][2] / 2)])
    assert S.tree.n_nodes == 1
    assert S.origin[0].edge == 0


@given(trees(min_leaves=3), seeds)
def test_spanned_subtree_monotone_and_strict(T, seed):
    rng = np.random.default_rng(seed)
    pts = [random_point(rng, T) for _ in range(4)]
    small, big = spanned_subtree(T, pts[:2]), spanned_subtree(T, pts)
    assert sum(small.tree.edge_lengths()) <= sum(big.tree.edge_lengths()) + 1e-9
    # every point of the small subtree lies on the big one: its ambient
    # distance to the big subtree's generators is realized within it
    ok, _ = strictly_spans(T, pts, [small.origin[v] for v in small.origin])
    assert ok


def test_strictly_spans_fails_for_single_leaf():
    T = tree_from_metric(make_fixture("INTRO_A"))
    ok, pair = strictly_spans(T, [TreePoint(node=T.node_of("a1"))], T.node_points())
    assert not ok and pair is not None


# -- nets ------------------------------------------------------------------------------

def test_tree_net_examples():
    seg = SimplicialTree(2, [(0, 1, 2.0)], {0: "p", 1: "q"})
    assert len(tree_net(seg, 0.5)) == 3
    TB = tree_from_metric(make_fixture("INTRO_B"))
    assert len(tree_net(TB, 3)) == 6
    assert len(tree_net(TB, 100)) == TB.n_nodes
    with pytest.raises(ValueError):
        tree_net(TB, 0)


@given(trees(), seeds)
def test_tree_net_covers(T, seed):
    rng = np.random.default_rng(seed)
    h = float(rng.uniform(0.2, 3))
    net = tree_net(T, h)
    for _ in range(10):
        p = random_point(rng, T)
        assert min(T.distance(p, q) for q in net) <= h + 1e-9


# -- tree as injective space ---------------------------------------------------------------

@given(trees(min_leaves=2), seeds)
def test_tree_ball_intersection(T, seed):
    rng = np.random.default_rng(seed)
    X = TreeSpace(T)
    x = random_point(rng, T)
    C = [random_point(rng, T) for _ in range(int(rng.integers(1, 5)))]
    r = [T.distance(c, x) + float(rng.uniform(0, 0.3)) for c in C]
    p = X.ball_intersection(C, r)
    for c, ri in zip(C, r):
        assert T.distance(p, c) <= ri + 1e-8


@given(trees(min_leaves=2), seeds)
def test_hull_round_trip(T, seed):
    X = TreeSpace(T)
    p = random_point(np.random.default_rng(seed), T)
    q = X.from_hull(X.to_hull(p))
    assert T.distance(p, q) <= 1e-9
