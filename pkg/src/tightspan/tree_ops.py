"""Finite weighted trees as models of metric trees.

Points of a tree are either nodes or positions on edges (:class:`TreePoint`).
Trees are reconstructed from four-point metrics by leaf insertion at Gromov
product split points, and act as injective spaces via their leaf hull: a tree
point ``y`` corresponds to the extremal function ``d(y, .)`` on the leaves.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .metric_core import DEFAULT_TOL, FiniteMetricSpace, four_point_violation
from . import tight_span as ts


class FourPointError(ValueError):
    def __init__(self, quadruple, labels=None):
        self.quadruple = quadruple
        names = [labels[i] for i in quadruple] if labels else quadruple
        super().__init__(f"four-point condition fails on {names}")


@dataclass(frozen=True)
class TreePoint:
    """A node (``edge is None``) or a point at ``offset`` along edge ``edge``.

    The offset is measured from the edge's first endpoint.  Use
    :meth:`SimplicialTree.point` to build normalized points.
    """

    node: int | None = None
    edge: int | None = None
    offset: float = 0.0

    def __repr__(self) -> str:
        if self.edge is None:
            return f"TreePoint(node={self.node})"
        return f"TreePoint(edge={self.edge}, offset={self.offset:.12g})"


class SimplicialTree:
    """Weighted tree with nodes ``0..k-1``; ``labels`` maps some nodes to names."""

    def __init__(self, n_nodes: int, edges, labels=None):
        self.n_nodes = int(n_nodes)
        self.edges = [(int(a), int(b), float(w)) for a, b, w in edges]
        self.labels = dict(labels or {})
        if self.n_nodes < 1:
            raise ValueError("a tree needs at least one node")
        if len(self.edges) != self.n_nodes - 1:
            raise ValueError("a tree on k nodes has k - 1 edges")
        if any(w <= 0 for _, _, w in self.edges):
            raise ValueError("edge lengths must be positive")
        self.adj = {v: [] for v in range(self.n_nodes)}
        for e, (a, b, w) in enumerate(self.edges):
            self.adj[a].append((b, e))
            self.adj[b].append((a, e))
        self._nd = self._node_distances()
        if np.isinf(self._nd).any():
            raise ValueError("tree is not connected")
        self._by_label = {lab: v for v, lab in self.labels.items()}
        if len(self._by_label) != len(self.labels):
            raise ValueError("node labels must be unique")

    def __repr__(self) -> str:
        return f"SimplicialTree({self.n_nodes} nodes, lengths={self.edge_lengths()})"

    def _node_distances(self) -> np.ndarray:
        D = np.full((self.n_nodes, self.n_nodes), np.inf)
        for s in range(self.n_nodes):
            D[s, s] = 0.0
            stack = [s]
            while stack:
                v = stack.pop()
                for u, e in self.adj[v]:
                    if np.isinf(D[s, u]):
                        D[s, u] = D[s, v] + self.edges[e][2]
                        stack.append(u)
        return D

    @property
    def node_distances(self) -> np.ndarray:
        return self._nd

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def leaves(self) -> list[int]:
        if self.n_nodes == 1:
            return [0]
        return [v for v in range(self.n_nodes) if self.degree(v) == 1]

    def labeled_nodes(self) -> list[int]:
        return sorted(self.labels, key=lambda v: self.labels[v])

    def node_of(self, label) -> int:
        return self._by_label[label]

    def edge_lengths(self) -> list[float]:
        return sorted(w for _, _, w in self.edges)

    def point(self, node=None, edge=None, offset=0.0, tol: float = DEFAULT_TOL) -> TreePoint:
        """Normalized point: offsets at an endpoint collapse to the node."""
        if edge is None:
            if node is None:
                raise ValueError("need a node or an edge")
            if isinstance(node, str):
                node = self.node_of(node)
            if not 0 <= node < self.n_nodes:
                raise ValueError(f"invalid node {node}")
            return TreePoint(node=int(node))
        if not 0 <= edge < len(self.edges):
            raise ValueError(f"invalid edge {edge}")
        a, b, w = self.edges[edge]
        if offset < -tol or offset > w + tol:
            raise ValueError(f"offset {offset} outside edge of length {w}")
        if offset <= tol:
            return TreePoint(node=a)
        if offset >= w - tol:
            return TreePoint(node=b)
        return TreePoint(edge=int(edge), offset=float(offset))

    def _check(self, p: TreePoint):
        if p.edge is None:
            if p.node is None or not 0 <= p.node < self.n_nodes:
                raise ValueError(f"invalid point {p}")
        else:
            if not 0 <= p.edge < len(self.edges):
                raise ValueError(f"invalid edge in {p}")
            if not 0 <= p.offset <= self.edges[p.edge][2]:
                raise ValueError(f"offset out of range in {p}")

    def _anchors(self, p: TreePoint):
        """(node, distance) pairs through which every path out of ``p`` leaves."""
        if p.edge is None:
            return [(p.node, 0.0)]
        a, b, w = self.edges[p.edge]
        return [(a, p.offset), (b, w - p.offset)]

    def distance(self, p: TreePoint, q: TreePoint) -> float:
        self._check(p)
        self._check(q)
        if p.edge is not None and p.edge == q.edge:
            return abs(p.offset - q.offset)
        return min(dp + dq + self._nd[u, v]
                   for u, dp in self._anchors(p) for v, dq in self._anchors(q))

    def key(self, p: TreePoint):
        if p.edge is None:
            return ("n", p.node)
        return ("e", p.edge, round(p.offset, 9))

    def node_points(self) -> list[TreePoint]:
        return [TreePoint(node=v) for v in range(self.n_nodes)]

    def point_along(self, u: int, v: int, t: float, tol: float = DEFAULT_TOL) -> TreePoint:
        """The point at distance ``t`` from node ``u`` on the path to node ``v``."""
        path = self.node_path(u, v)
        t = min(max(t, 0.0), self._nd[u, v])
        run = 0.0
        for x, y in zip(path, path[1:]):
            e = self._edge_between(x, y)
            w = self.edges[e][2]
            if t <= run + w + tol:
                off = t - run
                if self.edges[e][0] != x:
                    off = w - off
                return self.point(edge=e, offset=off, tol=tol)
            run += w
        return TreePoint(node=v)

    def _edge_between(self, x: int, y: int) -> int:
        for z, e in self.adj[x]:
            if z == y:
                return e
        raise ValueError(f"nodes {x} and {y} are not adjacent")

    def node_path(self, u: int, v: int) -> list[int]:
        path = [u]
        while path[-1] != v:
            x = path[-1]
            nxt = min((z for z, _ in self.adj[x]),
                      key=lambda z: self._nd[z, v])
            path.append(nxt)
        return path

    def leaf_metric(self, nodes=None) -> FiniteMetricSpace:
        """Metric on labeled nodes (default) or the given node list."""
        if nodes is None:
            nodes = self.labeled_nodes()
        labs = [self.labels.get(v, f"n{v}") for v in nodes]
        return FiniteMetricSpace(labs, self._nd[np.ix_(nodes, nodes)])

    def __eq__(self, other):
        return (isinstance(other, SimplicialTree) and self.n_nodes == other.n_nodes
                and self.edges == other.edges and self.labels == other.labels)

    __hash__ = object.__hash__


# -- reconstruction -------------------------------------------------------------

class _Builder:
    def __init__(self):
        self.n = 0
        self.edges = {}  # frozenset({a, b}) -> length
        self.labels = {}

    def add_node(self, label=None):
        v = self.n
        self.n += 1
        if label is not None:
            self.labels[v] = label
        return v

    def adj(self, v):
        return [(next(iter(k - {v})), w) for k, w in self.edges.items() if v in k]

    def path(self, u, v):
        prev = {u: None}
        stack = [u]
        while stack:
            x = stack.pop()
            for y, _ in self.adj(x):
                if y not in prev:
                    prev[y] = x
                    stack.append(y)
        out = [v]
        while out[-1] != u:
            out.append(prev[out[-1]])
        return out[::-1]

    def locate(self, u, v, t, tol):
        """Node at distance t from u along u..v, splitting an edge if needed."""
        path = self.path(u, v)
        run = 0.0
        for x, y in zip(path, path[1:]):
            w = self.edges[frozenset((x, y))]
            if abs(t - run) <= tol:
                return x
            if t < run + w - tol:
                del self.edges[frozenset((x, y))]
                mid = self.add_node()
                self.edges[frozenset((x, mid))] = t - run
                self.edges[frozenset((mid, y))] = run + w - t
                return mid
            run += w
        return path[-1]

    def tree(self):
        edges = sorted((min(k), max(k), w) for k, w in self.edges.items())
        return SimplicialTree(self.n, edges, self.labels)


def tree_from_metric(m: FiniteMetricSpace, tol: float = DEFAULT_TOL) -> SimplicialTree:
    """Minimal weighted tree whose labeled nodes realize a four-point metric.

    Points are inserted one at a time.  For the next point ``z`` the anchor pair
    ``(x, y)`` of already-placed points minimizing the Gromov product
    ``(x|y)_z`` gives the attach depth ``d(x, z) - (x|y)_z`` along the path
    ``x..y`` and the pendant length ``(x|y)_z``.  Attach points within ``tol``
    of a node snap to it; a pendant shorter than ``tol`` places ``z`` on the
    tree itself.
    """
    bad = four_point_violation(m, tol)
    if bad is not None:
        raise FourPointError(bad, m.labels)
    D = m.dist
    n = len(m)
    order = sorted(range(n), key=lambda i: m.labels[i])
    b = _Builder()
    node = {order[0]: b.add_node(m.labels[order[0]])}
    if n == 1:
        return b.tree()
    node[order[1]] = b.add_node(m.labels[order[1]])
    b.edges[frozenset((node[order[0]], node[order[1]]))] = D[order[0], order[1]]
    placed = order[:2]
    for z in order[2:]:
        best = None
        for x, y in itertools.combinations(placed, 2):
            g = (D[x, z] + D[y, z] - D[x, y]) / 2
            if best is None or g < best[0] - tol:
                best = (g, x, y)
        g, x, y = best
        g = max(g, 0.0)
        at = b.locate(node[x], node[y], D[x, z] - g, tol)
        if g <= tol:
            if at in b.labels:
                raise ValueError(f"points {b.labels[at]!r} and {m.labels[z]!r} coincide")
            b.labels[at] = m.labels[z]
            node[z] = at
        else:
            v = b.add_node(m.labels[z])
            b.edges[frozenset((at, v))] = g
            node[z] = v
        placed.append(z)
    return b.tree()


# -- subtrees and nets ------------------------------------------------------------

def refine(T: SimplicialTree, points, tol: float = DEFAULT_TOL):
    """Subdivide edges so every given point becomes a node.

    Returns ``(tree, node_ids, origin)`` where ``origin[v]`` is the point of
    ``T`` that node ``v`` of the new tree represents.
    """
    cuts = {}
    for p in points:
        if p.edge is not None:
            cuts.setdefault(p.edge, set()).add(round(p.offset, 12))
    n = T.n_nodes
    edges = []
    origin = {v: TreePoint(node=v) for v in range(T.n_nodes)}
    where = {}
    for e, (a, b, w) in enumerate(T.edges):
        prev, prev_off = a, 0.0
        for off in sorted(cuts.get(e, ())):
            v = n
            n += 1
            origin[v] = TreePoint(edge=e, offset=off)
            where[(e, off)] = v
            edges.append((prev, v, off - prev_off))
            prev, prev_off = v, off
        edges.append((prev, b, w - prev_off))
    new = SimplicialTree(n, edges, T.labels)
    ids = [p.node if p.edge is None else where[(p.edge, round(p.offset, 12))] for p in points]
    return new, ids, origin


@dataclass
class SpannedSubtree:
    tree: SimplicialTree
    embedding: list          # points of A as TreePoints of ``tree``
    origin: dict             # node of ``tree`` -> TreePoint of the ambient tree


def spanned_subtree(T: SimplicialTree, A, tol: float = DEFAULT_TOL) -> SpannedSubtree:
    """Union of the geodesics between points of ``A``, as a tree."""
    A = list(A)
    if not A:
        raise ValueError("need at least one point")
    R, ids, origin = refine(T, A, tol)
    keep = set(range(R.n_nodes))
    targets = set(ids)
    deg = {v: R.degree(v) for v in keep}
    stack = [v for v in keep if deg[v] <= 1 and v not in targets]
    while stack:
        v = stack.pop()
        if v not in keep:
            continue
        keep.discard(v)
        for u, _ in R.adj[v]:
            if u in keep:
                deg[u] -= 1
                if deg[u] <= 1 and u not in targets:
                    stack.append(u)
    if len(targets) == 1:
        keep = set(targets)
    order = sorted(keep)
    new_id = {v: i for i, v in enumerate(order)}
    edges = [(new_id[a], new_id[b], w) for a, b, w in R.edges if a in keep and b in keep]
    labels = {new_id[v]: lab for v, lab in R.labels.items() if v in keep}
    sub = SimplicialTree(len(order), edges, labels)
    emb = [TreePoint(node=new_id[v]) for v in ids]
    back = {new_id[v]: origin[v] for v in order}
    ok, _ = strictly_spans(sub, emb, sub.node_points(), tol)
    if not ok:
        raise RuntimeError("spanned subtree is not strictly spanned by its generators")
    return SpannedSubtree(sub, emb, back)


def strictly_spans(T: SimplicialTree, A, queries, tol: float = DEFAULT_TOL):
    """Check ``d(x, x') + d(x', a) = d(x, a)`` for some ``a`` in ``A``, for all query pairs."""
    A = list(A)
    Q = list(queries)
    DQA = np.array([[T.distance(q, a) for a in A] for q in Q])
    DQQ = np.array([[T.distance(p, q) for q in Q] for p in Q])
    for i, j in itertools.product(range(len(Q)), repeat=2):
        if (np.abs(DQQ[i, j] + DQA[j] - DQA[i]) <= tol).any():
            continue
        return False, (Q[i], Q[j])
    return True, None


def tree_net(T: SimplicialTree, h: float, tol: float = DEFAULT_TOL) -> list[TreePoint]:
    """All nodes plus interior edge points at spacing at most ``2h``."""
    if not h > 0:
        raise ValueError("mesh must be positive")
    pts = T.node_points()
    for e, (_, _, w) in enumerate(T.edges):
        k = max(1, math.ceil(w / (2 * h) - tol))
        pts.extend(TreePoint(edge=e, offset=w * j / k) for j in range(1, k))
    return pts


# -- trees as injective spaces ------------------------------------------------------

class TreeSpace:
    """A tree viewed as an injective metric space.

    Ball intersections are solved in the hull of the leaves (which the tree
    realizes isometrically) and mapped back to tree points.
    """

    def __init__(self, T: SimplicialTree, tol: float = DEFAULT_TOL):
        self.tree = T
        self.tol = tol
        self._leaves = T.leaves()
        self._leaf_space = T.leaf_metric(self._leaves) if len(self._leaves) > 1 else None

    def __repr__(self) -> str:
        return f"TreeSpace({self.tree!r})"

    def distance(self, p, q) -> float:
        return self.tree.distance(p, q)

    def key(self, p):
        return self.tree.key(p)

    def distances(self, p, pts) -> np.ndarray:
        return np.array([self.tree.distance(p, q) for q in pts])

    def pairwise(self, pts) -> np.ndarray:
        return np.array([[self.tree.distance(p, q) for q in pts] for p in pts])

    def to_hull(self, p: TreePoint) -> np.ndarray:
        return np.array([self.tree.distance(p, TreePoint(node=v)) for v in self._leaves])

    def from_hull(self, g) -> TreePoint:
        """Tree point whose leaf distances are ``g`` (``g`` extremal)."""
        g = np.asarray(g, dtype=float)
        L = self._leaves
        D = self._leaf_space.dist
        slack = g[:, None] + g[None, :] - D
        np.fill_diagonal(slack, np.inf)
        i = int(np.argmin(g))
        j = int(np.argmin(slack[i]))
        p = self.tree.point_along(L[i], L[j], g[i], self.tol)
        err = np.abs(self.to_hull(p) - g).max()
        if err > 10 * self.tol * max(1.0, float(D.max())):
            raise ts.BallIntersectionError(f"hull point does not lie on the tree (off by {err:.3g})")
        return p

    def ball_intersection(self, centers, radii, tol: float | None = None) -> TreePoint:
        tol = self.tol if tol is None else tol
        if self._leaf_space is None:
            return TreePoint(node=0)
        hull = [self.to_hull(c) for c in centers]
        g = ts.ball_intersection(self._leaf_space, hull, radii, tol)
        p = self.from_hull(g.values)
        miss = max(self.distance(p, c) - r for c, r in zip(centers, radii))
        if miss > 10 * tol:
            raise ts.BallIntersectionError(f"tree ball containment failed by {miss:.3g}")
        return p

    def net(self, h: float) -> list[TreePoint]:
        return tree_net(self.tree, h, self.tol)
