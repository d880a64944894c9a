"""Isbell's injective hull of a finite metric space.

Points of the hull E X are extremal functions ``f`` on X: pointwise-minimal
functions with ``f(x) + f(y) >= d(x, y)``.  They form the bounded faces of the
admissibility polyhedron ``P(X) = {f : f(x) + f(y) >= d(x, y)}``; the metric is
the sup-norm.

The complex is enumerated combinatorially.  For a point ``f`` of ``P(X)`` let
its *tight graph* have an edge ``xy`` whenever ``f(x) + f(y) = d(x, y)`` (loops
``xx`` when ``f(x) = 0``).  The face through ``f`` has dimension equal to the
number of bipartite components of that graph (isolated points count), and is
bounded iff no point is isolated.  Edge directions out of a vertex are the
extreme rays of its tangent cone, which are signed indicator vectors of a
single bipartite component; walking those rays from ``d_z`` reaches every
vertex because the bounded complex is connected.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .metric_core import DEFAULT_TOL, FiniteMetricSpace

RETRACT_TOL = 1e-12
RETRACT_MAX_ITER = 10**6
MAX_COMPLEX_POINTS = 8


class InadmissibleError(ValueError):
    """A function violates ``f(x) + f(y) >= d(x, y)`` for some pair."""

    def __init__(self, pair, deficit):
        self.pair = pair
        self.deficit = deficit
        super().__init__(f"inadmissible at {pair}: short by {deficit:.3g}")


class RetractionError(RuntimeError):
    pass


class BallIntersectionError(RuntimeError):
    """Incompatible radii, or a numerically failed containment check."""


class ComplexError(RuntimeError):
    pass


def _dist(X) -> np.ndarray:
    return X.dist if isinstance(X, FiniteMetricSpace) else np.asarray(X, dtype=float)


def _values(f) -> np.ndarray:
    return f.values if isinstance(f, ExtremalFunction) else np.asarray(f, dtype=float)


@dataclass(frozen=True, eq=False)
class ExtremalFunction:
    """A point of E X: a function vector over the points of ``base``."""

    base: FiniteMetricSpace
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __repr__(self) -> str:
        return f"ExtremalFunction({np.round(self.values, 12).tolist()})"

    def __eq__(self, other) -> bool:
        return isinstance(other, ExtremalFunction) and np.array_equal(self.values, other.values)

    def __hash__(self) -> int:
        return hash(self.key())

    def key(self) -> tuple:
        return tuple(np.round(self.values, 9) + 0.0)

    def __getitem__(self, p) -> float:
        return float(self.values[self.base.index(p)])


def sup_distance(f, g) -> float:
    return float(np.abs(_values(f) - _values(g)).max())


def star(X, f) -> np.ndarray:
    """``f*(x) = max_y d(x, y) - f(y)``."""
    D = _dist(X)
    return (D - _values(f)[None, :]).max(axis=1)


def admissibility_deficit(X, f):
    """Largest ``d(x, y) - f(x) - f(y)`` and the pair attaining it."""
    D = _dist(X)
    v = _values(f)
    gap = D - v[:, None] - v[None, :]
    i, j = np.unravel_index(int(np.argmax(gap)), gap.shape)
    return float(gap[i, j]), (int(i), int(j))


def is_admissible(X, f, tol: float = DEFAULT_TOL) -> bool:
    return admissibility_deficit(X, f)[0] <= tol


def is_extremal(X, f, tol: float = DEFAULT_TOL) -> bool:
    """Admissible and fixed by :func:`star` within ``tol``."""
    v = _values(f)
    if not np.all(np.isfinite(v)):
        return False
    return is_admissible(X, v, tol) and float(np.abs(v - star(X, v)).max()) <= tol


def canonical_embed(X: FiniteMetricSpace, z) -> ExtremalFunction:
    """The distance function ``d_z``."""
    return ExtremalFunction(X, X.dist[X.index(z)].copy())


def retract(X: FiniteMetricSpace, g, tol: float = DEFAULT_TOL) -> ExtremalFunction:
    """Nonexpansive retraction of an admissible function onto E X.

    Iterates ``f <- (f + f*) / 2``; for admissible ``f`` this never increases
    any coordinate and stays admissible, so the output lies below ``g``.
    """
    f = np.array(_values(g), dtype=float)
    deficit, pair = admissibility_deficit(X, f)
    if deficit > tol:
        raise InadmissibleError(pair, deficit)
    D = _dist(X)
    for _ in range(RETRACT_MAX_ITER):
        s = (D - f[None, :]).max(axis=1)
        if np.abs(f - s).max() <= RETRACT_TOL:
            return ExtremalFunction(X, f)
        f = (f + s) / 2
    raise RetractionError("retraction did not converge")


def ball_intersection(X: FiniteMetricSpace, centers, radii, tol: float = DEFAULT_TOL) -> ExtremalFunction:
    """A point of E X within ``radii[i]`` of every ``centers[i]``.

    Requires ``r_i + r_j >= |c_i c_j|``.  The answer is the retraction of the
    pointwise minimum of ``c_i + r_i``; containment is re-checked at runtime.
    """
    C = np.array([_values(c) for c in centers], dtype=float)
    r = np.asarray(radii, dtype=float)
    if len(C) == 0 or len(C) != len(r):
        raise ValueError("need matching nonempty centers and radii")
    if (r < -tol).any():
        raise BallIntersectionError("negative radius")
    gaps = np.abs(C[:, None, :] - C[None, :, :]).max(axis=2) - (r[:, None] + r[None, :])
    if gaps.max() > tol:
        i, j = np.unravel_index(int(np.argmax(gaps)), gaps.shape)
        raise BallIntersectionError(f"radii of balls {int(i)} and {int(j)} are incompatible")
    env = (C + r[:, None]).min(axis=0)
    # compatibility within tol only guarantees admissibility within 2*tol
    h = retract(X, env, tol=3 * tol)
    miss = np.abs(C - h.values[None, :]).max(axis=1) - r
    if miss.max() > tol:
        raise BallIntersectionError(
            f"containment check failed by {miss.max():.3g} at ball {int(np.argmax(miss))}")
    return h


# -- the polyhedral complex ---------------------------------------------------

def tight_pairs(D, f, tol):
    slack = f[:, None] + f[None, :] - D
    n = len(f)
    return frozenset((i, j) for i in range(n) for j in range(i, n) if slack[i, j] <= tol)


def _components(n, pairs):
    """Union-find with parity: returns list of (members, coloring or None)."""
    parent = list(range(n))
    parity = [0] * n
    odd = [False] * n

    def find(a):
        p = 0
        while parent[a] != a:
            p ^= parity[a]
            a = parent[a]
        return a, p

    # path compression is unnecessary at n <= 8
    for i, j in pairs:
        ri, pi = find(i)
        rj, pj = find(j)
        if ri == rj:
            if pi == pj:
                odd[ri] = True
        else:
            parent[rj] = ri
            parity[rj] = pi ^ pj ^ 1
            odd[ri] = odd[ri] or odd[rj]
    comps = {}
    for a in range(n):
        r, p = find(a)
        comps.setdefault(r, []).append((a, p))
    out = []
    for r, mem in comps.items():
        out.append(([a for a, _ in mem], None if odd[r] else [p for _, p in mem]))
    return out


def face_dimension(n: int, pairs) -> int:
    return sum(1 for _, col in _components(n, pairs) if col is not None)


def is_bounded_face(n: int, pairs) -> bool:
    covered = set()
    for i, j in pairs:
        covered.update((i, j))
    return len(covered) == n


def _face_directions(n: int, pairs):
    """Unit directions (one per bipartite component) spanning the face."""
    dirs = []
    for mem, col in _components(n, pairs):
        if col is None:
            continue
        u = np.zeros(n)
        for a, p in zip(mem, col):
            u[a] = 1.0 if p == 0 else -1.0
        dirs.append(u)
    return dirs


def _polish(D, f, pairs):
    """Re-solve the tight equations of a vertex from its tight graph.

    In each component ``f_v = s_v f_root + c_v`` along a BFS tree; an edge
    closing an odd cycle (or a loop) then fixes ``f_root``.  Sums of input
    distances are exact for integer data, so vertices come out clean.
    """
    n = len(f)
    adj = [[] for _ in range(n)]
    for i, j in sorted(pairs):
        adj[i].append(j)
        if i != j:
            adj[j].append(i)
    out = np.array(f, dtype=float)
    sign = [0] * n
    const = [0.0] * n
    for root in range(n):
        if sign[root]:
            continue
        sign[root], const[root] = 1, 0.0
        order, queue = [root], [root]
        while queue:
            u = queue.pop(0)
            for v in adj[u]:
                if not sign[v]:
                    sign[v], const[v] = -sign[u], D[u, v] - const[u]
                    order.append(v)
                    queue.append(v)
        fix = None
        for u in order:
            for v in adj[u]:
                if sign[u] == sign[v]:
                    fix = (D[u, v] - const[u] - const[v]) / (2 * sign[u])
                    break
            if fix is not None:
                break
        if fix is None:
            continue  # bipartite component: keep the numeric values
        for v in order:
            out[v] = sign[v] * fix + const[v]
    return out


@dataclass
class TightSpanComplex:
    """Vertices, edges and 2-cells of E X.

    ``edges`` holds ``(i, j, length)`` with ``i < j``; ``cells2`` holds vertex
    id lists in cyclic order.  Faces of dimension three or more are kept in
    ``higher_cells`` (dimension -> vertex id lists) and are never sampled.
    """

    base: FiniteMetricSpace
    vertices: list
    edges: list
    cells2: list
    higher_dim_present: bool = False
    higher_cells: dict = field(default_factory=dict)
    _tight: list = field(default_factory=list, repr=False)

    @property
    def dimension(self) -> int:
        if self.higher_cells:
            return max(self.higher_cells)
        if self.cells2:
            return 2
        return 1 if self.edges else 0

    def vertex_matrix(self) -> np.ndarray:
        return np.array([v.values for v in self.vertices])

    def vertex_id(self, f, tol: float = 1e-7):
        V = self.vertex_matrix()
        d = np.abs(V - _values(f)[None, :]).max(axis=1)
        k = int(np.argmin(d))
        return k if d[k] <= tol else None

    def edge_lengths(self) -> list[float]:
        return sorted(w for _, _, w in self.edges)

    def cell_tight_pairs(self, ids) -> frozenset:
        return frozenset.intersection(*(self._tight[i] for i in ids))


def tight_span_complex(X: FiniteMetricSpace, tol: float = DEFAULT_TOL) -> TightSpanComplex:
    """Enumerate the bounded faces of the admissibility polyhedron of X."""
    n = len(X)
    if n > MAX_COMPLEX_POINTS:
        raise ComplexError(f"{n} points exceeds the enumeration budget of {MAX_COMPLEX_POINTS}")
    if n == 0:
        raise ComplexError("empty space")
    D = X.dist
    scale = max(1.0, float(D.max()))
    ttol = tol * scale

    keys: dict = {}
    verts: list[np.ndarray] = []
    tights: list[frozenset] = []
    edges: dict = {}

    def add_vertex(f):
        T = tight_pairs(D, f, ttol)
        if face_dimension(n, T) != 0:
            raise ComplexError(f"walk landed on a non-vertex with tight set {sorted(T)}")
        g = _polish(D, f, T)
        if np.abs(g - f).max() > 1e-6 * scale:
            raise ComplexError(f"inconsistent tight set {sorted(T)}")
        f = g
        k = tuple(np.round(f / scale, 8) + 0.0)
        if k in keys:
            return keys[k], False
        keys[k] = len(verts)
        verts.append(f)
        tights.append(tight_pairs(D, f, ttol))
        return keys[k], True

    start, _ = add_vertex(D[0].copy())
    queue = [start]
    signs = list(itertools.product((-1, 0, 1), repeat=n))
    while queue:
        vid = queue.pop(0)
        f = verts[vid]
        T = tights[vid]
        slack = f[:, None] + f[None, :] - D
        for s in signs:
            u = np.array(s, dtype=float)
            if not (u < 0).any():
                continue
            # stay inside the tangent cone
            if any(u[i] + u[j] < 0 for i, j in T):
                continue
            H = [(i, j) for i, j in T if u[i] + u[j] == 0]
            if face_dimension(n, H) != 1:
                continue
            rate = u[:, None] + u[None, :]
            mask = (rate < 0) & (slack > ttol)
            if not mask.any():
                continue
            t = float((slack[mask] / -rate[mask]).min())
            if t <= ttol:
                continue
            wid, new = add_vertex(f + t * u)
            if new:
                queue.append(wid)
            a, b = min(vid, wid), max(vid, wid)
            edges[(a, b)] = float(np.abs(verts[a] - verts[b]).max())

    # canonical ids: lexicographic order of function values
    order = sorted(range(len(verts)), key=lambda i: tuple(np.round(verts[i], 9)))
    remap = {old: new for new, old in enumerate(order)}
    vertices = [ExtremalFunction(X, verts[i]) for i in order]
    tight = [tights[i] for i in order]
    edge_list = sorted((min(remap[a], remap[b]), max(remap[a], remap[b]), w)
                       for (a, b), w in edges.items())

    faces = _enumerate_faces(n, tight, edge_list)
    cells2 = [_cyclic_order(vertices, ids, faces[2][ids]) for ids in sorted(faces.get(2, {}))]
    higher = {k: sorted(list(ids) for ids in v) for k, v in faces.items() if k >= 3}
    for ids in cells2:
        for f in _face_samples([vertices[i].values for i in ids]):
            if not is_extremal(X, f, 10 * ttol):
                raise ComplexError(f"2-cell {ids} contains a non-extremal point")
    for a, b, _ in edge_list:
        mid = (vertices[a].values + vertices[b].values) / 2
        if not is_extremal(X, mid, 10 * ttol):
            raise ComplexError(f"edge {(a, b)} has a non-extremal midpoint")
    return TightSpanComplex(X, vertices, edge_list, cells2, bool(higher), higher, tight)


def _enumerate_faces(n, tight, edge_list):
    """Faces of dimension >= 2, grown by joining a face with an incident edge."""
    nv = len(tight)
    incident = {v: [] for v in range(nv)}
    for a, b, _ in edge_list:
        incident[a].append(frozenset((a, b)))
        incident[b].append(frozenset((a, b)))

    def close(pairs):
        ids = frozenset(v for v in range(nv) if pairs <= tight[v])
        return ids, frozenset.intersection(*(tight[v] for v in ids))

    current = {}
    for a, b, _ in edge_list:
        ids, T = close(tight[a] & tight[b])
        current[ids] = T
    faces = {}
    dim = 1
    while current:
        nxt = {}
        for ids, T in current.items():
            for v in ids:
                for e in incident[v]:
                    if e <= ids:
                        continue
                    (w,) = e - {v}
                    pairs = T & tight[w]
                    if face_dimension(n, pairs) != dim + 1 or not is_bounded_face(n, pairs):
                        continue
                    new_ids, newT = close(pairs)
                    if face_dimension(n, newT) == dim + 1:
                        nxt[new_ids] = newT
        dim += 1
        if nxt:
            faces[dim] = {tuple(sorted(k)): v for k, v in nxt.items()}
        current = nxt
    return faces


def _cell_coordinates(points, pairs, n):
    """(s, t) coordinates of points in a 2-face, in which sup-norm is l-infinity."""
    u1, u2 = _face_directions(n, pairs)
    i1 = int(np.flatnonzero(u1)[0])
    i2 = int(np.flatnonzero(u2)[0])
    P = np.asarray(points)
    f0 = P[0]
    st = np.column_stack([(P[:, i1] - f0[i1]) * u1[i1], (P[:, i2] - f0[i2]) * u2[i2]])
    return f0, u1, u2, st


def _cyclic_order(vertices, ids, pairs):
    n = len(vertices[0].values)
    pts = [vertices[i].values for i in ids]
    _, _, _, st = _cell_coordinates(pts, pairs, n)
    c = st.mean(axis=0)
    ang = np.arctan2(st[:, 1] - c[1], st[:, 0] - c[0])
    return [ids[k] for k in np.argsort(ang, kind="stable")]


def _face_samples(pts):
    P = np.asarray(pts)
    yield P.mean(axis=0)
    for a, b in itertools.combinations(range(len(P)), 2):
        yield (P[a] + P[b]) / 2


# -- nets ------------------------------------------------------------------------

@dataclass
class NetSample:
    """Sample points of a complex whose covering radius is at most ``mesh``."""

    points: list
    mesh: float

    def matrix(self) -> np.ndarray:
        return np.array([p.values for p in self.points])


def _segment(a, b, spacing):
    length = float(np.abs(b - a).max())
    k = max(1, math.ceil(length / spacing - 1e-9))
    return [a + (b - a) * (j / k) for j in range(1, k)]


def sample_net(C: TightSpanComplex, h: float, tol: float = DEFAULT_TOL) -> NetSample:
    """Vertices, edge subdivisions at spacing ``<= 2h`` and a grid on each 2-cell.

    2-cells are sampled on a lattice of spacing ``h`` in their (s, t)
    coordinates, with their boundary edges subdivided at spacing ``h``; a point
    of the cell is then within ``h/2`` of a lattice point inside the cell or of
    a boundary point, hence within ``h`` of a sample.
    """
    if not h > 0:
        raise ValueError("mesh must be positive")
    if C.higher_dim_present:
        raise ComplexError("cells of dimension >= 3 cannot be sampled")
    X = C.base
    n = len(X)
    V = [v.values for v in C.vertices]
    cell_edges = set()
    for ids in C.cells2:
        for a, b in zip(ids, ids[1:] + ids[:1]):
            cell_edges.add((min(a, b), max(a, b)))
    pts = list(V)
    for a, b, _ in C.edges:
        spacing = h if (a, b) in cell_edges else 2 * h
        pts.extend(_segment(V[a], V[b], spacing))
    for ids in C.cells2:
        T = C.cell_tight_pairs(ids)
        f0, u1, u2, st = _cell_coordinates([V[i] for i in ids], T, n)
        lo = st.min(axis=0)
        hi = st.max(axis=0)
        for s in np.arange(math.floor(lo[0] / h), math.ceil(hi[0] / h) + 1) * h:
            for t in np.arange(math.floor(lo[1] / h), math.ceil(hi[1] / h) + 1) * h:
                f = f0 + s * u1 + t * u2
                if is_admissible(X, f, tol):
                    pts.append(f)
    seen = {}
    for p in pts:
        k = tuple(np.round(p, 9) + 0.0)
        seen.setdefault(k, p)
    ordered = [seen[k] for k in sorted(seen)]
    return NetSample([ExtremalFunction(X, p) for p in ordered], h)


class TightSpan:
    """E X as a point space: sup-norm distances, ball intersections, nets."""

    def __init__(self, X: FiniteMetricSpace, tol: float = DEFAULT_TOL):
        self.base = X
        self.tol = tol
        self._complex = None

    def __repr__(self) -> str:
        return f"TightSpan({list(self.base.labels)!r})"

    @property
    def complex(self) -> TightSpanComplex:
        if self._complex is None:
            self._complex = tight_span_complex(self.base, self.tol)
        return self._complex

    def distance(self, p, q) -> float:
        return sup_distance(p, q)

    def key(self, p):
        return p.key()

    def distances(self, p, pts) -> np.ndarray:
        if not len(pts):
            return np.zeros(0)
        V = np.array([q.values for q in pts])
        return np.abs(V - p.values[None, :]).max(axis=1)

    def pairwise(self, pts) -> np.ndarray:
        V = np.array([q.values for q in pts])
        return np.abs(V[:, None, :] - V[None, :, :]).max(axis=2)

    def embed(self, z) -> ExtremalFunction:
        return canonical_embed(self.base, z)

    def ball_intersection(self, centers, radii, tol: float | None = None) -> ExtremalFunction:
        return ball_intersection(self.base, centers, radii, self.tol if tol is None else tol)

    def net(self, h: float) -> list:
        return sample_net(self.complex, h, self.tol).points
