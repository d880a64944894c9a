"""Relations, distortion and exact Gromov-Hausdorff distance of finite spaces.

``d_GH(A, B)`` is half the least distortion of a correspondence between A and
B.  The optimum is one of the finitely many values ``|d(a, a') - d(b, b')|``,
so :func:`min_distortion_correspondence` binary-searches that sorted list with
an exact feasibility search: a correspondence has distortion ``<= theta`` iff
its pairs are pairwise compatible at ``theta``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .metric_core import DEFAULT_TOL, FiniteMetricSpace, diameter, l1_space, z_n_coordinates

DEFAULT_BUDGET = 2_000_000


def _distances(space, p, pts) -> np.ndarray:
    f = getattr(space, "distances", None)
    if f is not None:
        return np.asarray(f(p, pts), dtype=float)
    return np.array([space.distance(p, q) for q in pts])


def _pairwise(space, pts) -> np.ndarray:
    f = getattr(space, "pairwise", None)
    if f is not None:
        return np.asarray(f(pts), dtype=float)
    return np.array([[space.distance(p, q) for q in pts] for p in pts])


class Relation:
    """A finite set of pairs between two point spaces, with cached distortion.

    ``left`` and ``right`` are point spaces: anything with ``distance(p, q)``
    and ``key(p)`` (finite metric spaces, tight spans, tree spaces).
    """

    def __init__(self, left, right, pairs=()):
        self.left = left
        self.right = right
        self.pairs: list = []
        self._keys: set = set()
        self._dis = 0.0
        for p, q in pairs:
            self.add(p, q)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __repr__(self) -> str:
        return f"Relation({len(self.pairs)} pairs, dis={self._dis:.6g})"

    def added_distortion(self, p, q) -> float:
        """Largest ``||p x| - |q y||`` over existing pairs ``(x, y)``."""
        if not self.pairs:
            return 0.0
        dl = _distances(self.left, p, [x for x, _ in self.pairs])
        dr = _distances(self.right, q, [y for _, y in self.pairs])
        return float(np.abs(dl - dr).max())

    def add(self, p, q) -> bool:
        k = (self.left.key(p), self.right.key(q))
        if k in self._keys:
            return False
        self._dis = max(self._dis, self.added_distortion(p, q))
        self.pairs.append((p, q))
        self._keys.add(k)
        return True

    @property
    def distortion(self) -> float:
        return self._dis

    def recompute(self) -> float:
        """Distortion from scratch (all pairs of pairs)."""
        P = self.pairs
        if not P:
            raise ValueError("empty relation")
        L = _pairwise(self.left, [p for p, _ in P])
        R = _pairwise(self.right, [q for _, q in P])
        return float(np.abs(L - R).max())

    def left_points(self) -> list:
        seen, out = set(), []
        for p, _ in self.pairs:
            k = self.left.key(p)
            if k not in seen:
                seen.add(k)
                out.append(p)
        return out

    def right_points(self) -> list:
        seen, out = set(), []
        for _, q in self.pairs:
            k = self.right.key(q)
            if k not in seen:
                seen.add(k)
                out.append(q)
        return out

    def inverse(self) -> "Relation":
        return Relation(self.right, self.left, [(q, p) for p, q in self.pairs])

    def partners(self, p) -> list:
        k = self.left.key(p)
        return [q for x, q in self.pairs if self.left.key(x) == k]


class Correspondence(Relation):
    """A relation whose projections cover ``left_set`` and ``right_set``."""

    def __init__(self, left, right, pairs, left_set=None, right_set=None):
        super().__init__(left, right, pairs)
        if left_set is None:
            left_set = left.points()
        if right_set is None:
            right_set = right.points()
        lk = {left.key(p) for p, _ in self.pairs}
        rk = {right.key(q) for _, q in self.pairs}
        if not ({left.key(p) for p in left_set} <= lk and {right.key(q) for q in right_set} <= rk):
            raise ValueError("relation is not left- and right-total")
        self.left_set = list(left_set)
        self.right_set = list(right_set)


def distortion(R) -> float:
    """Exact distortion of a relation (0 for a single pair)."""
    if isinstance(R, Relation):
        return R.recompute()
    raise TypeError("expected a Relation")


def _distortion_of(DA, DB, pairs) -> float:
    a = np.array([p for p, _ in pairs])
    b = np.array([q for _, q in pairs])
    return float(np.abs(DA[np.ix_(a, a)] - DB[np.ix_(b, b)]).max())


@dataclass
class GHResult:
    correspondence: Correspondence
    dis: float
    optimal: bool = True
    nodes: int = 0

    @property
    def gh(self) -> float:
        return self.dis / 2


def _greedy_pairs(DA, DB):
    """Match points by sorted distance profiles, both directions."""
    pa = np.sort(DA, axis=1)
    pb = np.sort(DB, axis=1)
    k = min(pa.shape[1], pb.shape[1])
    prof = np.abs(pa[:, None, -k:] - pb[None, :, -k:]).max(axis=2)
    pairs = {(int(a), int(np.argmin(prof[a]))) for a in range(len(DA))}
    pairs |= {(int(np.argmin(prof[:, b])), b) for b in range(len(DB))}
    return sorted(pairs)


class _Search:
    """Exact search for a correspondence of distortion <= theta."""

    def __init__(self, DA, DB, budget):
        self.DA, self.DB = DA, DB
        self.nA, self.nB = len(DA), len(DB)
        # G[a, b, a', b'] = | d(a, a') - d(b, b') |
        self.G = np.abs(DA[:, None, :, None] - DB[None, :, None, :]).reshape(
            self.nA * self.nB, self.nA * self.nB)
        self.budget = budget
        self.nodes = 0

    def feasible(self, theta):
        """Pairs of a correspondence with distortion <= theta, None, or 'budget'."""
        M = self.G <= theta
        nA, nB = self.nA, self.nB
        allowed = np.ones(nA * nB, dtype=bool)
        chosen: list[int] = []
        coverA = np.zeros(nA, dtype=int)
        coverB = np.zeros(nB, dtype=int)

        def rec(allowed):
            self.nodes += 1
            if self.nodes > self.budget:
                return "budget"
            A = allowed.reshape(nA, nB)
            best = None
            for a in np.flatnonzero(coverA == 0):
                c = int(A[a].sum())
                if best is None or c < best[0]:
                    best = (c, 0, int(a))
            for b in np.flatnonzero(coverB == 0):
                c = int(A[:, b].sum())
                if best is None or c < best[0]:
                    best = (c, 1, int(b))
            if best is None:
                return list(chosen)
            c, side, e = best
            if c == 0:
                return None
            if side == 0:
                cands = [e * nB + b for b in np.flatnonzero(A[e])]
                # prefer partners that also cover something new
                cands.sort(key=lambda p: (coverB[p % nB] > 0, p))
            else:
                cands = [a * nB + e for a in np.flatnonzero(A[:, e])]
                cands.sort(key=lambda p: (coverA[p // nB] > 0, p))
            for p in cands:
                chosen.append(p)
                coverA[p // nB] += 1
                coverB[p % nB] += 1
                out = rec(allowed & M[p])
                chosen.pop()
                coverA[p // nB] -= 1
                coverB[p % nB] -= 1
                if out is not None:
                    return out
            return None

        out = rec(allowed)
        if out is None or isinstance(out, str):
            return out
        return [(int(p // nB), int(p % nB)) for p in out]


def min_distortion_correspondence(A: FiniteMetricSpace, B: FiniteMetricSpace,
                                  budget: int = DEFAULT_BUDGET,
                                  tol: float = DEFAULT_TOL) -> GHResult:
    """Least-distortion correspondence between two finite spaces.

    The returned ``dis`` is exact (``d_GH = dis / 2``) unless the node budget
    runs out, in which case the best correspondence found is returned with
    ``optimal=False``.
    """
    DA, DB = A.dist, B.dist
    pairs = _greedy_pairs(DA, DB)
    best_pairs, ub = pairs, _distortion_of(DA, DB, pairs)
    lb = abs(diameter(A) - diameter(B))
    values = np.unique(np.abs(DA[:, None, :, None] - DB[None, :, None, :]))
    # merge values closer than tol so that float noise cannot split a level
    cand = [values[0]]
    for v in values[1:]:
        if v - cand[-1] > tol:
            cand.append(v)
    cand = np.array(cand)
    search = _Search(DA, DB, budget)
    optimal = True
    lo = int(np.searchsorted(cand, lb - tol))
    hi = int(np.searchsorted(cand, ub - tol))  # cand[hi] ~ ub is feasible
    hi = min(hi, len(cand) - 1)
    # invariant: every level below index lo is infeasible, level hi is feasible
    while lo < hi:
        mid = (lo + hi) // 2
        out = search.feasible(cand[mid] + tol)
        if out == "budget":
            optimal = False
            break
        if out is None:
            lo = mid + 1
        else:
            d = _distortion_of(DA, DB, out)
            if d < ub:
                best_pairs, ub = out, d
            hi = min(mid, int(np.searchsorted(cand, d - tol)))
    corr = Correspondence(A, B, best_pairs)
    return GHResult(corr, ub, optimal, search.nodes)


def gh_distance(A: FiniteMetricSpace, B: FiniteMetricSpace, **kw) -> float:
    return min_distortion_correspondence(A, B, **kw).gh


def exhaustive_min_distortion(A: FiniteMetricSpace, B: FiniteMetricSpace) -> float:
    """Brute force over every correspondence; only for tiny spaces."""
    DA, DB = A.dist, B.dist
    allpairs = list(itertools.product(range(len(A)), range(len(B))))
    best = math.inf
    for mask in range(1, 1 << len(allpairs)):
        pairs = [allpairs[k] for k in range(len(allpairs)) if mask >> k & 1]
        if len({a for a, _ in pairs}) < len(A) or len({b for _, b in pairs}) < len(B):
            continue
        best = min(best, _distortion_of(DA, DB, pairs))
    return best


def gh_lower_bound_diam(A, B) -> float:
    """``|diam A - diam B| / 2``."""
    return abs(diameter(A) - diameter(B)) / 2


def z_n_set(n: int) -> FiniteMetricSpace:
    """The 2n+1 points ``({0,8,..,8n} x {0}) u ({4,12,..,8n-4} x {4})`` under l1."""
    return l1_space(z_n_coordinates(n))


def line_distortion_lower_bound(Z: FiniteMetricSpace) -> float:
    """Chain bound on the distortion of any map of Z into the real line.

    Sorting the images, the ``m = |Z| - 1`` consecutive gaps are each at least
    ``delta - eps`` and add up to at most ``D + eps``, so
    ``eps >= (m * delta - D) / (m + 1)``.
    """
    n = len(Z)
    if n < 2:
        raise ValueError("need at least two points")
    D = Z.dist
    delta = float(D[~np.eye(n, dtype=bool)].min())
    m = n - 1
    return max(0.0, (m * delta - diameter(Z)) / (m + 1))


def _line_lp(D, order):
    n = len(order)
    # variables t_0..t_{n-1}, eps ; images in the given order
    c = np.zeros(n + 1)
    c[-1] = 1.0
    rows, rhs = [], []
    for i, j in itertools.combinations(range(n), 2):
        d = D[order[i], order[j]]
        r = np.zeros(n + 1)
        r[j], r[i], r[-1] = 1, -1, -1
        rows.append(r)
        rhs.append(d)           # t_j - t_i - eps <= d
        r = np.zeros(n + 1)
        r[j], r[i], r[-1] = -1, 1, -1
        rows.append(r)
        rhs.append(-d)          # d - (t_j - t_i) <= eps
    for i in range(n - 1):
        r = np.zeros(n + 1)
        r[i], r[i + 1] = 1, -1
        rows.append(r)
        rhs.append(0.0)
    bounds = [(0, 0)] + [(None, None)] * (n - 1) + [(0, None)]
    res = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"line LP failed: {res.message}")
    return float(res.fun), res.x[:-1]


def min_distortion_map_to_line(Z: FiniteMetricSpace, max_points: int = 8):
    """Exact least distortion of a map ``Z -> R``.

    Every ordering of the images is tried (up to reversal); for a fixed
    ordering the best images solve a small linear program.  Returns
    ``(images, eps)`` with ``images[i]`` the image of point ``i``.
    """
    n = len(Z)
    if n > max_points:
        raise ValueError(f"{n} points exceeds the ordering budget of {max_points}")
    if n == 1:
        return np.zeros(1), 0.0
    best = (math.inf, None)
    for order in itertools.permutations(range(n)):
        if order[0] > order[-1]:
            continue
        eps, t = _line_lp(Z.dist, order)
        if eps < best[0] - 1e-12:
            img = np.empty(n)
            img[list(order)] = t
            best = (eps, img)
    return best[1], best[0]


def is_rough_isometry(X, Y, mapping, eps: float, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``mapping`` (index or label of ``Y`` for each point of ``X``) has distortion <= eps."""
    if isinstance(mapping, dict):
        mapping = [mapping[lab] for lab in X.labels]
    img = [Y.index(q) for q in mapping]
    if len(img) != len(X):
        raise ValueError("mapping must be total on X")
    dis = float(np.abs(X.dist - Y.dist[np.ix_(img, img)]).max())
    return dis <= eps + tol


def line_space(coords, labels=None) -> FiniteMetricSpace:
    coords = np.asarray(coords, dtype=float)
    if labels is None:
        labels = [f"t{i}" for i in range(len(coords))]
    return FiniteMetricSpace(labels, np.abs(coords[:, None] - coords[None, :]))
