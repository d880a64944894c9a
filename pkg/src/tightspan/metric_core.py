"""Finite metric spaces, axiom validation and set-level predicates.

A :class:`FiniteMetricSpace` is the universal input of the package: an
ordered tuple of labels plus a symmetric distance matrix.  Point sets inside
a space are addressed by integer index or by label.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

DEFAULT_TOL = 1e-9


class MetricValidationError(ValueError):
    """Raised when a matrix fails the metric axioms; carries the report."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__(report.summary())


@dataclass
class ValidationReport:
    """Per-axiom pass/fail with the first violating index tuple."""

    square: bool = True
    finite: bool = True
    zero_diagonal: bool = True
    nonnegative: bool = True
    separation: bool = True
    symmetric: bool = True
    triangle: bool = True
    violations: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all((self.square, self.finite, self.zero_diagonal,
                    self.nonnegative, self.separation, self.symmetric,
                    self.triangle))

    def __bool__(self) -> bool:
        return self.ok

    def summary(self) -> str:
        if self.ok:
            return "metric ok"
        return "; ".join(f"{k}: {v}" for k, v in self.violations.items())


def validate_metric(m, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Check the metric axioms of a square matrix within ``tol``.

    Returns a report; never raises.  Triangle violations are reported as
    ``(i, j, k)`` meaning ``d[i, j] > d[i, k] + d[k, j]``.
    """
    rep = ValidationReport()
    D = np.asarray(m.dist if isinstance(m, FiniteMetricSpace) else m, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        rep.square = False
        rep.violations["square"] = f"shape {D.shape}"
        return rep
    n = D.shape[0]
    if not np.all(np.isfinite(D)):
        rep.finite = False
        i, j = np.argwhere(~np.isfinite(D))[0]
        rep.violations["finite"] = (int(i), int(j))
        return rep
    diag = np.abs(np.diag(D))
    if n and diag.max() > tol:
        rep.zero_diagonal = False
        rep.violations["zero_diagonal"] = int(np.argmax(diag))
    if (D < -tol).any():
        rep.nonnegative = False
        i, j = np.argwhere(D < -tol)[0]
        rep.violations["nonnegative"] = (int(i), int(j))
    asym = np.abs(D - D.T)
    if (asym > tol).any():
        rep.symmetric = False
        i, j = np.argwhere(asym > tol)[0]
        rep.violations["symmetric"] = (int(i), int(j))
    off = D + np.eye(n) * (2 * tol + 1.0)
    if n and (off <= tol).any():
        rep.separation = False
        i, j = np.argwhere(off <= tol)[0]
        rep.violations["separation"] = (int(i), int(j))
    # via[i, k, j] = d[i, k] + d[k, j]
    via = D[:, :, None] + D[None, :, :]
    excess = D[:, None, :] - via
    if n and excess.max() > tol:
        rep.triangle = False
        i, k, j = np.unravel_index(int(np.argmax(excess > tol)), excess.shape)
        rep.violations["triangle"] = (int(i), int(j), int(k))
    return rep


class FiniteMetricSpace:
    """Labeled points with a validated, symmetric distance matrix.

    Matrices whose asymmetry is within ``tol`` are symmetrized to the average;
    anything else failing :func:`validate_metric` raises
    :class:`MetricValidationError`.  Instances are treated as immutable.
    """

    def __init__(self, labels: Sequence[str], dist, tol: float = DEFAULT_TOL):
        labels = tuple(str(a) for a in labels)
        D = np.array(dist, dtype=float)
        if D.ndim != 2 or D.shape != (len(labels), len(labels)):
            raise ValueError(f"matrix shape {D.shape} does not match {len(labels)} labels")
        if len(set(labels)) != len(labels) or any(not a for a in labels):
            raise ValueError("labels must be unique and nonempty")
        rep = validate_metric(D, tol)
        if not rep:
            raise MetricValidationError(rep)
        D = (D + D.T) / 2
        np.fill_diagonal(D, 0.0)
        D.setflags(write=False)
        self.labels = labels
        self.dist = D
        self._index = {a: i for i, a in enumerate(labels)}

    def __len__(self) -> int:
        return len(self.labels)

    def __repr__(self) -> str:
        return f"FiniteMetricSpace({list(self.labels)!r})"

    def __eq__(self, other) -> bool:
        return (isinstance(other, FiniteMetricSpace) and self.labels == other.labels
                and np.array_equal(self.dist, other.dist))

    __hash__ = object.__hash__

    def index(self, p) -> int:
        """Index of a point given by label or index."""
        if isinstance(p, (int, np.integer)):
            if not 0 <= p < len(self):
                raise KeyError(f"point index {p} out of range")
            return int(p)
        try:
            return self._index[p]
        except KeyError:
            raise KeyError(f"unknown point {p!r}") from None

    def indices(self, pts: Iterable) -> list[int]:
        idx = [self.index(p) for p in pts]
        if len(set(idx)) != len(idx):
            raise ValueError("subset contains repeated points")
        return idx

    # point-space protocol shared with tight spans and trees
    def points(self) -> list[int]:
        return list(range(len(self)))

    def distance(self, p, q) -> float:
        return float(self.dist[self.index(p), self.index(q)])

    def key(self, p):
        return self.index(p)

    def distances(self, p, pts) -> np.ndarray:
        return self.dist[self.index(p), [self.index(q) for q in pts]]

    def pairwise(self, pts) -> np.ndarray:
        idx = [self.index(q) for q in pts]
        return self.dist[np.ix_(idx, idx)]

    def subspace(self, pts: Iterable) -> "FiniteMetricSpace":
        idx = self.indices(pts)
        return FiniteMetricSpace([self.labels[i] for i in idx], self.dist[np.ix_(idx, idx)])

    def permuted(self, order: Sequence[int]) -> "FiniteMetricSpace":
        order = list(order)
        return FiniteMetricSpace([self.labels[i] for i in order], self.dist[np.ix_(order, order)])


def _as_matrix(space) -> np.ndarray:
    if isinstance(space, FiniteMetricSpace):
        return space.dist
    return np.asarray(space, dtype=float)


def _subset_indices(space, subset) -> list[int]:
    if isinstance(space, FiniteMetricSpace):
        return space.indices(subset)
    return [int(i) for i in subset]


def diameter(m) -> float:
    D = _as_matrix(m)
    if D.size == 0:
        raise ValueError("diameter of an empty space")
    return float(D.max())


def four_point_violation(m, tol: float = DEFAULT_TOL):
    """Return the first quadruple violating the four-point condition, or None."""
    D = _as_matrix(m)
    for x, y, z, w in itertools.combinations(range(len(D)), 4):
        s = sorted((D[x, y] + D[z, w], D[x, z] + D[y, w], D[x, w] + D[y, z]))
        if s[2] - s[1] > tol:
            return (x, y, z, w)
    return None


def is_four_point(m, tol: float = DEFAULT_TOL) -> bool:
    """True iff the two largest of the three pair sums agree on every quadruple."""
    return four_point_violation(m, tol) is None


def spans_check(space, subset, mode: str = "spans", tol: float = DEFAULT_TOL):
    """Check whether ``subset`` spans (or strictly spans) a finite space.

    For every ordered pair ``(x, x')`` the identity
    ``d(x, x') = max_a (d(x, a) - d(x', a))`` must hold.  On a finite space
    the supremum is a maximum, so both modes give the same answer.

    Returns ``(ok, pair)`` where ``pair`` is ``None`` on success and a
    violating ordered index pair otherwise.
    """
    if mode not in ("spans", "strictly-spans"):
        raise ValueError(f"unknown mode {mode!r}")
    D = _as_matrix(space)
    A = _subset_indices(space, subset)
    if not A:
        raise ValueError("subset must be nonempty")
    # best[x, x'] = max_a d(x, a) - d(x', a)
    best = (D[:, A][:, None, :] - D[:, A][None, :, :]).max(axis=2)
    bad = np.abs(D - best) > tol
    if bad.any():
        i, j = np.argwhere(bad)[0]
        return False, (int(i), int(j))
    return True, None


def covering_radius(space, subset) -> float:
    D = _as_matrix(space)
    S = _subset_indices(space, subset)
    if not S:
        return float("inf")
    return float(D[:, S].min(axis=1).max())


def is_net(space, subset, alpha: float, tol: float = DEFAULT_TOL) -> bool:
    """True iff every point lies within ``alpha`` of the subset."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    return covering_radius(space, subset) <= alpha + tol


# -- fixtures ---------------------------------------------------------------

def _tree_metric(nodes: Sequence[str], edges: Sequence[tuple[str, str, float]]) -> np.ndarray:
    idx = {a: i for i, a in enumerate(nodes)}
    n = len(nodes)
    D = np.full((n, n), np.inf)
    np.fill_diagonal(D, 0.0)
    for a, b, w in edges:
        D[idx[a], idx[b]] = D[idx[b], idx[a]] = w
    for k in range(n):
        D = np.minimum(D, D[:, [k]] + D[[k], :])
    return D


def z_n_coordinates(n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    bottom = [(8 * k, 0) for k in range(n + 1)]
    top = [(8 * k + 4, 4) for k in range(n)]
    return np.array(sorted(bottom + top), dtype=float)


def l1_space(coords, labels=None) -> FiniteMetricSpace:
    P = np.asarray(coords, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    D = np.abs(P[:, None, :] - P[None, :, :]).sum(axis=-1)
    if labels is None:
        labels = [f"z{i + 1}" for i in range(len(P))]
    return FiniteMetricSpace(labels, D)


def make_fixture(name: str, N: float | None = None, n: int | None = None) -> FiniteMetricSpace:
    """Build one of the named example spaces.

    Names: ``SEG2``, ``INTRO_A``, ``INTRO_B``, ``INTRO_VX``, ``INTRO_VY``,
    ``EX33_A`` / ``EX33_B`` (need ``N > 4``) and ``Z_n`` (needs ``n >= 1``).
    """
    key = name.upper()
    if key == "SEG2":
        return FiniteMetricSpace(["p", "q"], [[0, 2], [2, 0]])
    if key == "INTRO_A":
        return FiniteMetricSpace(["a1", "a2", "a3", "a4"],
                                 [[0, 4, 6, 6], [4, 0, 6, 6], [6, 6, 0, 4], [6, 6, 4, 0]])
    if key == "INTRO_B":
        D = np.full((4, 4), 8.0)
        np.fill_diagonal(D, 0.0)
        D[0, 1] = D[1, 0] = D[2, 3] = D[3, 2] = 2.0
        return FiniteMetricSpace(["b1", "b2", "b3", "b4"], D)
    if key == "INTRO_VX":
        nodes = ["a1", "a2", "a3", "a4", "v1", "v2"]
        edges = [("a1", "v1", 2), ("a2", "v1", 2), ("v1", "v2", 2),
                 ("a3", "v2", 2), ("a4", "v2", 2)]
        return FiniteMetricSpace(nodes, _tree_metric(nodes, edges))
    if key == "INTRO_VY":
        nodes = ["b1", "b2", "b3", "b4", "w1", "w2"]
        edges = [("b1", "w1", 1), ("b2", "w1", 1), ("w1", "w2", 6),
                 ("b3", "w2", 1), ("b4", "w2", 1)]
        return FiniteMetricSpace(nodes, _tree_metric(nodes, edges))
    if key in ("EX33_A", "EX33_B"):
        if N is None or not N > 4:
            raise ValueError("EX33 fixtures need N > 4")
        N = float(N)
        if key == "EX33_A":
            D = np.array([[0, 4, N, N + 4], [4, 0, N + 4, N],
                          [N, N + 4, 0, 4], [N + 4, N, 4, 0]])
            return FiniteMetricSpace(["a1", "a2", "a3", "a4"], D)
        D = np.full((4, 4), N + 2)
        np.fill_diagonal(D, 0.0)
        D[0, 1] = D[1, 0] = D[2, 3] = D[3, 2] = 2.0
        return FiniteMetricSpace(["b1", "b2", "b3", "b4"], D)
    if key == "Z_N":
        if n is None or n < 1:
            raise ValueError("Z_n needs n >= 1")
        return l1_space(z_n_coordinates(int(n)))
    raise ValueError(f"unknown fixture {name!r}")


FIXTURES = ("SEG2", "INTRO_A", "INTRO_B", "INTRO_VX", "INTRO_VY", "EX33_A", "EX33_B", "Z_n")
