"""Random metrics, trees and hull points for experiments and property tests."""

from __future__ import annotations

import numpy as np

from .metric_core import FiniteMetricSpace, validate_metric
from .tight_span import ExtremalFunction, retract
from .tree_ops import SimplicialTree


def random_metric(rng: np.random.Generator, n: int, scale: float = 4.0,
                  noise: float = 0.15, min_sep: float = 0.2, prefix: str = "p") -> FiniteMetricSpace:
    """l-infinity distances of random points in a random-dimension cube, perturbed.

    The perturbation is resampled until the result is a metric whose points
    are at least ``min_sep`` apart.
    """
    labels = [f"{prefix}{i + 1}" for i in range(n)]
    for _ in range(1000):
        k = int(rng.integers(1, 4))
        P = rng.uniform(0, scale, size=(n, k))
        D = np.abs(P[:, None, :] - P[None, :, :]).max(axis=2)
        if n > 1 and D[~np.eye(n, dtype=bool)].min() < min_sep:
            continue
        for _ in range(20):
            E = rng.uniform(-noise, noise, size=(n, n))
            E = np.triu(E, 1)
            Dn = D + E + E.T
            if validate_metric(Dn) and (n < 2 or Dn[~np.eye(n, dtype=bool)].min() >= min_sep):
                return FiniteMetricSpace(labels, Dn)
        return FiniteMetricSpace(labels, D)
    raise RuntimeError("could not sample a separated metric")


def random_tree(rng: np.random.Generator, n_leaves: int, lo: float = 0.1, hi: float = 10.0,
                prefix: str = "t", multifurcate: float = 0.3) -> SimplicialTree:
    """Random topology with leaf labels and log-uniform edge lengths in ``[lo, hi]``."""
    def length():
        return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))

    if n_leaves < 2:
        return SimplicialTree(1, [], {0: f"{prefix}1"})
    edges = [[0, 1, length()]]
    labels = {0: f"{prefix}1", 1: f"{prefix}2"}
    n = 2
    for k in range(3, n_leaves + 1):
        internal = [v for v in range(n) if v not in labels]
        if internal and rng.random() < multifurcate:
            at = int(rng.choice(internal))
        else:
            e = int(rng.integers(len(edges)))
            a, b, w = edges[e]
            t = float(rng.uniform(0.2, 0.8)) * w
            at = n
            n += 1
            edges[e] = [a, at, t]
            edges.append([at, b, w - t])
        leaf = n
        n += 1
        edges.append([at, leaf, length()])
        labels[leaf] = f"{prefix}{k}"
    return SimplicialTree(n, edges, labels)


def perturb_tree(rng: np.random.Generator, T: SimplicialTree, eta: float,
                 floor: float = 0.05) -> SimplicialTree:
    """Same topology and labels, each edge length moved by at most ``eta``."""
    edges = [(a, b, max(floor, w + float(rng.uniform(-eta, eta)))) for a, b, w in T.edges]
    return SimplicialTree(T.n_nodes, edges, T.labels)


def random_extremal(rng: np.random.Generator, X: FiniteMetricSpace, spread: float | None = None) -> ExtremalFunction:
    """Retraction of ``d_z`` plus a random nonnegative bump."""
    if spread is None:
        spread = float(X.dist.max()) or 1.0
    z = int(rng.integers(len(X)))
    g = X.dist[z] + rng.uniform(0, spread, size=len(X))
    return retract(X, g)
