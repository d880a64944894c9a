"""
Rebuilding trees from distance matrices
=======================================

A metric satisfying the four-point condition is realized by a weighted
tree; leaves are inserted one at a time at their attach depth.
"""

import numpy as np

from tightspan import make_fixture, tree_from_metric, tree_net, is_four_point
from tightspan.io_formats import write_newick
from tightspan.random_instances import random_tree

B = make_fixture("INTRO_B")
print("four-point:", is_four_point(B))
T = tree_from_metric(B)
print("edges:", T.edge_lengths())
print("newick:", write_newick(T))

# Round trip through a random tree: the leaf metric determines the tree.
rng = np.random.default_rng(0)
R = random_tree(rng, 6)
L = R.leaf_metric()
back = tree_from_metric(L)
err = np.abs(back.leaf_metric().subspace(L.labels).dist - L.dist).max()
print("random tree round trip error:", err)

# A net of the tree: nodes plus evenly spaced points on long edges.
print("net at h = 0.5:", len(tree_net(T, 0.5)), "points")

# Metrics that are not tree-like are rejected.
try:
    tree_from_metric(make_fixture("EX33_A", N=8))
except ValueError as exc:
    print("rejected:", exc)
