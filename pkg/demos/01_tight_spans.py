"""
Tight spans of small metric spaces
==================================

The tight span of a finite metric space is the set of extremal functions on
it, with the sup-norm distance.  For a handful of points it is a polyhedral
complex we can enumerate exactly.
"""

import numpy as np

from tightspan import (canonical_embed, is_extremal, make_fixture, retract,
                       sample_net, tight_span_complex)

# Two points at distance 2: the tight span is the segment between them.
seg = make_fixture("SEG2")
C = tight_span_complex(seg)
print("SEG2 vertices:", C.vertex_matrix().tolist(), "edges:", C.edge_lengths())

# The distance function d_z of any point is extremal, and the embedding
# z -> d_z is isometric.
A = make_fixture("INTRO_A")
for z in A.labels:
    assert is_extremal(A, canonical_embed(A, z))

# Any admissible function retracts onto the tight span without moving up.
g = A.dist[0] + 1.0
h = retract(A, g)
print("retract(d_a1 + 1) =", np.round(h.values, 12), "<= g:", bool((h.values <= g).all()))

# Four points on a rectangle with l1 distances: the tight span is the
# N x 4 rectangle itself, one 2-cell with four boundary edges.
N = 8
R = tight_span_complex(make_fixture("EX33_A", N=N))
print("rectangle: vertices", len(R.vertices), "edges", R.edge_lengths(), "2-cells", R.cells2)

# Four points of a different configuration give a tree with a long central edge.
T = tight_span_complex(make_fixture("EX33_B", N=N))
print("tree-like: edges", T.edge_lengths())

# Finite nets let us treat the continuum as a finite space.
net = sample_net(R, 0.5)
print("net of the rectangle at mesh 0.5:", len(net.points), "points")
