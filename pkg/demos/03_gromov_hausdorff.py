"""
Exact Gromov-Hausdorff distances
================================

For finite spaces the distance is half the least distortion of a
correspondence.  A binary search over candidate distortion levels, with an
exact feasibility search at each level, finds it.
"""

from tightspan import gh_lower_bound_diam, make_fixture, min_distortion_correspondence

A, B = make_fixture("INTRO_A"), make_fixture("INTRO_B")
r = min_distortion_correspondence(A, B)
print("leaves: dis =", r.dis, " d_GH =", r.gh, " pairs:", r.correspondence.pairs)
print("diameter lower bound:", gh_lower_bound_diam(A, B))

# Adding the internal vertices of the two trees makes the spaces further apart.
VX, VY = make_fixture("INTRO_VX"), make_fixture("INTRO_VY")
r = min_distortion_correspondence(VX, VY)
print("vertices: dis =", r.dis, " d_GH =", r.gh, " search nodes:", r.nodes)

# Rectangle corners versus a tree with a long central edge: close, although
# their tight spans (a rectangle and a tree) are not.
N = 40
r = min_distortion_correspondence(make_fixture("EX33_A", N=N), make_fixture("EX33_B", N=N))
print("N = 40: d_GH =", r.gh)
