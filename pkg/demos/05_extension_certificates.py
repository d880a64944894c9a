"""
Extending correspondences to the hulls
======================================

An optimal correspondence between two finite spaces can be grown one point
at a time into their tight spans (or trees) without increasing its
distortion, which bounds the distance between the hulls.
"""

from tightspan import make_fixture, stability_certificate

# Two tree metrics: the extension keeps the distortion exactly.
cert = stability_certificate(make_fixture("INTRO_A"), make_fixture("INTRO_B"), 0.25)
print(cert.to_json())

# General metrics: the hull distance is at most twice the original one, up
# to the mesh of the nets used.
cert = stability_certificate(make_fixture("EX33_A", N=8), make_fixture("EX33_B", N=8), 0.5)
for line in cert.bound_chain:
    print("  ", line)
print("pass:", cert.passed)
