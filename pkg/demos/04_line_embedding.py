"""
How badly does a zigzag fit on a line?
======================================

The zigzag set Z_n has 2n + 1 points at pairwise l1 distance at least 8 and
diameter 8n.  Sorting the images of any map into the line bounds the
distortion from below; brute force over orderings with one linear program
per ordering gives the exact value.
"""

from fractions import Fraction

from tightspan import line_distortion_lower_bound, min_distortion_map_to_line, z_n_set

for n in (1, 2, 3):
    Z = z_n_set(n)
    bound = line_distortion_lower_bound(Z)
    line = f"n={n}: chain bound {bound:.6f} (= {Fraction(8 * n, 2 * n + 1)})"
    if n <= 2:
        images, eps = min_distortion_map_to_line(Z)
        line += f", exact least distortion {eps:.6f}, images {images.round(4).tolist()}"
    print(line)
