"""
Reading and writing distance data
=================================

Distance matrices travel as csv, phylip or json; trees as Newick; complexes
as json or graphviz dot.
"""

from tightspan import (export_dot, make_fixture, parse_distance_matrix, parse_newick,
                       serialize_distance_matrix, tight_span_complex)
from tightspan.io_formats import ParseError, complex_to_json

B = make_fixture("INTRO_B")
for fmt in ("csv", "phylip", "json"):
    text = serialize_distance_matrix(B, fmt)
    assert parse_distance_matrix(text, fmt) == B
    print(f"--- {fmt}\n{text.strip()}")

T = parse_newick("((a1:2,a2:2)v1:2,a3:2,a4:2)v2;")
print(T.leaf_metric().dist)
print(export_dot(T))

try:
    parse_newick("(p:1,q:1")
except ParseError as exc:
    print("parse error:", exc)

print(complex_to_json(tight_span_complex(make_fixture("SEG2"))))
