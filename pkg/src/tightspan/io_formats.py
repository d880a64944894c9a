"""Text formats for distance matrices, trees and tight-span complexes.

Distance matrices: ``csv`` (header row of labels, then ``label,v1,v2,...``),
``phylip`` (point count, then ``label v1 v2 ...``) and ``json``
(``{"labels": [...], "matrix": [[...]]}``).  Trees: a Newick subset
(nested parentheses, ``name:length``, terminating ``;``).  Complexes:
``complex-json``.  ``dot`` is export-only.
"""

from __future__ import annotations

import csv
import io
import json

import numpy as np

from .metric_core import DEFAULT_TOL, FiniteMetricSpace, MetricValidationError, validate_metric
from .tight_span import ExtremalFunction, TightSpanComplex, tight_pairs
from .tree_ops import SimplicialTree

FORMATS = ("csv", "phylip", "json", "newick", "dot", "complex-json")
MATRIX_FORMATS = ("csv", "phylip", "json")


class ParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        where = ""
        if line is not None:
            where = f" at line {line}" + (f", column {col}" if col is not None else "")
        super().__init__(msg + where)


def _num(tok: str, line: int, col: int | None = None) -> float:
    try:
        return float(tok)
    except ValueError:
        raise ParseError(f"not a number: {tok!r}", line, col) from None


def _build(labels, rows, tol) -> FiniteMetricSpace:
    n = len(labels)
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ParseError(f"matrix is not square ({len(rows)} rows for {n} labels)")
    rep = validate_metric(np.array(rows, dtype=float), tol)
    if not rep:
        raise MetricValidationError(rep)
    return FiniteMetricSpace(labels, rows, tol)


def _parse_csv(text: str, tol):
    rows = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
    if not rows:
        raise ParseError("empty input", 1)
    header = [c.strip() for c in rows[0]]
    body = rows[1:]
    if len(header) == len(body) + 1:
        header = header[1:]
    labels, mat = [], []
    for ln, row in enumerate(body, start=2):
        labels.append(row[0].strip())
        mat.append([_num(c.strip(), ln, k + 2) for k, c in enumerate(row[1:])])
    if labels != header:
        raise ParseError(f"row labels {labels} do not match header {header}", 1)
    return _build(labels, mat, tol)


def _parse_phylip(text: str, tol):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty input", 1)
    try:
        n = int(lines[0].split()[0])
    except (ValueError, IndexError):
        raise ParseError("first line must hold the point count", 1, 1) from None
    if len(lines) - 1 != n:
        raise ParseError(f"expected {n} rows, found {len(lines) - 1}", len(lines))
    labels, mat = [], []
    for ln, line in enumerate(lines[1:], start=2):
        toks = line.split()
        labels.append(toks[0])
        mat.append([_num(t, ln, k + 2) for k, t in enumerate(toks[1:])])
    return _build(labels, mat, tol)


def _parse_json(text: str, tol):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(obj, dict) or "labels" not in obj or "matrix" not in obj:
        raise ParseError('expected an object with "labels" and "matrix"')
    return _build([str(x) for x in obj["labels"]], obj["matrix"], tol)


def parse_distance_matrix(text: str, format: str, tol: float = DEFAULT_TOL) -> FiniteMetricSpace:
    """Parse and validate a distance matrix in ``csv``, ``phylip`` or ``json``."""
    parsers = {"csv": _parse_csv, "phylip": _parse_phylip, "json": _parse_json}
    if format not in parsers:
        raise ValueError(f"{format!r} is not a distance-matrix format")
    return parsers[format](text, tol)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def serialize_distance_matrix(m: FiniteMetricSpace, format: str) -> str:
    D = m.dist
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([""] + list(m.labels))
        for lab, row in zip(m.labels, D):
            w.writerow([lab] + [_fmt(x) for x in row])
        return buf.getvalue()
    if format == "phylip":
        out = [str(len(m))]
        for lab, row in zip(m.labels, D):
            out.append(" ".join([lab] + [_fmt(x) for x in row]))
        return "\n".join(out) + "\n"
    if format == "json":
        return json.dumps({"labels": list(m.labels),
                           "matrix": [[float(_fmt(x)) for x in row] for row in D]})
    raise ValueError(f"{format!r} is not a distance-matrix format")


# -- Newick -----------------------------------------------------------------------

class _NewickReader:
    STOP = set("(),:;")

    def __init__(self, text):
        self.s = text
        self.i = 0

    def error(self, msg):
        line = self.s.count("\n", 0, self.i) + 1
        col = self.i - (self.s.rfind("\n", 0, self.i) + 1) + 1
        raise ParseError(msg, line, col)

    def skip(self):
        while self.i < len(self.s) and self.s[self.i].isspace():
            self.i += 1

    def peek(self):
        self.skip()
        return self.s[self.i] if self.i < len(self.s) else ""

    def name(self):
        self.skip()
        j = self.i
        while self.i < len(self.s) and self.s[self.i] not in self.STOP and not self.s[self.i].isspace():
            self.i += 1
        return self.s[j:self.i]

    def node(self):
        """Returns (name, length, children)."""
        children = []
        if self.peek() == "(":
            self.i += 1
            children.append(self.node())
            while self.peek() == ",":
                self.i += 1
                children.append(self.node())
            if self.peek() != ")":
                self.error("unbalanced parenthesis")
            self.i += 1
        nm = self.name()
        length = None
        if self.peek() == ":":
            self.i += 1
            tok = self.name()
            try:
                length = float(tok)
            except ValueError:
                self.error(f"bad branch length {tok!r}")
            if length < 0:
                self.error("negative branch length")
        return nm, length, children


def parse_newick(text: str) -> SimplicialTree:
    """Parse a Newick tree; named nodes become labeled tree nodes.

    Zero-length branches are contracted so the result has positive edge
    lengths; missing lengths raise.
    """
    r = _NewickReader(text)
    if not r.peek():
        r.error("empty tree")
    root = r.node()
    if r.peek() != ";":
        if r.peek() == "":
            r.error("unbalanced parenthesis or missing ';'")
        r.error(f"unexpected {r.peek()!r}")
    r.i += 1
    if r.peek():
        r.error("trailing text after ';'")

    # union nodes joined by zero-length branches
    names, edges, parent = [], [], []

    def walk(node, up):
        nm, length, children = node
        v = len(names)
        names.append(nm or None)
        parent.append(up)
        if up is not None:
            if length is None:
                raise ParseError(f"branch to {nm or 'internal node'!r} has no length")
            edges.append((up, v, length))
        for c in children:
            walk(c, v)

    walk(root, None)
    rep = list(range(len(names)))

    def find(a):
        while rep[a] != a:
            a = rep[a]
        return a

    for a, b, w in edges:
        if w == 0:
            ra, rb = find(a), find(b)
            if names[ra] and names[rb]:
                raise ParseError(f"named nodes {names[ra]!r} and {names[rb]!r} coincide")
            if names[rb] and not names[ra]:
                names[ra] = names[rb]
            rep[rb] = ra
    roots = sorted({find(v) for v in range(len(names))})
    idx = {v: k for k, v in enumerate(roots)}
    tedges = [(idx[find(a)], idx[find(b)], w) for a, b, w in edges if w > 0]
    labels = {idx[v]: names[v] for v in roots if names[v]}
    if len(set(labels.values())) != len(labels):
        raise ParseError("duplicate node names")
    return SimplicialTree(len(roots), tedges, labels)


def write_newick(T: SimplicialTree, root: int | None = None) -> str:
    """Newick text for a tree, rooted at ``root`` (default: first labeled node's neighbor)."""
    if root is None:
        inner = [v for v in range(T.n_nodes) if T.degree(v) > 1]
        root = inner[0] if inner else 0

    def rec(v, up):
        kids = []
        for u, e in sorted(T.adj[v]):
            if u == up:
                continue
            kids.append(f"{rec(u, v)}:{_fmt(T.edges[e][2])}")
        name = T.labels.get(v, "")
        return (f"({','.join(kids)})" if kids else "") + name

    return rec(root, None) + ";"


# -- graph exports ----------------------------------------------------------------

def export_dot(obj) -> str:
    """Undirected dot graph; edges carry ``len`` = metric length."""
    lines = ["graph G {"]
    if isinstance(obj, SimplicialTree):
        for v in range(obj.n_nodes):
            lab = obj.labels.get(v, "")
            lines.append(f'  n{v} [label="{lab}"];')
        for a, b, w in obj.edges:
            lines.append(f'  n{a} -- n{b} [len={_fmt(w)}];')
    elif isinstance(obj, TightSpanComplex):
        X = obj.base
        for i, v in enumerate(obj.vertices):
            tag = ",".join(format(float(x), ".10g") for x in v.values)
            at = [X.labels[k] for k in range(len(X)) if abs(v.values[k]) <= 1e-9]
            lab = at[0] if at else f"({tag})"
            lines.append(f'  v{i} [label="{lab}"];')
        for a, b, w in obj.edges:
            lines.append(f'  v{a} -- v{b} [len={_fmt(w)}];')
        for k, ids in enumerate(obj.cells2):
            lines.append(f"  // cell2 {k}: " + " ".join(f"v{i}" for i in ids))
        for dim, cells in sorted(obj.higher_cells.items()):
            for ids in cells:
                lines.append(f"  // cell{dim}: " + " ".join(f"v{i}" for i in ids))
    else:
        raise TypeError("export_dot needs a SimplicialTree or TightSpanComplex")
    lines.append("}")
    return "\n".join(lines) + "\n"


def complex_to_json(C: TightSpanComplex) -> str:
    obj = {
        "labels": list(C.base.labels),
        "matrix": [[float(_fmt(x)) for x in row] for row in C.base.dist],
        "vertices": [{"id": i, "values": [float(_fmt(x)) for x in v.values]}
                     for i, v in enumerate(C.vertices)],
        "edges": [[a, b] for a, b, _ in C.edges],
        "cells": [list(ids) for ids in C.cells2],
        "higher_cells": {str(k): v for k, v in sorted(C.higher_cells.items())},
    }
    return json.dumps(obj)


def complex_from_json(text: str) -> TightSpanComplex:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    X = FiniteMetricSpace(obj["labels"], obj["matrix"])
    verts = [ExtremalFunction(X, v["values"]) for v in sorted(obj["vertices"], key=lambda v: v["id"])]
    edges = [(a, b, float(np.abs(verts[a].values - verts[b].values).max())) for a, b in obj["edges"]]
    higher = {int(k): v for k, v in obj.get("higher_cells", {}).items()}
    scale = max(1.0, float(X.dist.max()))
    tight = [tight_pairs(X.dist, v.values, DEFAULT_TOL * scale) for v in verts]
    return TightSpanComplex(X, verts, edges, [list(c) for c in obj["cells"]],
                            bool(higher), higher, tight)
