"""Command-line front end.

Exit codes: 0 success, 1 input validation failure, 2 theorem or reproduction
check violated, 3 parse or internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import extension, gh, io_formats
from .metric_core import DEFAULT_TOL, MetricValidationError, is_four_point, make_fixture, validate_metric
from .random_instances import perturb_tree, random_metric, random_tree
from .tight_span import TightSpan, sample_net, tight_span_complex
from .tree_ops import FourPointError, TreeSpace, tree_from_metric

log = logging.getLogger("tightspan")

EXIT_OK, EXIT_INVALID, EXIT_VIOLATION, EXIT_ERROR = 0, 1, 2, 3


@dataclass
class RunConfig:
    seed: int = 0
    tol: float = DEFAULT_TOL
    mesh: float = 0.25
    instance_count: int = 50
    kind: str = "tree"
    min_size: int = 3
    max_size: int = 5
    noise: float = 0.5
    output_format: str = "csv"

    def __post_init__(self):
        if not self.mesh > 0:
            raise ValueError("mesh must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.instance_count < 1:
            raise ValueError("instance_count must be >= 1")
        if not 2 <= self.min_size <= self.max_size:
            raise ValueError("need 2 <= min_size <= max_size")
        if self.kind not in ("tree", "general"):
            raise ValueError("kind must be 'tree' or 'general'")


# -- input ----------------------------------------------------------------------

def _guess_format(path: str) -> str:
    ext = Path(path).suffix.lower().lstrip(".")
    return {"csv": "csv", "phy": "phylip", "phylip": "phylip", "dist": "phylip",
            "json": "json", "nwk": "newick", "newick": "newick", "tre": "newick"}.get(ext, "csv")


def load_space(spec: str, fmt: str | None = None, tol: float = DEFAULT_TOL):
    """A metric from ``fixture:NAME[:PARAM]`` or a file (newick files give leaf metrics)."""
    if spec.startswith("fixture:"):
        parts = spec.split(":")
        name = parts[1]
        param = float(parts[2]) if len(parts) > 2 else None
        if name.upper() == "Z_N":
            return make_fixture(name, n=int(param) if param is not None else None)
        return make_fixture(name, N=param)
    fmt = fmt or _guess_format(spec)
    text = sys.stdin.read() if spec == "-" else Path(spec).read_text()
    if fmt == "newick":
        return io_formats.parse_newick(text).leaf_metric()
    return io_formats.parse_distance_matrix(text, fmt, tol)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


# -- subcommands -------------------------------------------------------------------

def cmd_validate(args) -> int:
    fmt = args.format or _guess_format(args.input)
    text = Path(args.input).read_text() if not args.input.startswith("fixture:") else None
    if text is None:
        m = load_space(args.input)
        rep = validate_metric(m.dist, args.tol)
    else:
        try:
            m = io_formats.parse_distance_matrix(text, fmt, args.tol)
            rep = validate_metric(m.dist, args.tol)
        except MetricValidationError as exc:
            rep = exc.report
    if args.json:
        _emit(json.dumps({"ok": rep.ok, "violations": {k: list(v) if isinstance(v, tuple) else v
                                                         for k, v in rep.violations.items()}},
                         sort_keys=True), args.out)
    else:
        _emit(rep.summary(), args.out)
    return EXIT_OK if rep.ok else EXIT_INVALID


def cmd_span(args) -> int:
    m = load_space(args.input, args.format, args.tol)
    C = tight_span_complex(m, args.tol)
    if args.export == "dot":
        _emit(io_formats.export_dot(C), args.out)
    elif args.export == "complex-json":
        _emit(io_formats.complex_to_json(C), args.out)
    else:
        summary = {"points": len(m), "vertices": len(C.vertices), "edges": len(C.edges),
                   "cells2": len(C.cells2), "dimension": C.dimension,
                   "edge_lengths": [round(w, 12) for w in C.edge_lengths()]}
        if args.mesh:
            summary["net_points"] = len(sample_net(C, args.mesh, args.tol).points)
        _emit(json.dumps(summary, sort_keys=True), args.out)
    return EXIT_OK


def cmd_tree(args) -> int:
    if (args.format or _guess_format(args.input)) == "newick":
        T = io_formats.parse_newick(Path(args.input).read_text())
    else:
        T = tree_from_metric(load_space(args.input, args.format, args.tol), args.tol)
    if args.export == "dot":
        _emit(io_formats.export_dot(T), args.out)
    else:
        _emit(io_formats.write_newick(T), args.out)
    return EXIT_OK


def cmd_gh(args) -> int:
    A = load_space(args.a, args.format, args.tol)
    B = load_space(args.b, args.format, args.tol)
    res = gh.min_distortion_correspondence(A, B, budget=args.budget, tol=args.tol)
    report = {"dis": res.dis, "gh": res.gh, "optimal": res.optimal,
              "lower_bound_diam": gh.gh_lower_bound_diam(A, B),
              "correspondence": [[A.labels[a], B.labels[b]] for a, b in res.correspondence.pairs]}
    _emit(json.dumps(report, sort_keys=True), args.out)
    return EXIT_OK


def cmd_extend(args) -> int:
    A = load_space(args.a, args.format, args.tol)
    B = load_space(args.b, args.format, args.tol)
    res = gh.min_distortion_correspondence(A, B, tol=args.tol)
    pairs = res.correspondence.pairs
    if is_four_point(A, args.tol) and is_four_point(B, args.tol):
        TA, TB = tree_from_metric(A, args.tol), tree_from_metric(B, args.tol)
        R = extension.tree_space_relation(TA, TB, A, B, pairs, args.tol)
        out = extension.extend_tree_relation(R, args.mesh, args.tol)
        mode = "tree"
    else:
        EA, EB = TightSpan(A, args.tol), TightSpan(B, args.tol)
        R = gh.Relation(EA, EB, [(EA.embed(a), EB.embed(b)) for a, b in pairs])
        st = extension.ExtensionState(R, args.tol)
        out = extension.extend_to_net(st, args.mesh)
        mode = "injective"
    dis = out.recompute()
    report = {"mode": mode, "dis0": res.dis, "dis_extended": dis, "pairs": len(out),
              "preserved": abs(dis - res.dis) <= 10 * args.tol * max(1.0, res.dis)}
    _emit(json.dumps(report, sort_keys=True), args.out)
    return EXIT_OK if report["preserved"] else EXIT_VIOLATION


def cmd_certify(args) -> int:
    A = load_space(args.a, args.format, args.tol)
    B = load_space(args.b, args.format, args.tol)
    cert = extension.stability_certificate(A, B, args.mesh, args.tol)
    if args.json:
        _emit(cert.to_json(), args.out)
    else:
        lines = [f"theorem check: {'pass' if cert.passed else 'FAIL'}",
                 f"dis0 = {cert.dis0:.12g}, dis_final = {cert.dis_final:.12g}, mesh = {cert.mesh:g}"]
        lines += ["  " + s for s in cert.bound_chain]
        _emit("\n".join(lines), args.out)
    if cert.error:
        return EXIT_ERROR
    return EXIT_OK if cert.passed else EXIT_VIOLATION


# -- reference values ------------------------------------------------------------------

def _close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def run_reproduce_paper(tol: float = DEFAULT_TOL) -> list[dict]:
    """Rows of {quantity, paper, computed, pass} for the published reference values."""
    rows = []

    def row(q, paper, computed, ok):
        rows.append({"quantity": q, "paper": str(paper), "computed": str(computed), "pass": bool(ok)})

    def num(x):
        return f"{x:.10g}"

    A, B = make_fixture("INTRO_A"), make_fixture("INTRO_B")
    r = gh.min_distortion_correspondence(A, B)
    row("d_GH(A,B)", 1, num(r.gh), r.optimal and _close(r.gh, 1))
    VX, VY = make_fixture("INTRO_VX"), make_fixture("INTRO_VY")
    r = gh.min_distortion_correspondence(VX, VY)
    row("d_GH(V_X,V_Y)", 2, num(r.gh), r.optimal and _close(r.gh, 2))

    h = 0.25
    TA, TB = tree_from_metric(A), tree_from_metric(B)
    R = extension.tree_space_relation(TA, TB, A, B, [(i, i) for i in range(4)])
    ext = extension.extend_tree_relation(R, h)
    dis = ext.recompute()
    lo, hi = gh.gh_lower_bound_diam(A, B), dis / 2 + 2 * h
    row("d_GH(X,Y)", 1, f"[{num(lo)}, {num(hi)}]",
        lo - tol <= 1 <= hi + tol and _close(dis, 2) and _close(hi, 1.5))

    N = 40
    EA = tight_span_complex(make_fixture("EX33_A", N=N))
    V = EA.vertex_matrix()
    vd = sorted(np.abs(V[:, None] - V[None]).max(-1)[np.triu_indices(len(V), 1)])
    row("E A cells (N=40)", "4 vertices, 4 edges, 1 two-cell",
        f"{len(EA.vertices)} vertices, {len(EA.edges)} edges, {len(EA.cells2)} two-cell",
        (len(EA.vertices), len(EA.edges), len(EA.cells2)) == (4, 4, 1))
    want = [4, 4, N, N, N + 4, N + 4]
    row("E A vertex distances (N=40)", want, [num(x) for x in vd],
        len(vd) == 6 and all(_close(a, b) for a, b in zip(vd, want)))
    EB = tight_span_complex(make_fixture("EX33_B", N=N))
    lens = EB.edge_lengths()
    want = [1, 1, 1, 1, N]
    row("E B edges (N=40)", want, [num(x) for x in lens],
        len(EB.vertices) == 6 and len(lens) == 5 and all(_close(a, b) for a, b in zip(lens, want)))
    r = gh.min_distortion_correspondence(make_fixture("EX33_A", N=N), make_fixture("EX33_B", N=N))
    row("d_GH(A,B) (N=40)", 1, num(r.gh), _close(r.gh, 1))

    for n in (1, 2, 3):
        b = gh.line_distortion_lower_bound(gh.z_n_set(n))
        exact = Fraction(8 * n, 2 * n + 1)
        row(f"chain bound Z_{n}", f"{exact}", num(b), _close(b, float(exact)))
    for n in (1, 2):
        _, eps = gh.min_distortion_map_to_line(gh.z_n_set(n))
        exact = Fraction(8 * n, 2 * n + 1)
        ok = _close(eps, float(exact)) if n == 1 else eps >= float(exact) - tol
        row(f"min line distortion Z_{n}", f"{exact}" if n == 1 else f">= {exact}", num(eps), ok)
    return rows


def format_table(rows) -> str:
    cols = ("quantity", "paper", "computed", "pass")
    cells = [[r["quantity"], r["paper"], r["computed"], "pass" if r["pass"] else "FAIL"] for r in rows]
    width = [max(len(c), *(len(x[i]) for x in cells)) for i, c in enumerate(cols)]
    out = [" | ".join(c.ljust(w) for c, w in zip(cols, width))]
    out.append("-+-".join("-" * w for w in width))
    out += [" | ".join(x.ljust(w) for x, w in zip(c, width)) for c in cells]
    return "\n".join(out)


def cmd_paper(args) -> int:
    rows = run_reproduce_paper(args.tol)
    if args.json:
        _emit(json.dumps(rows, sort_keys=True), args.out)
    else:
        _emit(format_table(rows), args.out)
    return EXIT_OK if all(r["pass"] for r in rows) else EXIT_VIOLATION


# -- randomized experiments ----------------------------------------------------------------

def _instance(cfg: RunConfig, i: int):
    rng = np.random.default_rng(cfg.seed + i)
    n = int(rng.integers(cfg.min_size, cfg.max_size + 1))
    if cfg.kind == "tree":
        T = random_tree(rng, n)
        T2 = perturb_tree(rng, T, cfg.noise)
        return T.leaf_metric(), T2.leaf_metric()
    A = random_metric(rng, n, prefix="a")
    m = int(rng.integers(cfg.min_size, cfg.max_size + 1))
    B = random_metric(rng, m, prefix="b")
    return A, B


def run_experiment(cfg: RunConfig) -> tuple[list[dict], dict]:
    rows = []
    for i in range(cfg.instance_count):
        A, B = _instance(cfg, i)
        cert = extension.stability_certificate(A, B, cfg.mesh, cfg.tol)
        slack = 10 * cfg.tol * max(1.0, cert.dis0)
        if cfg.kind == "tree" and cert.theorem == "3.2":
            ok = cert.passed and cert.dis_final <= cert.dis0 + slack
        else:
            ok = cert.passed and cert.dis_final <= 2 * cert.dis0 + 2 * cfg.mesh + slack
        rows.append({"instance": i, "kind": cfg.kind, "n_a": len(A), "n_b": len(B),
                     "theorem": cert.theorem, "dis0": cert.dis0, "dis_final": cert.dis_final,
                     "mesh": cfg.mesh, "pass": bool(ok)})
    ratios = [r["dis_final"] / r["dis0"] for r in rows if r["dis0"] > 0]
    summary = {"instances": len(rows), "violations": sum(not r["pass"] for r in rows),
               "max_ratio": max(ratios) if ratios else 0.0}
    return rows, summary


def format_experiment(rows, summary, fmt: str) -> str:
    if fmt == "json":
        return json.dumps({"rows": rows, "summary": summary}, sort_keys=True)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    buf.write(f"# instances={summary['instances']} violations={summary['violations']} "
              f"max_ratio={summary['max_ratio']!r}\n")
    return buf.getvalue()


def cmd_experiment(args) -> int:
    cfg = RunConfig(seed=args.seed, tol=args.tol, mesh=args.mesh, instance_count=args.count,
                    kind=args.kind, min_size=args.min_size, max_size=args.max_size,
                    noise=args.noise, output_format="json" if args.json else "csv")
    rows, summary = run_experiment(cfg)
    _emit(format_experiment(rows, summary, cfg.output_format), args.out)
    return EXIT_OK if summary["violations"] == 0 else EXIT_VIOLATION


# -- entry point ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["csv", "phylip", "json", "newick"],
                        help="input format (default: from file extension)")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--out", help="write output to this file")
    common.add_argument("--json", action="store_true", help="machine-readable output")

    p = argparse.ArgumentParser(prog="tightspan", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common], help="check the metric axioms")
    s.add_argument("input")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("span", parents=[common], help="tight span complex")
    s.add_argument("input")
    s.add_argument("--export", choices=["dot", "complex-json"])
    s.add_argument("--mesh", type=float, help="also report the size of a net at this mesh")
    s.set_defaults(func=cmd_span)

    s = sub.add_parser("tree", parents=[common], help="tree reconstruction from a four-point metric")
    s.add_argument("input")
    s.add_argument("--export", choices=["newick", "dot"], default="newick")
    s.set_defaults(func=cmd_tree)

    s = sub.add_parser("gh", parents=[common], help="exact Gromov-Hausdorff distance")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--budget", type=int, default=gh.DEFAULT_BUDGET)
    s.set_defaults(func=cmd_gh)

    s = sub.add_parser("extend", parents=[common], help="extend an optimal correspondence over nets")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--mesh", type=float, default=0.25)
    s.set_defaults(func=cmd_extend)

    s = sub.add_parser("certify", parents=[common], help="stability certificate for the hulls")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--mesh", type=float, default=0.25)
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("paper", parents=[common], help="recompute the published reference values")
    s.set_defaults(func=cmd_paper)

    s = sub.add_parser("experiment", parents=[common], help="randomized stability experiments")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--count", type=int, default=50)
    s.add_argument("--kind", choices=["tree", "general"], default="tree")
    s.add_argument("--mesh", type=float, default=0.25)
    s.add_argument("--min-size", type=int, default=3)
    s.add_argument("--max-size", type=int, default=5)
    s.add_argument("--noise", type=float, default=0.5)
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (MetricValidationError, FourPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except io_formats.ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
