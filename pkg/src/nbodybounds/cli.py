"""Command-line entry point.

Exit codes: 0 success / all values match, 1 verification failure or
mismatch, 2 usage error, 3 resource refusal.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import doubling, graph, report, theta
from .sigma import build_sigma

log = logging.getLogger("nbodybounds")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_REFUSED = 0, 1, 2, 3


def _party_count(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 2:
        raise argparse.ArgumentTypeError("n must be >= 2")
    return n


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerance must be > 0")
    return v


def _skip_list(text: str) -> list[str]:
    items = [s.strip() for s in text.split(",") if s.strip()]
    bad = [s for s in items if s not in report.SKIPPABLE]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown skip item(s) {bad}")
    return items


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
        log.info("wrote %s", path)
    else:
        sys.stdout.write(text)


def _dump_json(doc) -> str:
    return json.dumps(report.round_floats(doc), indent=2) + "\n"


def _format_for(args, default: str = "json") -> str:
    if args.format:
        return args.format
    if args.emit and args.emit.endswith((".csv", ".dot")):
        return args.emit.rsplit(".", 1)[1]
    return default


# -- subcommands ----------------------------------------------------------------

def cmd_scenario(args) -> int:
    expr = build_sigma(args.n)
    fmt = _format_for(args)
    if fmt == "dot":
        _emit(graph.build_graph(expr.support).to_dot(f"Sigma{args.n}"), args.emit)
    elif fmt == "json":
        _emit(_dump_json(expr.to_json()), args.emit)
    else:
        raise SystemExit(f"scenario does not support --format {fmt}")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.family:
        fam = doubling.SetFamily.from_json(json.loads(Path(args.family).read_text()))
        n = fam.n
    else:
        n = args.n
        if n is None:
            log.error("verify doubling needs --n or --family")
            return EXIT_USAGE
        try:
            fam = doubling.build_family(n, force=args.force)
        except MemoryError as exc:
            log.error("refusing: %s; rerun with --force", exc)
            return EXIT_REFUSED
    if args.dump_family:
        Path(args.dump_family).write_text(json.dumps(fam.to_json()) + "\n")
    verdict = doubling.verify_family(fam, build_sigma(n), jobs=args.jobs)
    _emit(_dump_json(verdict.to_json()), args.emit)
    for name, ok in verdict.checks.items():
        log.info("%-20s %s", name, "pass" if ok else "FAIL")
    for failure in verdict.failures:
        log.error("failed check %s", failure)
    if not verdict.ok:
        return EXIT_FAIL
    target = report.closed_forms(n)["quantum_sigma"]
    if abs(verdict.derived_bound - target) > 1e-9:
        log.error("derived bound %.12g differs from %.12g", verdict.derived_bound, target)
        return EXIT_FAIL
    return EXIT_OK


def _load_graph(args) -> graph.ExclusivityGraph:
    if args.input:
        return graph.ExclusivityGraph.from_json(json.loads(Path(args.input).read_text()))
    if args.n is None:
        raise SystemExit("need --input or --n")
    return graph.build_graph(build_sigma(args.n).support)


def cmd_graph_build(args) -> int:
    g = _load_graph(args)
    if args.complement:
        g = graph.complement(g)
    fmt = _format_for(args)
    if fmt == "dot":
        _emit(g.to_dot(), args.emit)
        return EXIT_OK
    alpha = graph.independence_number(g)
    doc = g.to_json(alpha=alpha.value if alpha.exact else [alpha.lower, alpha.upper],
                    vertex_transitive=graph.is_vertex_transitive(g))
    _emit(_dump_json(doc), args.emit)
    return EXIT_OK


def cmd_graph_theta(args) -> int:
    g = _load_graph(args)
    if args.complement:
        g = graph.complement(g)
    try:
        res = theta.lovasz_theta(g, args.tol, method=args.method)
    except theta.ThetaNotConverged as exc:
        log.error("%s", exc)
        _emit(_dump_json(exc.result.to_json()), args.emit)
        return EXIT_FAIL
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_REFUSED if "limit" in str(exc) else EXIT_USAGE
    _emit(_dump_json(res.to_json()), args.emit)
    return EXIT_OK


def cmd_bounds(args) -> int:
    rep = report.compute_bounds(args.n, args.skip or (), seed=args.seed)
    fmt = _format_for(args)
    if fmt == "csv":
        _emit(rep.to_csv(), args.emit)
    else:
        _emit(_dump_json(rep.to_json()), args.emit)
    for r in rep.rows:
        log.info("%-14s computed=%s closed=%s match=%s", r.quantity, report.fmt(r.computed),
                 report.fmt(r.closed_form), r.match)
    return EXIT_OK if rep.all_match else EXIT_FAIL


def cmd_report(args) -> int:
    doc = report.full_report(args.n, args.skip or (), force=args.force, jobs=args.jobs,
                             seed=args.seed)
    _emit(_dump_json(doc), args.emit)
    if "refused" in doc.get("verification", {}):
        return EXIT_REFUSED
    return EXIT_OK if doc["all_match"] else EXIT_FAIL


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--emit", metavar="PATH", help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "csv", "dot"))
    common.add_argument("--jobs", type=int, default=1, help="worker threads")
    common.add_argument("--tol", type=_positive, default=1e-8)
    common.add_argument("-v", "--verbose", action="count", default=0)

    p = argparse.ArgumentParser(prog="nbodybounds", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("scenario", parents=[common], help="emit the Sigma_n expression")
    s.add_argument("--n", type=_party_count, required=True)
    s.set_defaults(func=cmd_scenario)

    v = sub.add_parser("verify", help="structural verification")
    vsub = v.add_subparsers(dest="target", required=True)
    vd = vsub.add_parser("doubling", parents=[common], help="check the 4^n exclusive sets")
    vd.add_argument("--n", type=_party_count)
    vd.add_argument("--family", metavar="FILE", help="verify a family stored as JSON")
    vd.add_argument("--dump-family", metavar="FILE", help="store the checked family as JSON")
    vd.add_argument("--force", action="store_true", help="allow n >= 6")
    vd.set_defaults(func=cmd_verify)

    g = sub.add_parser("graph", help="exclusivity graph tools")
    gsub = g.add_subparsers(dest="target", required=True)
    for name, func, helptext in (("build", cmd_graph_build, "graph with alpha and transitivity"),
                                 ("theta", cmd_graph_theta, "Lovász number")):
        gp = gsub.add_parser(name, parents=[common], help=helptext)
        gp.add_argument("--input", metavar="graph.json")
        gp.add_argument("--n", type=_party_count, help="use the Sigma_n support graph")
        gp.add_argument("--complement", action="store_true")
        gp.set_defaults(func=func)
        if name == "theta":
            gp.add_argument("--method", choices=("auto", "ipm", "admm"), default="auto")
            gp.set_defaults(tol=1e-6)

    for name, func in (("bounds", cmd_bounds), ("report", cmd_report)):
        b = sub.add_parser(name, parents=[common], help=f"{name} for one n")
        b.add_argument("--n", type=_party_count, required=True)
        b.add_argument("--skip", type=_skip_list, metavar="LIST")
        b.add_argument("--seed", type=int, default=0)
        b.add_argument("--force", action="store_true")
        b.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
