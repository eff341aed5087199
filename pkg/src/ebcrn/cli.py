"""Command-line front end: ``ebcrn compile|analyze|verify|simulate|bench``.

Exit codes: 0 pass/bounded, 1 fail/unbounded, 2 inconclusive or limit hit.
Usage errors (bad files, bad syntax) exit with 3.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import analysis, simulator, verifier
from .compiler import CompileError, compile_function, compile_predicate, make_all_voting
from .crn import Configuration, Crc, Crd, Crn
from .semilinear import PiecewiseFn, Predicate, PiecewiseError, covering_pieces
from .textio import CrnSyntaxError, format_crn, parse_crn, parse_spec, _multiset

EXIT_OK, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _read(path_or_text: str) -> str:
    p = Path(path_or_text)
    try:
        if p.is_file():
            return p.read_text(encoding="utf-8")
    except OSError:
        pass
    if "(" in path_or_text:
        return path_or_text  # inline s-expression
    raise UsageError(f"no such file: {path_or_text}")


def _load_crn(path: str):
    try:
        return parse_crn(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise UsageError(str(e)) from None


def parse_config(text: str) -> Configuration:
    """``"3 X1, 5 X2"`` (commas optional between terms: ``"3 X1 + 5 X2"`` also works)."""
    text = text.strip()
    if text in ("", "0"):
        return Configuration()
    return _multiset(text.replace(",", "+"), 0, 0)


def parse_weights(text: str) -> dict[str, int]:
    """``"A=1,B=1,C=0"``."""
    out = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "=" not in part:
            raise UsageError(f"expected NAME=INT, got {part!r}")
        k, v = part.split("=", 1)
        try:
            out[k.strip()] = int(v)
        except ValueError:
            raise UsageError(f"bad integer in {part!r}") from None
    return out


def parse_inputs(text: str, dim: int) -> list[tuple[int, ...]]:
    """Input grid.

    ``"0..8"`` gives every point of {0..8}^dim, ``"0..8,2..3"`` one range per
    variable, and ``"3,5;2,2"`` lists points explicitly.
    """
    text = text.strip()
    if ".." in text:
        ranges = []
        for part in text.split(","):
            lo, _, hi = part.partition("..")
            try:
                ranges.append(range(int(lo), int(hi) + 1))
            except ValueError:
                raise UsageError(f"bad range {part!r}") from None
        if len(ranges) == 1:
            ranges *= dim
        if len(ranges) != dim:
            raise UsageError(f"expected {dim} ranges, got {len(ranges)}")
        return [tuple(p) for p in itertools.product(*ranges)]
    pts = []
    for chunk in filter(None, (c.strip() for c in text.split(";"))):
        try:
            pt = tuple(int(v) for v in chunk.split(","))
        except ValueError:
            raise UsageError(f"bad point {chunk!r}") from None
        if len(pt) != dim:
            raise UsageError(f"point {chunk!r} has {len(pt)} coordinates, expected {dim}")
        pts.append(pt)
    return pts


# --- subcommands --------------------------------------------------------------

def cmd_compile(args) -> int:
    src = args.pred or args.fn
    spec = parse_spec(_read(src))
    if args.pred:
        if not isinstance(spec, Predicate):
            raise UsageError("--pred expects a predicate spec")
        compiled = compile_predicate(spec)
        if args.all_voting:
            compiled = make_all_voting(compiled)
        obj = compiled.crd
        title = f"{compiled.voter_kind}-voting decider"
    else:
        if not isinstance(spec, PiecewiseFn):
            raise UsageError("--fn expects a function spec")
        if args.all_voting:
            raise UsageError("--all-voting applies to predicates only")
        compiled = compile_function(spec, grid_bound=args.grid_bound)
        obj = compiled.crc
        title = "function computer"
    text = format_crn(obj, title)
    if args.output and args.output != "-":
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"{args.output}: {len(obj.crn.species)} species, {len(obj.crn.reactions)} reactions",
              file=sys.stderr)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_analyze(args) -> int:
    obj = _load_crn(args.file)
    crn = obj if isinstance(obj, Crn) else obj.crn
    if args.check:
        w = parse_weights(args.check)
        unknown = set(w) - set(crn.species)
        if unknown:
            raise UsageError(f"unknown species {sorted(unknown)}")
        weights = [w.get(s, 0) for s in crn.species]
        bad = analysis.potential_violations(crn, weights)
        ok = all(v >= 0 for v in weights) and not bad
        if args.format == "json":
            print(json.dumps({"valid": ok, "violations": bad}))
        else:
            print("valid potential" if ok else "not a potential; reactions " + ", ".join(map(str, bad)))
        return EXIT_OK if ok else EXIT_FAIL
    if args.start is not None:
        lim = verifier.Limits(args.max_configs, args.max_depth)
        rep = verifier.explore(crn, parse_config(args.start), lim, reduce=args.reduce)
        if args.format == "json":
            print(json.dumps(rep.to_dict(), indent=2))
        else:
            _print_report(crn, rep)
        return {True: EXIT_OK, False: EXIT_FAIL, None: EXIT_INCONCLUSIVE}[rep.bounded]
    cert = analysis.find_potential(crn)
    if args.format == "json":
        body = ({"bounded": True, "weights": dict(zip(crn.species, cert.potential.weights))}
                if cert.bounded else
                {"bounded": False, "multiplicities": list(cert.witness.multiplicities)})
        print(json.dumps(body))
    else:
        sys.stdout.write(analysis.format_certificate(crn, cert))
    return EXIT_OK if cert.bounded else EXIT_FAIL


def _print_report(crn: Crn, rep: verifier.ExploreReport) -> None:
    print(f"reached: {rep.num_reached}")
    if rep.truncated:
        print(f"truncated: {rep.limit}")
    w = rep.self_covering
    if w is not None:
        print(f"self-covering: path[{w.i}] <= path[{w.j}]")
        for k, c in enumerate(w.path):
            via = "" if k == 0 else f"  via {crn.reactions[w.reactions[k - 1]]}"
            print(f"  {k}: {c!r}{via}")
    else:
        print(f"terminals: {len(rep.terminals)}")
        for t in rep.terminals:
            print(f"  {t!r}")


def cmd_verify(args) -> int:
    obj = _load_crn(args.file)
    spec = parse_spec(_read(args.spec))
    if isinstance(obj, Crd) != isinstance(spec, Predicate) or isinstance(obj, Crn):
        raise UsageError("a decider needs a predicate spec and a computer a function spec")
    points = parse_inputs(args.inputs, len(spec.variables))
    if args.nonzero:
        points = [p for p in points if any(p)]
    skipped = 0
    if isinstance(spec, PiecewiseFn):
        keep = [p for p in points if covering_pieces(spec, dict(zip(spec.variables, p)))]
        skipped = len(points) - len(keep)
        points = keep
    lim = verifier.Limits(args.max_configs, args.max_depth)
    verdict = verifier.verify_grid(obj, spec, points, lim, reduce=args.reduce)
    if args.format == "json":
        print(verdict.to_json())
    else:
        sys.stdout.write(verdict.to_table())
        if skipped:
            print(f"skipped {skipped} inputs outside every piece's domain")
    return {"pass": EXIT_OK, "fail": EXIT_FAIL, "inconclusive": EXIT_INCONCLUSIVE}[verdict.status]


def _seed(args) -> int:
    if args.seed is None:
        args.seed = int(np.random.SeedSequence().entropy % 2**63)
        print(f"seed={args.seed}", file=sys.stderr)
    return args.seed


def cmd_simulate(args) -> int:
    obj = _load_crn(args.file)
    init = parse_config(args.input)
    n = init.size()
    if not isinstance(obj, Crn):
        extra = set(init) - set(obj.inputs)
        if extra:
            raise UsageError(f"not input species: {sorted(extra)}")
        init = obj.context + init
    seed = _seed(args)
    trace_rows = []
    crn = obj if isinstance(obj, Crn) else obj.crn
    hook = None
    if args.trace:
        hook = lambda s, t, j, c: trace_rows.append((s, repr(t), j, *crn.vector(c)))  # noqa: E731
    try:
        rec = simulator.run_to_terminal(obj, init, args.volume, seed, args.max_steps, n=n,
                                           trace=hook)
    except simulator.StepLimit as e:
        print(str(e), file=sys.stderr)
        return EXIT_INCONCLUSIVE
    if args.trace:
        with open(args.trace, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("step", "time", "reaction", *crn.species))
            w.writerow((0, repr(0.0), "", *crn.vector(init)))
            w.writerows(trace_rows)
    sys.stdout.write(simulator.records_csv([rec]))
    print(f"terminal: {rec.terminal!r}", file=sys.stderr)
    return EXIT_OK


def cmd_bench(args) -> int:
    obj = _load_crn(args.file)
    if isinstance(obj, Crn):
        raise UsageError("bench needs a decider or computer (inputs and context)")
    sizes = [int(s) for s in args.sizes.split(",")]
    shape = (simulator.proportional_shape(obj, parse_weights(args.shape)) if args.shape
             else simulator.default_shape(obj))
    seed = _seed(args)
    try:
        records = simulator.bench_stabilization(obj, sizes, args.trials, shape, seed, args.max_steps)
    except simulator.StepLimit as e:
        print(str(e), file=sys.stderr)
        return EXIT_INCONCLUSIVE
    table = simulator.records_csv(records)
    if args.csv:
        Path(args.csv).write_text(table, encoding="utf-8")
    else:
        sys.stdout.write(table + "\n")
    sys.stdout.write(simulator.summary_markdown(simulator.summarize(records)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ebcrn", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="compile a predicate or function spec to a .crn file")
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("--pred", metavar="SPEC", help="predicate spec file (or inline s-expression)")
    g.add_argument("--fn", metavar="SPEC", help="piecewise function spec file (or inline)")
    c.add_argument("-o", "--output", metavar="OUT", help="output file (default stdout)")
    c.add_argument("--all-voting", action="store_true")
    c.add_argument("--grid-bound", type=int, default=8,
                   help="grid used to check that function pieces are disjoint and covering")
    c.set_defaults(func=cmd_compile)

    def limits(q):
        q.add_argument("--max-configs", type=int, default=verifier.DEFAULT_MAX_CONFIGS)
        q.add_argument("--max-depth", type=int, default=verifier.DEFAULT_MAX_DEPTH)
        q.add_argument("--no-reduce", dest="reduce", action="store_false",
                       help="explore every interleaving instead of a stubborn-set reduction")

    a = sub.add_parser("analyze", help="boundedness certificate, potential check, or exploration")
    a.add_argument("file")
    a.add_argument("--check", metavar="WEIGHTS", help='validate a potential, e.g. "A=1,B=1,C=0"')
    a.add_argument("--from", dest="start", metavar="CONFIG",
                   help='explore from a configuration, e.g. "1 X1, 1 X2"')
    a.add_argument("--format", choices=("text", "json"), default="text")
    limits(a)
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="exhaustively check stable computation on an input grid")
    v.add_argument("file")
    v.add_argument("--spec", required=True)
    v.add_argument("--inputs", required=True, metavar="RANGE", help='"0..8", "0..8,0..3" or "3,5;2,2"')
    v.add_argument("--nonzero", action="store_true", help="skip the all-zero input")
    v.add_argument("--format", choices=("table", "json"), default="table")
    limits(v)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("simulate", help="one stochastic run to a terminal configuration")
    s.add_argument("file")
    s.add_argument("--input", required=True, metavar="CONFIG", help='e.g. "3 X1, 5 X2"')
    s.add_argument("--seed", type=int)
    s.add_argument("--volume", type=float)
    s.add_argument("--max-steps", type=int, default=simulator.DEFAULT_MAX_STEPS)
    s.add_argument("--trace", metavar="FILE", help="write every step as CSV")
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bench", help="stabilization time over input sizes")
    b.add_argument("file")
    b.add_argument("--sizes", required=True, help="comma-separated, ascending")
    b.add_argument("--trials", type=int, required=True)
    b.add_argument("--seed", type=int)
    b.add_argument("--shape", metavar="WEIGHTS", help='split n across inputs, e.g. "X1=1,X2=1"')
    b.add_argument("--csv", metavar="FILE", help="write per-trial CSV here instead of stdout")
    b.add_argument("--max-steps", type=int, default=simulator.DEFAULT_MAX_STEPS)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, CrnSyntaxError, CompileError, PiecewiseError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
