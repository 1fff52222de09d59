"""Command line: ``slidingcubes <subcommand> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import logging
import sys

from ..compactify import CompactifyStall, compactify
from ..lattice import ConfigurationError, OpCounter, read_configuration, write_configuration
from ..moves import Trace, verify_trace, write_trace
from ..reconfigure import BRIDGE, FORWARD, ReconfigPlan, reconfigure, write_plan
from .accounting import MoveAccounting
from .generate import FAMILIES, InstanceSpec, generate, parse_dims
from .oracle import FOUND, OracleInputError, oracle_bfs
from .suite import load_suite, run_suite

OK, FAILED, USAGE = 0, 1, 2


def _cmd_compactify(args) -> int:
    config = read_configuration(args.inp)
    counter = OpCounter()
    result = compactify(config, counter=counter)
    write_trace(args.trace, result.trace)
    if args.stats:
        with open(args.stats, "w") as fh:
            fh.write(result.stats_text())
    acc = MoveAccounting.for_trace(config, result.trace, counter)
    print(f"{len(result.trace)} moves (budget {acc.budget}, ratio {acc.ratio:.3f})")
    return OK


def _cmd_reconfigure(args) -> int:
    c1 = read_configuration(args.src)
    c2 = read_configuration(args.dst)
    plan = reconfigure(c1, c2)
    write_plan(args.plan, plan)
    print(f"{plan.total} moves: forward {len(plan.forward)}, bridge {len(plan.bridge)}, "
          f"backward {len(plan.backward)} (budget {plan.budget()})")
    return OK


def _read_any_trace(path) -> Trace:
    with open(path) as fh:
        text = fh.read()
    if FORWARD in text or BRIDGE in text:
        return ReconfigPlan.from_text(text).trace()
    return Trace.from_text(text)


def _cmd_verify(args) -> int:
    config = read_configuration(args.inp)
    trace = _read_any_trace(args.trace)
    final = read_configuration(args.final) if args.final else None
    rep = verify_trace(config, trace, expected_final=final)
    print(rep.summary())
    return OK if rep.ok else FAILED


def _cmd_generate(args) -> int:
    dims = parse_dims(args.dims) if args.dims else None
    config = generate(InstanceSpec(args.family, args.n, dims, args.seed))
    write_configuration(args.out, config, comment=f"{args.family} n={len(config)} seed={args.seed}")
    print(f"{len(config)} cells written to {args.out}")
    return OK


def _cmd_oracle(args) -> int:
    c1 = read_configuration(args.src)
    c2 = read_configuration(args.dst)
    res = oracle_bfs(c1, c2, args.max_moves)
    if res.status != FOUND:
        print(f"{res.status} within {args.max_moves} moves ({res.states} states)")
        return FAILED
    print(f"distance {res.distance} ({res.states} states)")
    if args.trace:
        write_trace(args.trace, res.trace)
    return OK


def _cmd_suite(args) -> int:
    report = run_suite(load_suite(args.spec), workers=args.workers)
    with open(args.report, "w") as fh:
        fh.write(report.to_json())
    print(report.summary())
    return OK if report.ok else FAILED


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="slidingcubes", description="Sliding cube reconfiguration tools.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("compactify", help="compact a configuration and write the trace")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--stats")
    p.set_defaults(func=_cmd_compactify)

    p = sub.add_parser("reconfigure", help="plan a reconfiguration between two configurations")
    p.add_argument("--from", dest="src", required=True)
    p.add_argument("--to", dest="dst", required=True)
    p.add_argument("--plan", required=True)
    p.set_defaults(func=_cmd_reconfigure)

    p = sub.add_parser("verify", help="replay and check a trace or plan")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--final")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("generate", help="write a generated instance")
    p.add_argument("--family", required=True, choices=[f for f in FAMILIES if f != "file"])
    p.add_argument("--n", type=int)
    p.add_argument("--dims")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("oracle", help="shortest move sequence by exhaustive search (n <= 5)")
    p.add_argument("--from", dest="src", required=True)
    p.add_argument("--to", dest="dst", required=True)
    p.add_argument("--max-moves", type=int, default=12)
    p.add_argument("--trace")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("suite", help="run a JSON suite file and write a report")
    p.add_argument("--spec", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_suite)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError, ConfigurationError, OracleInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except CompactifyStall as exc:
        print(f"compactify stalled: {exc}", file=sys.stderr)
        return FAILED


if __name__ == "__main__":
    sys.exit(main())
