"""Command-line driver.

Exit codes: 0 all checks passed, 1 verification failure, 2 usage or
configuration error, 3 deadlock / timeout.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .channels import DEFAULT_TIMEOUT
from .errors import (
    ExprSyntaxError,
    ForbiddenVariable,
    InvalidDelta,
    NegativeInput,
    Overflow,
    SchemeFileError,
)
from .rir import print_rir
from .runtime import FAULTS, PRODUCER_KINDS, run_interleaved, sweep
from .scheme import load_scheme, rec_oracle, unfold_trace
from .weave import gen_producer

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DEADLOCK = 0, 1, 2, 3

_CONFIG_ERRORS = (
    OSError,
    SchemeFileError,
    ExprSyntaxError,
    ForbiddenVariable,
    InvalidDelta,
    NegativeInput,
)


def cmd_run(args: argparse.Namespace) -> int:
    s = load_scheme(args.scheme_file)
    report = run_interleaved(
        s,
        args.input,
        producer_kind=args.producer,
        seed=args.seed,
        strict_ancilla=args.strict_ancilla,
        timeout=args.timeout,
        fault=args.fault,
    )
    print(f"RESULT {'none' if report.result is None else report.result}")
    if args.trace:
        print(report.trace_text(), end="")
    if args.report:
        print(report.to_text(), end="")
    for err in report.errors:
        print(f"error: {err}", file=sys.stderr)
    if report.timed_out:
        return EXIT_DEADLOCK
    if not report.passed:
        failed = [k for k, v in report.verdicts.items() if not v]
        print(f"verification failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    s = load_scheme(args.scheme_file)
    print(f"RESULT {rec_oracle(s, args.input)}")
    for tag, arg in unfold_trace(s, args.input):
        print(f"UNFOLD {tag} {arg}")
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    s = load_scheme(args.scheme_file)
    summary = sweep(
        s,
        args.max_input,
        args.seeds,
        strict_ancilla=args.strict_ancilla,
        timeout=args.timeout,
        fault=args.fault,
    )
    print(summary.table())
    if summary.timeouts:
        return EXIT_DEADLOCK
    return EXIT_OK if summary.ok else EXIT_FAIL


def cmd_emit_rir(args: argparse.Namespace) -> int:
    plan = gen_producer(args.delta_p, strict=args.strict_ancilla)
    print(print_rir(plan.rir_program))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="interweave",
        description="Run recursive schemes as a reversible producer and a classical consumer.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--strict-ancilla", action="store_true", help="also restore the gate registers")
        p.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT, help="seconds per blocking channel op")
        p.add_argument("--fault", choices=FAULTS, help="break the producer on purpose (verifier testing)")

    run = sub.add_parser("run", help="run one input and verify it")
    run.add_argument("scheme_file")
    run.add_argument("--input", type=int, required=True)
    run.add_argument("--producer", choices=PRODUCER_KINDS, default="rir")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--trace", action="store_true", help="print the channel trace")
    run.add_argument("--report", action="store_true", help="print the full key=value report")
    common(run)
    run.set_defaults(func=cmd_run)

    oracle = sub.add_parser("oracle", help="evaluate by direct recursion")
    oracle.add_argument("scheme_file")
    oracle.add_argument("--input", type=int, required=True)
    oracle.set_defaults(func=cmd_oracle)

    check = sub.add_parser("check", help="sweep inputs, producers and scheduler seeds")
    check.add_argument("scheme_file")
    check.add_argument("--max-input", type=int, required=True)
    check.add_argument("--seeds", type=int, default=10)
    common(check)
    check.set_defaults(func=cmd_check)

    emit = sub.add_parser("emit-rir", help="print the generated producer program")
    emit.add_argument("--delta-p", type=int, required=True)
    emit.add_argument("--strict-ancilla", action="store_true")
    emit.set_defaults(func=cmd_emit_rir)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Overflow as exc:
        print(f"error: overflow: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
