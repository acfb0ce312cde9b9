"""Sweep a grid of schemes and predecessor steps and print a summary table.

    python scripts/run_sweep.py --max-input 20 --seeds 5 --strict-ancilla
"""

from __future__ import annotations

import argparse
import time

from interweave.runtime import sweep
from interweave.scheme import Scheme

SCHEMES = {
    "sum": ("x", "x + y"),
    "diff": ("x", "x - y"),
    "product": ("1", "x * y"),
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--deltas", type=int, nargs="+", default=[-1, -2, -3, -4, -5])
    ap.add_argument("--max-input", type=int, default=20)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--strict-ancilla", action="store_true")
    args = ap.parse_args()

    print(f"{'scheme':<10}{'delta_p':>8}{'runs':>8}{'failures':>10}{'seconds':>10}")
    total_failures = 0
    for name, (base, step) in SCHEMES.items():
        # products overflow 64 bits quickly
        x_max = min(args.max_input, 12) if name == "product" else args.max_input
        for d in args.deltas:
            s = Scheme.from_strings(name, d, base, step)
            start = time.perf_counter()
            summary = sweep(s, x_max, args.seeds, strict_ancilla=args.strict_ancilla)
            took = time.perf_counter() - start
            total_failures += summary.failures
            print(f"{name:<10}{d:>8}{summary.runs:>8}{summary.failures:>10}{took:>10.2f}")
            if summary.first_counterexample:
                print(f"  first counterexample: {summary.first_counterexample}")
    print(f"total failures: {total_failures}")


if __name__ == "__main__":
    main()
