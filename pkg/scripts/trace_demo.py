"""Show the channel trace of one run next to the direct recursion.

    python scripts/trace_demo.py --delta-p -2 --input 3
"""

from __future__ import annotations

import argparse

from interweave.runtime import run_interleaved
from interweave.scheme import Scheme, rec_oracle, unfold_trace
from interweave.weave import expected_counters


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--delta-p", type=int, default=-2)
    ap.add_argument("--input", type=int, default=3)
    ap.add_argument("--base", default="x")
    ap.add_argument("--step", default="x + y")
    ap.add_argument("--producer", choices=("rir", "reference"), default="rir")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    s = Scheme.from_strings("demo", args.delta_p, args.base, args.step)
    g, e, rest = expected_counters(args.delta_p, args.input)
    print(f"counters after counting: g={g} e={e} s={rest}")
    print("unfolding:", " ".join(f"{tag}({v})" for tag, v in unfold_trace(s, args.input)))
    print(f"direct recursion: {rec_oracle(s, args.input)}")
    report = run_interleaved(s, args.input, args.producer, args.seed)
    print(report.to_text(timing=True), end="")


if __name__ == "__main__":
    main()
