"""Recursive functions split into a reversible producer and a classical consumer."""

from .rir import interpret, invert, parse_rir, print_rir, stdlib
from .runtime import RunReport, run_interleaved, sweep
from .scheme import Scheme, load_scheme, rec_oracle, unfold_trace
from .weave import consumer, expected_counters, gen_producer, monolithic_itg, reference_producer

__all__ = [
    "RunReport",
    "Scheme",
    "consumer",
    "expected_counters",
    "gen_producer",
    "interpret",
    "invert",
    "load_scheme",
    "monolithic_itg",
    "parse_rir",
    "print_rir",
    "rec_oracle",
    "reference_producer",
    "run_interleaved",
    "stdlib",
    "sweep",
    "unfold_trace",
]
