"""Random well-typed RIR programs for property tests."""

from __future__ import annotations

import random

from interweave.rir import Call, Dec, Id, If, Inc, Inv, It, Neg, Par, Perm, RirFn, Seq

# stdlib calls with their arity and how many nested loops they hide
CALLS = {"sum": (2, 1), "sub": (2, 1), "disSel": (3, 0), "disStep": (4, 1)}
MAX_LOOPS = 2


def random_program(rng: random.Random, arity: int, depth: int = 5, loops: int = MAX_LOOPS) -> RirFn:
    """An emit-free program of the given arity and nesting depth at most ``depth``.

    ``loops`` bounds the number of nested iterations so a run stays cheap.
    """
    if depth <= 1 or rng.random() < 0.25:
        return _leaf(rng, arity)
    choices = ["seq", "inv"]
    if arity >= 2:
        choices += ["par", "if"]
        if loops > 0:
            choices.append("it")
    calls = [n for n, (a, cost) in CALLS.items() if a == arity and cost <= loops]
    if calls:
        choices.append("call")
    kind = rng.choice(choices)
    d = depth - 1
    if kind == "seq":
        return Seq(random_program(rng, arity, d, loops), random_program(rng, arity, d, loops))
    if kind == "inv":
        return Inv(random_program(rng, arity, d, loops))
    if kind == "par":
        left = rng.randint(1, arity - 1)
        return Par(random_program(rng, left, d, loops), random_program(rng, arity - left, d, loops))
    if kind == "if":
        return If(*(random_program(rng, arity - 1, d, loops) for _ in range(3)))
    if kind == "it":
        return It(random_program(rng, arity - 1, d, loops - 1))
    return Call(rng.choice(calls))


def _leaf(rng: random.Random, arity: int) -> RirFn:
    if arity == 1:
        return rng.choice([Id(), Inc(), Dec(), Neg()])
    indices = list(range(1, arity + 1))
    rng.shuffle(indices)
    return Perm(tuple(indices))


def random_tuple(rng: random.Random, arity: int, lo: int = -20, hi: int = 20) -> tuple[int, ...]:
    return tuple(rng.randint(lo, hi) for _ in range(arity))
