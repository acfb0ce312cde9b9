"""Producer/consumer decomposition of ``recG[p, b, h]``.

The producer walks the recursion path of the input with finite loops only and
publishes, in order: the number ``g`` of step applications, the base
argument, and the ``g`` step arguments in ascending order. It exists in two
forms that must agree exactly: :func:`reference_producer`, a line-by-line
Python rendering of the iterative algorithm, and :func:`gen_producer`, which
compiles the same algorithm to RIR. The consumer folds the published values
through ``b`` and ``h``. :func:`monolithic_itg` is the single-process
iterative evaluator the two halves are carved out of.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

from . import rir
from .channels import InjectChannel, ProbeChannel
from .errors import NegativeInput, check_int64
from .rir import Dec, Emit, Id, If, Inc, It, Perm, RirFn, Seq, invert, par, seq
from .scheme import Scheme, validate_delta, validate_scheme

Registers = dict[str, int]


def _check_input(x: int) -> None:
    if x < 0:
        raise NegativeInput(f"input must be non-negative, got {x}")


# --------------------------------------------------------------------------
# Counter arithmetic


def interval(w: int, delta_p: int) -> tuple[int, int]:
    """Least and greatest values visited by the counting loop started at ``w``."""
    return w + (w + 1) * delta_p, w


def expected_counters(delta_p: int, x: int) -> tuple[int, int, int]:
    """Closed form of ``(g, e, s)`` after counting from ``x``.

    ``g`` counts visited values above zero, ``e`` those equal to zero and
    ``s`` those below, over the ``x + 1`` visited values.
    """
    validate_delta(delta_p)
    _check_input(x)
    g = -(x // delta_p)
    e = 1 if x % delta_p == 0 else 0
    return g, e, (x + 1) - g - e


# --------------------------------------------------------------------------
# Reference producer


def _count(x: int, w: int, delta_p: int, regs: Registers) -> int:
    for _ in range(w + 1):
        if x > 0:
            regs["g"] += 1
        elif x == 0:
            regs["e"] += 1
        else:
            regs["s"] += 1
        x = check_int64(x + delta_p)
    return x


def _uncount(x: int, w: int, delta_p: int, regs: Registers) -> int:
    for _ in range(w + 1):
        x = check_int64(x - delta_p)
        if x > 0:
            regs["g"] -= 1
        elif x == 0:
            regs["e"] -= 1
        else:
            regs["s"] -= 1
    return x


def run_reference(
    delta_p: int,
    x: int,
    put: Callable[[int], None],
    strict: bool = False,
    compensate: bool = True,
) -> Registers:
    """Body of the reference producer between the two inject swaps.

    ``x`` is the injected input and ``put`` publishes a value. Returns the
    final registers, with ``x`` still holding the local copy of the input.
    """
    p = lambda v: check_int64(v + delta_p)  # noqa: E731
    p_inv = lambda v: check_int64(v - delta_p)  # noqa: E731
    regs = {"g": 0, "e": 0, "s": 0, "w": 0, "predDivX": 0, "predNotDivX": 1}
    regs["w"] += x
    x = _count(x, regs["w"], delta_p, regs)
    for _ in range(regs["e"]):
        regs["predDivX"] += regs["predNotDivX"]
        regs["predNotDivX"] = regs["predDivX"] - regs["predNotDivX"]
    for _ in range(regs["predDivX"]):
        put(regs["g"])
        for _ in range(regs["w"] + 1):
            x = p_inv(x)
            if x > 0:
                regs["g"] -= 1
                put(x)
            elif x == 0:
                regs["e"] -= 1
                put(x)
            else:
                regs["s"] -= 1
    for _ in range(regs["predNotDivX"]):
        put(regs["g"])
        regs["w"] += 1
        for _ in range(regs["w"] + 1):
            x = p_inv(x)
            if x > 0:
                regs["g"] -= 1
                x = p(x)
                put(x)
                x = p_inv(x)
            elif x == 0:
                regs["e"] -= 1
            else:
                regs["s"] -= 1
        regs["w"] -= 1
        if compensate:
            # the extra loop pass overshoots x by one step and g by one
            x = p(x)
            regs["g"] += 1
    if strict:
        # recompute e, undo the gate swap, then uncompute e again
        x = _count(x, regs["w"], delta_p, regs)
        for _ in range(regs["e"]):
            old_div = regs["predNotDivX"]
            regs["predNotDivX"] = regs["predDivX"] - old_div
            regs["predDivX"] = old_div
        x = _uncount(x, regs["w"], delta_p, regs)
    regs["w"] -= x
    regs["x"] = x
    return regs


def reference_emissions(delta_p: int, x: int, strict: bool = False, compensate: bool = True) -> list[int]:
    validate_delta(delta_p)
    _check_input(x)
    out: list[int] = []
    run_reference(delta_p, x, out.append, strict, compensate)
    return out


def reference_producer(
    delta_p: int,
    probe: ProbeChannel,
    inject: InjectChannel,
    strict: bool = False,
    compensate: bool = True,
) -> Registers:
    """Producer party: take the input from ``inject``, publish on ``probe``.

    Returns the final registers after the input has been swapped back out;
    ``x`` is then the local ancilla (expected 0).
    """
    validate_delta(delta_p)
    x = inject.swap_in(0)
    _check_input(x)
    regs = run_reference(delta_p, x, probe.put, strict, compensate)
    regs["x"] = inject.swap_out(regs["x"])
    return regs


# --------------------------------------------------------------------------
# RIR producer

LAYOUT = ("x", "w", "g", "e", "s", "divGate", "nonDivGate", "sgn")
RIR_INITIAL = dict.fromkeys(LAYOUT, 0)
REFERENCE_INITIAL = {"x": 0, "w": 0, "g": 0, "e": 0, "s": 0, "predDivX": 0, "predNotDivX": 1}


class Frame:
    """A named view of the register tuple used while emitting RIR."""

    def __init__(self, names: Sequence[str]) -> None:
        self.names = tuple(names)

    def without(self, name: str) -> "Frame":
        return Frame([n for n in self.names if n != name])

    def on(self, names: Sequence[str], f: RirFn) -> RirFn:
        """Apply ``f`` to the registers ``names`` (in that order), leaving the rest."""
        picked = [self.names.index(n) + 1 for n in names]
        rest = [i for i in range(1, len(self.names) + 1) if i not in picked]
        body = par(f, rir.ids(len(rest))) if rest else f
        order = picked + rest
        if order == sorted(order):
            return body
        route = Perm(tuple(order))
        return Seq(Seq(route, body), route.inverse())

    def repeat(self, control: str, make_body: Callable[["Frame"], RirFn]) -> RirFn:
        """``for j < control: body`` for a non-negative ``control``."""
        inner = self.without(control)
        return self.on(inner.names + (control,), It(make_body(inner)))

    def loop_inclusive(self, control: str, make_body: Callable[["Frame"], RirFn]) -> RirFn:
        """``for i in 0..=control: body``: one pass, then ``control`` more."""
        inner = self.without(control)
        body = make_body(inner)
        return Seq(self.on(inner.names, body), self.on(inner.names + (control,), It(body)))


def _p_block(delta_p: int) -> RirFn:
    return seq(*([Dec()] * -delta_p))


def gen_producer_program(delta_p: int, strict: bool = False) -> RirFn:
    validate_delta(delta_p)
    p = _p_block(delta_p)
    p_inv = invert(p)
    top = Frame(LAYOUT)
    counters = Frame(("g", "e", "s", "x"))

    def emit(f: Frame, name: str) -> RirFn:
        return f.on([name], Emit(1))

    def count_step(f: Frame) -> RirFn:
        tally = If(par(Inc(), Id(), Id()), par(Id(), Inc(), Id()), par(Id(), Id(), Inc()))
        return seq(f.on(["g", "e", "s", "x"], tally), f.on(["x"], p))

    sign_in = If(Inc(), Id(), Dec())  # sgn := sign(x) on [sgn, x]
    sign_out = invert(sign_in)

    def replay_step(f: Frame, branch: RirFn) -> RirFn:
        return seq(
            f.on(["x"], p_inv),
            f.on(["sgn", "x"], sign_in),
            f.on(["g", "e", "s", "x", "sgn"], branch),
            f.on(["sgn", "x"], sign_out),
        )

    div_branch = If(
        seq(counters.on(["g"], Dec()), emit(counters, "x")),
        seq(counters.on(["e"], Dec()), emit(counters, "x")),
        counters.on(["s"], Dec()),
    )
    nondiv_branch = If(
        seq(
            counters.on(["g"], Dec()),
            counters.on(["x"], p),
            emit(counters, "x"),
            counters.on(["x"], p_inv),
        ),
        counters.on(["e"], Dec()),
        counters.on(["s"], Dec()),
    )

    def div_body(f: Frame) -> RirFn:
        return seq(emit(f, "g"), f.loop_inclusive("w", lambda i: replay_step(i, div_branch)))

    def nondiv_body(f: Frame) -> RirFn:
        return seq(
            emit(f, "g"),
            f.on(["w"], Inc()),
            f.loop_inclusive("w", lambda i: replay_step(i, nondiv_branch)),
            f.on(["w"], Dec()),
            f.on(["x"], p),
            f.on(["g"], Inc()),
        )

    widen = top.on(["w", "x"], It(Inc()))
    counting = top.loop_inclusive("w", count_step)
    gates = seq(
        top.on(["divGate", "e"], It(Inc())),
        top.on(["nonDivGate"], Inc()),
        top.on(["nonDivGate", "e"], It(Dec())),
    )
    parts = [
        widen,
        counting,
        gates,
        top.repeat("divGate", div_body),
        top.repeat("nonDivGate", nondiv_body),
    ]
    if strict:
        parts += [counting, invert(gates), invert(counting)]
    parts.append(invert(widen))
    return seq(*parts)


@dataclass
class ProducerPlan:
    rir_program: RirFn
    delta_p: int
    register_layout: tuple[str, ...] = LAYOUT
    strict: bool = False
    x_slot: int = field(default=0)

    @cached_property
    def program(self) -> rir.Program:
        return rir.Program(self.rir_program, {})

    def initial_tuple(self, x: int) -> tuple[int, ...]:
        t = [0] * len(self.register_layout)
        t[self.x_slot] = x
        return tuple(t)

    def run(self, x: int, sink: Callable[[int], None] | None = None) -> Registers:
        """Run the program on an injected ``x``; returns the final registers."""
        out = self.program(self.initial_tuple(x), sink)
        return dict(zip(self.register_layout, out))


def gen_producer(delta_p: int, strict: bool = False) -> ProducerPlan:
    return ProducerPlan(gen_producer_program(delta_p, strict), delta_p, strict=strict)


def rir_emissions(plan: ProducerPlan, x: int) -> tuple[list[int], Registers]:
    _check_input(x)
    out: list[int] = []
    regs = plan.run(x, out.append)
    return out, regs


def rir_producer(plan: ProducerPlan, probe: ProbeChannel, inject: InjectChannel) -> Registers:
    """Producer party backed by the generated RIR program."""
    x = inject.swap_in(0)
    _check_input(x)
    regs = plan.run(x, probe.put)
    regs["x"] = inject.swap_out(regs["x"])
    return regs


# --------------------------------------------------------------------------
# Consumer and the monolithic evaluator


def consumer(s: Scheme, probe: ProbeChannel, inject: InjectChannel, x: int) -> int:
    """Consumer party: inject ``x``, then fold the probed values through b and h."""
    validate_scheme(s)
    _check_input(x)
    inject.put(x)
    iterations = probe.get()
    out = s.b(probe.get())
    for _ in range(iterations):
        out = s.h(probe.get(), out)
    return out


def monolithic_itg(
    s: Scheme, x: int, restore_z: bool = False, compensate: bool = True
) -> tuple[int, Registers]:
    """Iterative evaluation of ``recG(x)`` in a single process.

    The non-divisible branch decides between b and h with the extra flag
    ``z``; ``restore_z`` appends the loop that sets it back to 0.
    """
    validate_scheme(s)
    _check_input(x)
    p, p_inv = s.p, s.p_inv
    r = {"g": 0, "e": 0, "s": 0, "w": 0, "z": 0, "predDivX": 0, "predNotDivX": 1}
    y = 0
    r["w"] += x
    x = _count(x, r["w"], s.delta_p, r)
    for _ in range(r["e"]):
        r["predDivX"] += r["predNotDivX"]
        r["predNotDivX"] = r["predDivX"] - r["predNotDivX"]
    for _ in range(r["predDivX"]):
        for _ in range(r["w"] + 1):
            x = p_inv(x)
            if x > 0:
                r["g"] -= 1
                y = s.h(x, y)
            elif x == 0:
                r["e"] -= 1
                y = s.b(x)
            else:
                r["s"] -= 1
    for _ in range(r["predNotDivX"]):
        r["w"] += 1
        for _ in range(r["w"] + 1):
            x = p_inv(x)
            if x > 0:
                r["g"] -= 1
                x = p(x)
                if r["z"] < 0:
                    pass
                elif r["z"] == 0:
                    y = s.b(x)
                    r["z"] += 1
                else:
                    y = s.h(x, y)
                x = p_inv(x)
            elif x == 0:
                r["e"] -= 1
            else:
                r["s"] -= 1
        r["w"] -= 1
        if compensate:
            x = p(x)
            r["g"] += 1
    if restore_z:
        for _ in range(r["predNotDivX"]):
            r["z"] -= 1
    r["w"] -= x
    r["x"] = x
    return y, r
