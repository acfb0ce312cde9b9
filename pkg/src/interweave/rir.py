"""A small intrinsically reversible intermediate representation (RIR).

Programs are point-free combinator terms over fixed-width tuples of signed
64-bit integers::

    fn ::= id | inc | dec | neg | perm(i1 ... in) | seq(fn fn) | par(fn fn)
         | if(fn fn fn) | it(fn) | inv(fn) | call(NAME) | emit(k [n])

``if`` and ``it`` use their last port as the control and never change it.
``emit(k)`` is the only effect: it leaves the tuple alone and hands the value
of port ``k`` to a sink. Every emit-free program has an inverse, computed by
:func:`invert`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, NamedTuple, Optional, Sequence, Union

from .errors import (
    ArityMismatch,
    NonInvertibleEffect,
    RirSyntaxError,
    UnknownName,
    check_int64,
)

Sink = Callable[[int], None]


@dataclass(frozen=True)
class Id:
    pass


@dataclass(frozen=True)
class Inc:
    pass


@dataclass(frozen=True)
class Dec:
    pass


@dataclass(frozen=True)
class Neg:
    pass


@dataclass(frozen=True)
class Perm:
    """Output port ``k`` receives input port ``indices[k-1]`` (1-based)."""

    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "indices", tuple(self.indices))
        if sorted(self.indices) != list(range(1, len(self.indices) + 1)):
            raise ArityMismatch(f"{self.indices} is not a permutation of 1..n", self)

    def inverse(self) -> "Perm":
        inv = [0] * len(self.indices)
        for k, i in enumerate(self.indices, 1):
            inv[i - 1] = k
        return Perm(tuple(inv))


@dataclass(frozen=True)
class Seq:
    first: "RirFn"
    second: "RirFn"


@dataclass(frozen=True)
class Par:
    left: "RirFn"
    right: "RirFn"


@dataclass(frozen=True)
class If:
    pos: "RirFn"
    zero: "RirFn"
    neg: "RirFn"


@dataclass(frozen=True)
class It:
    body: "RirFn"


@dataclass(frozen=True)
class Inv:
    body: "RirFn"


@dataclass(frozen=True)
class Call:
    name: str


@dataclass(frozen=True)
class Emit:
    """Send the value of port ``slot`` to the sink; ``width`` is the arity."""

    slot: int
    width: Optional[int] = field(default=None)

    def __post_init__(self) -> None:
        if self.width is None:
            object.__setattr__(self, "width", self.slot)
        if not 1 <= self.slot <= self.width:
            raise ArityMismatch(f"emit slot {self.slot} outside 1..{self.width}", self)


RirFn = Union[Id, Inc, Dec, Neg, Perm, Seq, Par, If, It, Inv, Call, Emit]


class Definition(NamedTuple):
    arity: int
    body: RirFn


Defs = dict[str, Definition]


# --------------------------------------------------------------------------
# Builders


def seq(*fns: RirFn) -> RirFn:
    """Sequential composition of one or more functions, as a balanced tree."""
    if not fns:
        raise ValueError("seq() needs at least one function")
    if len(fns) == 1:
        return fns[0]
    mid = len(fns) // 2
    return Seq(seq(*fns[:mid]), seq(*fns[mid:]))


def par(*fns: RirFn) -> RirFn:
    if not fns:
        raise ValueError("par() needs at least one function")
    if len(fns) == 1:
        return fns[0]
    return Par(fns[0], par(*fns[1:]))


def ids(n: int) -> RirFn:
    """Identity of arity ``n``."""
    return par(*([Id()] * n))


# --------------------------------------------------------------------------
# Arity


@lru_cache(maxsize=1)
def _stdlib_cached() -> Defs:
    return _build_stdlib()


def _resolve(defs: Defs | None) -> Defs:
    return _stdlib_cached() if defs is None else defs


def _lookup(name: str, defs: Defs) -> Definition:
    try:
        return defs[name]
    except KeyError:
        raise UnknownName(f"no definition named {name!r}") from None


def arity(f: RirFn, defs: Defs | None = None) -> int:
    """Arity of ``f``; raises :class:`ArityMismatch` on ill-formed terms."""
    defs = _resolve(defs)
    return _arity(f, defs)


def _arity(f: RirFn, defs: Defs) -> int:
    if isinstance(f, (Id, Inc, Dec, Neg)):
        return 1
    if isinstance(f, Perm):
        return len(f.indices)
    if isinstance(f, Emit):
        return f.width
    if isinstance(f, Call):
        return _lookup(f.name, defs).arity
    if isinstance(f, Seq):
        a, b = _arity(f.first, defs), _arity(f.second, defs)
        if a != b:
            raise ArityMismatch(f"seq of arities {a} and {b}", f)
        return a
    if isinstance(f, Par):
        return _arity(f.left, defs) + _arity(f.right, defs)
    if isinstance(f, If):
        a = {_arity(f.pos, defs), _arity(f.zero, defs), _arity(f.neg, defs)}
        if len(a) != 1:
            raise ArityMismatch(f"if branches have arities {sorted(a)}", f)
        return a.pop() + 1
    if isinstance(f, (It, Inv)):
        return _arity(f.body, defs) + (1 if isinstance(f, It) else 0)
    raise TypeError(f"not an RIR term: {f!r}")


def _calls(f: RirFn) -> set[str]:
    if isinstance(f, Call):
        return {f.name}
    if isinstance(f, (Seq, Par, If, It, Inv)):
        out: set[str] = set()
        for child in _children(f):
            out |= _calls(child)
        return out
    return set()


def _children(f: RirFn) -> tuple[RirFn, ...]:
    if isinstance(f, Seq):
        return (f.first, f.second)
    if isinstance(f, Par):
        return (f.left, f.right)
    if isinstance(f, If):
        return (f.pos, f.zero, f.neg)
    if isinstance(f, (It, Inv)):
        return (f.body,)
    return ()


def check_defs(defs: Defs) -> None:
    """Every call resolves, bodies match declarations, and nothing recurses."""
    for name, (declared, body) in defs.items():
        actual = _arity(body, defs)
        if actual != declared:
            raise ArityMismatch(f"{name} declared with arity {declared}, body has {actual}", body)
    state: dict[str, int] = {}

    def visit(name: str, path: tuple[str, ...]) -> None:
        if state.get(name) == 2:
            return
        if state.get(name) == 1:
            raise ArityMismatch(f"recursive definition: {' -> '.join(path + (name,))}")
        state[name] = 1
        for callee in _calls(_lookup(name, defs).body):
            visit(callee, path + (name,))
        state[name] = 2

    for name in defs:
        visit(name, ())


# --------------------------------------------------------------------------
# Inversion


def has_emit(f: RirFn, defs: Defs | None = None) -> bool:
    defs = _resolve(defs)
    seen: set[str] = set()

    def walk(g: RirFn) -> bool:
        if isinstance(g, Emit):
            return True
        if isinstance(g, Call):
            if g.name in seen:
                return False
            seen.add(g.name)
            return walk(_lookup(g.name, defs).body)
        return any(walk(c) for c in _children(g))

    return walk(f)


def invert(f: RirFn, defs: Defs | None = None) -> RirFn:
    """The inverse program of ``f``, with every ``inv`` and call inverted away.

    Calls are inlined through ``defs`` (the standard library by default),
    since the inverse of a named function is the inverse of its body.
    """
    defs = _resolve(defs)
    memo: dict[str, RirFn] = {}

    def inv(g: RirFn) -> RirFn:
        if isinstance(g, (Id, Neg)):
            return g
        if isinstance(g, Inc):
            return Dec()
        if isinstance(g, Dec):
            return Inc()
        if isinstance(g, Perm):
            return g.inverse()
        if isinstance(g, Seq):
            return Seq(inv(g.second), inv(g.first))
        if isinstance(g, Par):
            return Par(inv(g.left), inv(g.right))
        if isinstance(g, If):
            return If(inv(g.pos), inv(g.zero), inv(g.neg))
        if isinstance(g, It):
            return It(inv(g.body))
        if isinstance(g, Inv):
            return normalize(g.body)
        if isinstance(g, Call):
            if g.name not in memo:
                memo[g.name] = inv(_lookup(g.name, defs).body)
            return memo[g.name]
        if isinstance(g, Emit):
            raise NonInvertibleEffect(f"cannot invert a program containing {print_rir(g)}")
        raise TypeError(f"not an RIR term: {g!r}")

    def normalize(g: RirFn) -> RirFn:
        # inv(inv(h)) = h, but h itself may still contain inv nodes
        if isinstance(g, Inv):
            return inv(g.body)
        if isinstance(g, Seq):
            return Seq(normalize(g.first), normalize(g.second))
        if isinstance(g, Par):
            return Par(normalize(g.left), normalize(g.right))
        if isinstance(g, If):
            return If(normalize(g.pos), normalize(g.zero), normalize(g.neg))
        if isinstance(g, It):
            return It(normalize(g.body))
        return g

    return inv(f)


def strip_emits(f: RirFn) -> RirFn:
    """Replace every ``emit`` by an identity of the same width."""
    if isinstance(f, Emit):
        return ids(f.width)
    if isinstance(f, Seq):
        return Seq(strip_emits(f.first), strip_emits(f.second))
    if isinstance(f, Par):
        return Par(strip_emits(f.left), strip_emits(f.right))
    if isinstance(f, If):
        return If(strip_emits(f.pos), strip_emits(f.zero), strip_emits(f.neg))
    if isinstance(f, It):
        return It(strip_emits(f.body))
    if isinstance(f, Inv):
        return Inv(strip_emits(f.body))
    return f


# --------------------------------------------------------------------------
# Interpretation
#
# Terms are compiled once into closures ``run(regs, off, sink)`` that update
# ``regs[off:off + arity]`` in place, one closure per big-step rule.

_Runner = Callable[[list, int, Optional[Sink]], None]


def _inc(regs: list, off: int, sink: Optional[Sink]) -> None:
    regs[off] = check_int64(regs[off] + 1)


def _dec(regs: list, off: int, sink: Optional[Sink]) -> None:
    regs[off] = check_int64(regs[off] - 1)


def _neg(regs: list, off: int, sink: Optional[Sink]) -> None:
    regs[off] = check_int64(-regs[off])


def _noop(regs: list, off: int, sink: Optional[Sink]) -> None:
    pass


class _Compiler:
    def __init__(self, defs: Defs) -> None:
        self.defs = defs
        self.calls: dict[str, tuple[int, _Runner]] = {}
        self.active: set[str] = set()

    def compile(self, f: RirFn) -> tuple[int, _Runner]:
        if isinstance(f, Id):
            return 1, _noop
        if isinstance(f, Inc):
            return 1, _inc
        if isinstance(f, Dec):
            return 1, _dec
        if isinstance(f, Neg):
            return 1, _neg
        if isinstance(f, Perm):
            source = [i - 1 for i in f.indices]

            def run_perm(regs: list, off: int, sink: Optional[Sink]) -> None:
                vals = regs[off : off + len(source)]
                regs[off : off + len(source)] = [vals[i] for i in source]

            return len(source), run_perm
        if isinstance(f, Emit):
            slot = f.slot - 1

            def run_emit(regs: list, off: int, sink: Optional[Sink]) -> None:
                if sink is not None:
                    sink(regs[off + slot])

            return f.width, run_emit
        if isinstance(f, Seq):
            a, first = self.compile(f.first)
            b, second = self.compile(f.second)
            if a != b:
                raise ArityMismatch(f"seq of arities {a} and {b}", f)

            def run_seq(regs: list, off: int, sink: Optional[Sink]) -> None:
                first(regs, off, sink)
                second(regs, off, sink)

            return a, run_seq
        if isinstance(f, Par):
            a, left = self.compile(f.left)
            b, right = self.compile(f.right)

            def run_par(regs: list, off: int, sink: Optional[Sink]) -> None:
                left(regs, off, sink)
                right(regs, off + a, sink)

            return a + b, run_par
        if isinstance(f, If):
            branches = [self.compile(g) for g in (f.pos, f.zero, f.neg)]
            widths = {w for w, _ in branches}
            if len(widths) != 1:
                raise ArityMismatch(f"if branches have arities {sorted(widths)}", f)
            n = widths.pop()
            pos, zero, neg = (r for _, r in branches)

            def run_if(regs: list, off: int, sink: Optional[Sink]) -> None:
                v = regs[off + n]
                if v > 0:
                    pos(regs, off, sink)
                elif v == 0:
                    zero(regs, off, sink)
                else:
                    neg(regs, off, sink)

            return n + 1, run_if
        if isinstance(f, It):
            n, body = self.compile(f.body)

            def run_it(regs: list, off: int, sink: Optional[Sink]) -> None:
                for _ in range(abs(regs[off + n])):
                    body(regs, off, sink)

            return n + 1, run_it
        if isinstance(f, Inv):
            if has_emit(f.body, self.defs):
                raise NonInvertibleEffect("inv over a body that emits")
            return self.compile(invert(f.body, self.defs))
        if isinstance(f, Call):
            return self._compile_call(f.name)
        raise TypeError(f"not an RIR term: {f!r}")

    def _compile_call(self, name: str) -> tuple[int, _Runner]:
        if name in self.calls:
            return self.calls[name]
        if name in self.active:
            raise ArityMismatch(f"recursive definition through {name!r}")
        declared, body = _lookup(name, self.defs)
        self.active.add(name)
        actual, run = self.compile(body)
        self.active.discard(name)
        if actual != declared:
            raise ArityMismatch(f"{name} declared with arity {declared}, body has {actual}", body)
        self.calls[name] = (actual, run)
        return actual, run


class Program:
    """A compiled RIR term, reusable across many runs."""

    def __init__(self, f: RirFn, defs: Defs | None = None) -> None:
        self.term = f
        self.arity, self._run = _Compiler(_resolve(defs)).compile(f)

    def __call__(self, t: Sequence[int], sink: Optional[Sink] = None) -> tuple[int, ...]:
        if len(t) != self.arity:
            raise ArityMismatch(f"tuple of length {len(t)} given to a function of arity {self.arity}")
        regs = [check_int64(int(v)) for v in t]
        self._run(regs, 0, sink)
        return tuple(regs)


def interpret(
    f: RirFn, t: Sequence[int], defs: Defs | None = None, sink: Optional[Sink] = None
) -> tuple[int, ...]:
    """Run ``f`` on ``t`` under the big-step semantics; emits go to ``sink``."""
    return Program(f, defs)(t, sink)


def check_reversibility(f: RirFn, t: Sequence[int], defs: Defs | None = None) -> bool:
    """Whether running ``f`` and then its inverse gives back ``t``."""
    forward = interpret(f, t, defs)
    return interpret(invert(f, defs), forward, defs) == tuple(t)


# --------------------------------------------------------------------------
# Text form

_TOKEN = re.compile(r"\s*(?:([()])|([A-Za-z_][A-Za-z0-9_]*)|(-?\d+))")
_ATOMS = {"id": Id, "inc": Inc, "dec": Dec, "neg": Neg}
_ARITY = {"seq": 2, "par": 2, "if": 3, "it": 1, "inv": 1}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise RirSyntaxError(f"unexpected character {text[pos]!r} at offset {pos}")
        kind = "paren" if m.group(1) else "word" if m.group(2) else "int"
        tokens.append((kind, m.group(m.lastindex), m.start(m.lastindex)))
        pos = m.end()
    return tokens


def parse_rir(text: str) -> RirFn:
    tokens = _tokenize(text)
    pos = 0

    def peek() -> tuple[str, str, int]:
        if pos >= len(tokens):
            raise RirSyntaxError("unexpected end of input")
        return tokens[pos]

    def expect(value: str) -> None:
        nonlocal pos
        kind, tok, at = peek()
        if tok != value:
            raise RirSyntaxError(f"expected {value!r} at offset {at}, found {tok!r}")
        pos += 1

    def ints() -> list[int]:
        nonlocal pos
        out = []
        while peek()[0] == "int":
            out.append(int(peek()[1]))
            pos += 1
        return out

    def term() -> RirFn:
        nonlocal pos
        kind, tok, at = peek()
        if kind != "word":
            raise RirSyntaxError(f"expected a function at offset {at}, found {tok!r}")
        pos += 1
        if tok in _ATOMS:
            return _ATOMS[tok]()
        expect("(")
        if tok == "perm":
            indices = ints()
            if not indices or sorted(indices) != list(range(1, len(indices) + 1)):
                raise RirSyntaxError(f"perm({' '.join(map(str, indices))}) is not a permutation")
            result: RirFn = Perm(tuple(indices))
        elif tok == "emit":
            nums = ints()
            if len(nums) not in (1, 2) or not 1 <= nums[0] <= nums[-1]:
                raise RirSyntaxError(f"bad emit arguments at offset {at}")
            result = Emit(nums[0], nums[-1])
        elif tok == "call":
            kind, name, nat = peek()
            if kind != "word":
                raise RirSyntaxError(f"expected a name at offset {nat}")
            pos += 1
            result = Call(name)
        elif tok in _ARITY:
            args = [term() for _ in range(_ARITY[tok])]
            result = {"seq": Seq, "par": Par, "if": If, "it": It, "inv": Inv}[tok](*args)
        else:
            raise RirSyntaxError(f"unknown combinator {tok!r} at offset {at}")
        expect(")")
        return result

    f = term()
    if pos != len(tokens):
        raise RirSyntaxError(f"trailing input at offset {tokens[pos][2]}")
    return f


def print_rir(f: RirFn) -> str:
    parts: list[str] = []

    def emit(g: RirFn) -> None:
        if isinstance(g, (Id, Inc, Dec, Neg)):
            parts.append(type(g).__name__.lower())
        elif isinstance(g, Perm):
            parts.append(f"perm({' '.join(map(str, g.indices))})")
        elif isinstance(g, Emit):
            parts.append(f"emit({g.slot})" if g.width == g.slot else f"emit({g.slot} {g.width})")
        elif isinstance(g, Call):
            parts.append(f"call({g.name})")
        else:
            parts.append(type(g).__name__.lower() + "(")
            for i, child in enumerate(_children(g)):
                if i:
                    parts.append(" ")
                emit(child)
            parts.append(")")

    emit(f)
    return "".join(parts)


# --------------------------------------------------------------------------
# Standard library: the arithmetic fixtures


def _build_stdlib() -> Defs:
    src = {
        "sum": (2, "it(inc)"),
        "sub": (2, "inv(call(sum))"),
        "mul": (3, "seq(perm(3 1 2) it(call(sum)))"),
        "disSel": (
            3,
            "if(seq(if(id id id) par(id id))"
            " seq(if(id id id) par(id inc))"
            " seq(if(dec dec id) par(id inc)))",
        ),
        "disStep": (
            4,
            "seq(seq(par(call(sub) par(inc id)) perm(2 3 4 1))"
            " seq(par(id call(disSel)) perm(4 1 2 3)))",
        ),
        "quo": (
            5,
            "seq(seq(perm(4 1 2 3 5) par(call(sum) par(id par(id id))))"
            " seq(perm(2 3 4 5 1) it(call(disStep))))",
        ),
    }
    defs = {name: Definition(n, parse_rir(text)) for name, (n, text) in src.items()}
    check_defs(defs)
    return defs


def stdlib() -> Defs:
    """Fresh copy of the standard definitions: sum, sub, mul, disStep, disSel, quo."""
    return dict(_stdlib_cached())
