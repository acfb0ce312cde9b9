"""Recursive schemes ``recG[p, b, h]`` and their direct recursive evaluation.

A scheme fixes a constant predecessor step ``delta_p <= -1`` (so that
``p(x) = x + delta_p``), a base expression ``b(x)`` used whenever ``x <= 0``,
and a step expression ``h(x, y)`` combining ``x`` with the recursive result.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from .errors import (
    ExprSyntaxError,
    ForbiddenVariable,
    InvalidDelta,
    MissingY,
    NegativeInput,
    SchemeFileError,
    check_int64,
)

# --------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Var:
    name: str  # "x" or "y"


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of "+", "-", "*"
    left: "Expr"
    right: "Expr"


Expr = Union[Num, Var, Neg, BinOp]

_BINOPS = {ast.Add: "+", ast.Sub: "-", ast.Mult: "*"}


def _convert(node: ast.AST, allow_y: bool) -> Expr:
    col = getattr(node, "col_offset", None)
    if isinstance(node, ast.Constant):
        if type(node.value) is not int:
            raise ExprSyntaxError(f"unsupported literal {node.value!r}", col)
        return Num(node.value)
    if isinstance(node, ast.Name):
        if node.id == "x":
            return Var("x")
        if node.id == "y":
            if not allow_y:
                raise ForbiddenVariable("a base expression may only reference x")
            return Var("y")
        raise ExprSyntaxError(f"unknown variable {node.id!r}", col)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        return Neg(_convert(node.operand, allow_y))
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return BinOp(
            _BINOPS[type(node.op)],
            _convert(node.left, allow_y),
            _convert(node.right, allow_y),
        )
    raise ExprSyntaxError(f"unsupported syntax {type(node).__name__}", col)


def parse_expr(text: str, allow_y: bool) -> Expr:
    """Parse an arithmetic expression over ``x`` (and ``y`` if allowed).

    Only integer literals, ``x``, ``y``, unary minus, ``+``, ``-``, ``*``
    and parentheses are accepted.
    """
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ExprSyntaxError(exc.msg, exc.offset) from None
    return _convert(tree.body, allow_y)


def eval_expr(e: Expr, x: int, y: int | None = None) -> int:
    """Evaluate ``e`` with checked 64-bit arithmetic."""
    if isinstance(e, Num):
        return check_int64(e.value)
    if isinstance(e, Var):
        if e.name == "x":
            return check_int64(x)
        if y is None:
            raise MissingY("expression references y but no y was supplied")
        return check_int64(y)
    if isinstance(e, Neg):
        return check_int64(-eval_expr(e.operand, x, y))
    left = eval_expr(e.left, x, y)
    right = eval_expr(e.right, x, y)
    if e.op == "+":
        return check_int64(left + right)
    if e.op == "-":
        return check_int64(left - right)
    return check_int64(left * right)


def references_y(e: Expr) -> bool:
    if isinstance(e, Var):
        return e.name == "y"
    if isinstance(e, Neg):
        return references_y(e.operand)
    if isinstance(e, BinOp):
        return references_y(e.left) or references_y(e.right)
    return False


_PRECEDENCE = {"+": 1, "-": 1, "*": 2}


def format_expr(e: Expr, _parent: int = 0) -> str:
    """Render ``e`` back to source text that :func:`parse_expr` accepts."""
    if isinstance(e, Num):
        return str(e.value) if e.value >= 0 else f"({e.value})"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"-{format_expr(e.operand, 3)}"
    prec = _PRECEDENCE[e.op]
    # right operand of - binds tighter so "x - (y - 1)" keeps its parens
    text = f"{format_expr(e.left, prec)} {e.op} {format_expr(e.right, prec + 1)}"
    return f"({text})" if prec < _parent else text


# --------------------------------------------------------------------------
# Schemes


@dataclass(frozen=True)
class Scheme:
    name: str
    delta_p: int
    base: Expr
    step: Expr

    @classmethod
    def from_strings(cls, name: str, delta_p: int, base: str, step: str) -> "Scheme":
        return cls(name, delta_p, parse_expr(base, False), parse_expr(step, True))

    def p(self, x: int) -> int:
        return x + self.delta_p

    def p_inv(self, x: int) -> int:
        return x - self.delta_p

    def b(self, x: int) -> int:
        return eval_expr(self.base, x)

    def h(self, x: int, y: int) -> int:
        return eval_expr(self.step, x, y)


def validate_delta(delta_p: int) -> None:
    if delta_p > -1:
        raise InvalidDelta(f"delta_p must be <= -1, got {delta_p}")


def validate_scheme(s: Scheme) -> None:
    validate_delta(s.delta_p)
    if references_y(s.base):
        raise ForbiddenVariable("a base expression may only reference x")


def rec_oracle(s: Scheme, x: int) -> int:
    """Evaluate ``recG(x)`` by direct recursion."""
    validate_scheme(s)
    if x < 0:
        raise NegativeInput(f"input must be non-negative, got {x}")

    def rec(v: int) -> int:
        if v <= 0:
            return s.b(v)
        return s.h(v, rec(s.p(v)))

    return rec(x)


def unfold_trace(s: Scheme, x: int) -> list[tuple[str, int]]:
    """The bottom-up application order of ``recG(x)``.

    The first entry is ``("B", base argument)``, followed by ``("H", v)`` for
    every positive argument on the recursion path, in ascending order.
    """
    validate_scheme(s)
    if x < 0:
        raise NegativeInput(f"input must be non-negative, got {x}")
    path = []
    v = x
    while v > 0:
        path.append(v)
        v = s.p(v)
    return [("B", v)] + [("H", arg) for arg in reversed(path)]


def fold_trace(s: Scheme, trace: list[tuple[str, int]]) -> int:
    """Apply an unfolding left to right; the inverse view of :func:`unfold_trace`."""
    (tag, arg), *rest = trace
    assert tag == "B"
    y = s.b(arg)
    for tag, arg in rest:
        assert tag == "H"
        y = s.h(arg, y)
    return y


# --------------------------------------------------------------------------
# Scheme files: ``key = value`` lines, ``#`` comments

_KEYS = ("name", "delta_p", "base", "step")


def parse_scheme_text(text: str) -> Scheme:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise SchemeFileError(f"line {lineno}: expected 'key = value'")
        if key not in _KEYS:
            raise SchemeFileError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise SchemeFileError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value
    missing = [k for k in _KEYS if k not in values]
    if missing:
        raise SchemeFileError(f"missing keys: {', '.join(missing)}")
    if not values["name"].isidentifier():
        raise SchemeFileError(f"name {values['name']!r} is not an identifier")
    try:
        delta_p = int(values["delta_p"])
    except ValueError:
        raise SchemeFileError(f"delta_p {values['delta_p']!r} is not an integer") from None
    s = Scheme.from_strings(values["name"], delta_p, values["base"], values["step"])
    validate_scheme(s)
    return s


def load_scheme(path: str | Path) -> Scheme:
    return parse_scheme_text(Path(path).read_text(encoding="utf-8"))


def dump_scheme(s: Scheme) -> str:
    return (
        f"name = {s.name}\n"
        f"delta_p = {s.delta_p}\n"
        f"base = {format_expr(s.base)}\n"
        f"step = {format_expr(s.step)}\n"
    )
