"""Expression trees over coordinate variables.

Maps, constraints and level-set equations are all written in one small
language::

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := "-" factor | atom ("^" nat)?
    atom   := number | ident | func "(" expr ")" | "(" expr ")"
    number := nat ("/" nat)? | decimal
    ident  := ("x" | "a" | "y") nat

``p/q`` is read as a single rational literal unless it is the right operand
of a division or the base of a power, so grouping never changes the value.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Union

from .linalg import EXACT, ScalarBackend

__all__ = [
    "Expr", "Const", "Var", "Add", "Sub", "Mul", "Div", "Neg", "IntPow", "Func",
    "ExprError", "ParseError", "EvaluationError",
    "parse", "to_str", "canonicalize", "evaluate", "derive", "variables", "functions",
    "check_backend",
]

FUNCTIONS = ("sin", "cos", "exp", "log")
VAR_CLASSES = ("x", "a", "y")


class ExprError(ValueError):
    pass


class ParseError(ExprError):
    """Raised on bad input text; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class EvaluationError(ArithmeticError):
    pass


# -- nodes -----------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Var:
    cls: str
    index: int

    @property
    def name(self) -> str:
        return f"{self.cls}{self.index}"


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Div:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class IntPow:
    base: "Expr"
    exponent: int

    def __post_init__(self):
        if not isinstance(self.exponent, int) or self.exponent < 0:
            raise ExprError(f"exponent must be a non-negative integer, got {self.exponent!r}")


@dataclass(frozen=True)
class Func:
    name: str
    arg: "Expr"

    def __post_init__(self):
        if self.name not in FUNCTIONS:
            raise ExprError(f"unknown function {self.name!r}")


Expr = Union[Const, Var, Add, Sub, Mul, Div, Neg, IntPow, Func]

ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


# -- tokenizer -------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:\.\d*)?|\.\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str   # num, ident, op, eof
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", _offset(text, pos))
        kind = m.lastgroup
        if kind != "ws":
            s = m.group()
            if kind == "num" and (s.endswith(".") or s.startswith(".")):
                raise ParseError(f"malformed number {s!r}", _offset(text, pos))
            # "1.2.3" tokenizes as "1.2" followed by ".3"
            if kind == "num" and m.end() < len(text) and text[m.end()] in ".0123456789":
                raise ParseError(f"malformed number {text[pos:m.end() + 1]!r}", _offset(text, pos))
            toks.append(_Tok(kind, s, pos))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


def _offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


# -- parser ----------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: _Tok | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(msg, _offset(self.text, tok.pos))

    def take(self) -> _Tok:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> None:
        if self.tok.text != text or self.tok.kind != "op":
            raise self.error(f"expected {text!r}" + (f", found {self.tok.text!r}" if self.tok.text else ""))
        self.take()

    def parse(self) -> Expr:
        if not self.text.strip():
            raise ParseError("empty expression", 0)
        e = self.expr()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected token {self.tok.text!r}")
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.take().text
            right = self.term()
            left = Add(left, right) if op == "+" else Sub(left, right)
        return left

    def term(self) -> Expr:
        left = self.factor(after_div=False)
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.take().text
            right = self.factor(after_div=(op == "/"))
            left = Mul(left, right) if op == "*" else Div(left, right)
        return left

    def factor(self, after_div: bool) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.take()
            return Neg(self.factor(after_div=False))
        base = self.atom(after_div)
        if self.tok.kind == "op" and self.tok.text == "^":
            self.take()
            t = self.tok
            if t.kind != "num" or not t.text.isdigit():
                raise self.error("exponent must be a non-negative integer literal")
            self.take()
            return IntPow(base, int(t.text))
        return base

    def atom(self, after_div: bool) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.take()
            if "." in t.text:
                return Const(Fraction(t.text))
            # p/q rational literal, see module docstring
            if (
                not after_div
                and self.tok.kind == "op" and self.tok.text == "/"
                and self.peek().kind == "num"
                and not (self.peek(2).kind == "op" and self.peek(2).text == "^")
            ):
                if not self.peek().text.isdigit():
                    raise self.error("malformed number: denominator must be an integer", self.peek())
                den = int(self.peek().text)
                if den == 0:
                    raise self.error("malformed number: zero denominator", t)
                self.take()
                self.take()
                return Const(Fraction(int(t.text), den))
            return Const(Fraction(int(t.text)))
        if t.kind == "ident":
            self.take()
            if t.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Func(t.text, arg)
            m = re.fullmatch(r"([xay])(\d+)", t.text)
            if m is None:
                raise self.error(f"unknown identifier {t.text!r}", t)
            idx = int(m.group(2))
            if idx < 1:
                raise self.error(f"unknown identifier {t.text!r} (indices start at 1)", t)
            return Var(m.group(1), idx)
        if t.kind == "op" and t.text == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "eof":
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected token {t.text!r}")


def parse(text: str) -> Expr:
    """Parse expression text into a tree."""
    return _Parser(text).parse()


# -- printing --------------------------------------------------------------


def _const_str(v: Fraction) -> str:
    if v < 0:
        return f"(-{_const_str(-v)})"
    if v.denominator == 1:
        return str(v.numerator)
    return f"({v.numerator}/{v.denominator})"


def to_str(e: Expr) -> str:
    """Fully parenthesized text; ``parse(to_str(e)) == canonicalize(e)``."""
    match e:
        case Const(v):
            return _const_str(v)
        case Var():
            return e.name
        case Add(l, r):
            return f"({to_str(l)} + {to_str(r)})"
        case Sub(l, r):
            return f"({to_str(l)} - {to_str(r)})"
        case Mul(l, r):
            return f"({to_str(l)} * {to_str(r)})"
        case Div(l, r):
            left = to_str(l)
            if isinstance(l, Const) and l.value.denominator == 1 and l.value >= 0:
                left = f"({left})"   # keep "n / m" from reading back as a literal
            return f"({left} / {to_str(r)})"
        case Neg(u):
            return f"(-{to_str(u)})"
        case IntPow(b, k):
            return f"({to_str(b)}^{k})"
        case Func(name, u):
            return f"{name}({to_str(u)})"
    raise TypeError(f"not an expression: {e!r}")


def canonicalize(e: Expr) -> Expr:
    """Rewrite negative constants as negated literals (the only non-parseable form)."""
    match e:
        case Const(v):
            return Neg(Const(-v)) if v < 0 else e
        case Var():
            return e
        case Add(l, r) | Sub(l, r) | Mul(l, r) | Div(l, r):
            return type(e)(canonicalize(l), canonicalize(r))
        case Neg(u):
            return Neg(canonicalize(u))
        case IntPow(b, k):
            return IntPow(canonicalize(b), k)
        case Func(name, u):
            return Func(name, canonicalize(u))
    raise TypeError(f"not an expression: {e!r}")


# -- inspection ------------------------------------------------------------


def _walk(e: Expr) -> Iterator[Expr]:
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        match node:
            case Add(l, r) | Sub(l, r) | Mul(l, r) | Div(l, r):
                stack += [r, l]
            case Neg(u) | Func(_, u):
                stack.append(u)
            case IntPow(b, _):
                stack.append(b)


def variables(e: Expr) -> set[Var]:
    return {n for n in _walk(e) if isinstance(n, Var)}


def functions(e: Expr) -> set[str]:
    return {n.name for n in _walk(e) if isinstance(n, Func)}


def check_backend(e: Expr, backend: ScalarBackend) -> None:
    """Reject elementary functions under the exact backend."""
    if backend.exact:
        used = functions(e)
        if used:
            raise ExprError(
                f"functions {sorted(used)} need the float backend; exact is rational-only"
            )


# -- evaluation ------------------------------------------------------------


def evaluate(e: Expr, point: Mapping[str, object], backend: ScalarBackend = EXACT):
    """Evaluate ``e`` with variables bound by name (``"x1"``, ``"a2"``, ...).

    Values in ``point`` are assumed already coerced to the backend's scalar
    type (see ``ScalarBackend.coerce``).
    """
    exact = backend.exact

    def ev(node):
        match node:
            case Const(v):
                return v if exact else float(v)
            case Var():
                try:
                    return point[node.name]
                except KeyError:
                    raise EvaluationError(f"variable {node.name} is not assigned") from None
            case Add(l, r):
                return ev(l) + ev(r)
            case Sub(l, r):
                return ev(l) - ev(r)
            case Mul(l, r):
                return ev(l) * ev(r)
            case Div(l, r):
                num, den = ev(l), ev(r)
                if den == 0:
                    raise EvaluationError(f"division by zero in {to_str(node)}")
                return num / den
            case Neg(u):
                return -ev(u)
            case IntPow(b, k):
                return ev(b) ** k
            case Func(name, u):
                if exact:
                    raise EvaluationError(f"{name} is not available under the exact backend")
                return _apply_func(name, ev(u))
        raise TypeError(f"not an expression: {node!r}")

    try:
        return ev(e)
    except OverflowError as exc:
        raise EvaluationError(f"overflow evaluating {to_str(e)}") from exc


def _apply_func(name: str, v: float) -> float:
    import math

    if name == "sin":
        return math.sin(v)
    if name == "cos":
        return math.cos(v)
    if name == "exp":
        return math.exp(v)
    if v <= 0:
        raise EvaluationError(f"log of non-positive value {v!r}")
    return math.log(v)


# -- differentiation -------------------------------------------------------
# The smart constructors below only drop additive zeros and multiplicative
# ones/zeros produced by the rules themselves; they do not simplify input.


def _is(e: Expr, v: int) -> bool:
    return isinstance(e, Const) and e.value == v


def _add(l: Expr, r: Expr) -> Expr:
    if _is(l, 0):
        return r
    if _is(r, 0):
        return l
    return Add(l, r)


def _sub(l: Expr, r: Expr) -> Expr:
    if _is(r, 0):
        return l
    if _is(l, 0):
        return _neg(r)
    return Sub(l, r)


def _mul(l: Expr, r: Expr) -> Expr:
    if _is(l, 0) or _is(r, 0):
        return ZERO
    if _is(l, 1):
        return r
    if _is(r, 1):
        return l
    return Mul(l, r)


def _neg(u: Expr) -> Expr:
    if isinstance(u, Const):
        return Const(-u.value)
    return Neg(u)


def derive(e: Expr, var: Var | str) -> Expr:
    """Symbolic partial derivative of ``e`` with respect to ``var``."""
    if isinstance(var, str):
        v = parse(var)
        if not isinstance(v, Var):
            raise ExprError(f"{var!r} is not a variable")
        var = v

    def d(node: Expr) -> Expr:
        match node:
            case Const():
                return ZERO
            case Var():
                return ONE if node == var else ZERO
            case Add(l, r):
                return _add(d(l), d(r))
            case Sub(l, r):
                return _sub(d(l), d(r))
            case Mul(l, r):
                return _add(_mul(d(l), r), _mul(l, d(r)))
            case Div(l, r):
                dl, dr = d(l), d(r)
                if _is(dr, 0):
                    return ZERO if _is(dl, 0) else Div(dl, r)
                return Div(_sub(_mul(dl, r), _mul(l, dr)), IntPow(r, 2))
            case Neg(u):
                du = d(u)
                return ZERO if _is(du, 0) else _neg(du)
            case IntPow(b, k):
                db = d(b)
                if k == 0 or _is(db, 0):
                    return ZERO
                lower = b if k == 2 else IntPow(b, k - 1)
                return _mul(_mul(Const(Fraction(k)), ONE if k == 1 else lower), db)
            case Func(name, u):
                du = d(u)
                if _is(du, 0):
                    return ZERO
                if name == "sin":
                    return _mul(Func("cos", u), du)
                if name == "cos":
                    return _mul(Neg(Func("sin", u)), du)
                if name == "exp":
                    return _mul(Func("exp", u), du)
                return Div(du, u)
        raise TypeError(f"not an expression: {node!r}")

    return d(e)
