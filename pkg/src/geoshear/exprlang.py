"""A tiny expression language for analytic functions of ``z``.

Grammar (lowest to highest binding)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right associative
    atom   := NUMBER | 'z' | 'i' | 'pi' | FUNC '(' expr ')' | '(' expr ')'

``NUMBER`` is a decimal literal with an optional exponent and an optional
``i`` suffix (``2.5i``).  ``FUNC`` is one of ``exp``, ``log``, ``sqrt``.
Evaluation uses principal branches throughout.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Expr",
    "Var",
    "Num",
    "Const",
    "Neg",
    "BinOp",
    "Call",
    "ExprError",
    "ExprSyntaxError",
    "UnknownIdentifierError",
    "EvalError",
    "parse",
    "to_text",
    "differentiate",
    "evaluate",
    "depends_on_z",
]

FUNCTIONS = ("exp", "log", "sqrt")
CONSTANTS = {"pi": math.pi}


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, offset: int, expected, found: str):
        self.offset = offset
        self.expected = frozenset(expected)
        self.found = found
        exp = ", ".join(sorted(self.expected))
        super().__init__(f"syntax error at offset {offset}: expected one of {{{exp}}}, found {found!r}")


class UnknownIdentifierError(ExprError):
    def __init__(self, name: str, offset: int):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown identifier {name!r} at offset {offset}")


class EvalError(ExprError, ArithmeticError):
    """Pole or branch point hit during evaluation."""

    def __init__(self, message: str, location):
        self.location = location
        super().__init__(f"{message} at z={location!r}")


# -- tree -------------------------------------------------------------------


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Expr):
    pass


@dataclass(frozen=True)
class Num(Expr):
    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))


@dataclass(frozen=True)
class Const(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    arg: Expr


# -- lexer / parser ---------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?i?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


def _tokenize(src: str):
    pos = 0
    out = []
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ExprSyntaxError(pos, {"number", "identifier", "operator"}, src[pos])
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("end", "", len(src)))
    return out


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text: str):
        kind, val, pos = self.take()
        if val != text or kind == "end":
            raise ExprSyntaxError(pos, {text}, val or "<end>")

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(pos, {"+", "-", "*", "/", "^", "<end>"}, val)
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            left = BinOp(op, left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "num":
            if val.endswith("i"):
                return Num(complex(0.0, float(val[:-1])))
            return Num(float(val))
        if kind == "ident":
            if val == "z":
                return Var()
            if val == "i":
                return Num(1j)
            if val in CONSTANTS:
                return Const(val)
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            raise UnknownIdentifierError(val, pos)
        if (kind, val) == ("op", "("):
            e = self.expr()
            self.expect(")")
            return e
        raise ExprSyntaxError(pos, {"number", "z", "i", "pi", "(", "-", *FUNCTIONS}, val or "<end>")


def parse(src: str) -> Expr:
    """Parse ``src`` into an expression tree."""
    if not src or not src.strip():
        raise ExprSyntaxError(0, {"number", "z", "i", "pi", "(", "-", *FUNCTIONS}, "<end>")
    return _Parser(src).parse()


# -- printer ----------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return 3
    return 5


def _num_text(v: complex) -> str:
    re_, im = v.real, v.imag
    if im == 0 and math.copysign(1.0, re_) > 0:
        return repr(re_)
    if re_ == 0 and math.copysign(1.0, re_) > 0 and im > 0:
        return f"{im!r}i"
    # folded constants only; the parser never produces these
    if im == 0:
        return f"({re_!r})"
    return f"({re_!r}{'+' if im >= 0 else '-'}{abs(im)!r}i)"


def to_text(e: Expr) -> str:
    """Render ``e`` so that ``parse(to_text(e))`` rebuilds the same tree."""
    if isinstance(e, Var):
        return "z"
    if isinstance(e, Num):
        return _num_text(e.value)
    if isinstance(e, Const):
        return e.name
    if isinstance(e, Call):
        return f"{e.fn}({to_text(e.arg)})"
    if isinstance(e, Neg):
        inner = to_text(e.arg)
        return f"-({inner})" if _prec(e.arg) < 3 else f"-{inner}"
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        lt, rt = to_text(e.left), to_text(e.right)
        if e.op == "^":
            if _prec(e.left) <= 4:
                lt = f"({lt})"
            if _prec(e.right) < 5:
                rt = f"({rt})"
            return f"{lt}^{rt}"
        if _prec(e.left) < p:
            lt = f"({lt})"
        if _prec(e.right) <= p:
            rt = f"({rt})"
        sep = f" {e.op} " if p == 1 else e.op
        return f"{lt}{sep}{rt}"
    raise TypeError(f"not an expression: {e!r}")


# -- evaluation -------------------------------------------------------------


def _plog(w):
    # adding +0j turns a signed -0.0 imaginary part into +0.0, keeping Im in (-pi, pi]
    return np.log(w + 0j)


def _first_bad(z, mask):
    if np.ndim(mask) == 0:
        return z
    return np.broadcast_to(z, np.shape(mask))[mask].flat[0]


def _is_int_literal(e: Expr) -> bool:
    return isinstance(e, Num) and e.value.imag == 0 and float(e.value.real).is_integer()


def evaluate(e: Expr, z):
    """Evaluate ``e`` at ``z`` (scalar or array) with principal branches."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = _eval(e, np.asarray(z, dtype=complex) if np.ndim(z) else complex(z), z)
    return complex(out) if np.ndim(z) == 0 else np.broadcast_to(out, np.shape(z)).astype(complex)


def _eval(e: Expr, z, z0):
    if isinstance(e, Var):
        return z
    if isinstance(e, Num):
        return e.value if np.ndim(z) == 0 else np.full(np.shape(z), e.value)
    if isinstance(e, Const):
        return complex(CONSTANTS[e.name])
    if isinstance(e, Neg):
        return -_eval(e.arg, z, z0)
    if isinstance(e, Call):
        u = _eval(e.arg, z, z0)
        if e.fn == "exp":
            return np.exp(u)
        if e.fn == "log":
            bad = u == 0
            if np.any(bad):
                raise EvalError("log of zero", _first_bad(z0, bad))
            return _plog(u)
        if e.fn == "sqrt":
            return np.sqrt(u + 0j)
        raise ExprError(f"unknown function {e.fn}")
    if isinstance(e, BinOp):
        a = _eval(e.left, z, z0)
        if e.op == "^":
            if _is_int_literal(e.right):
                n = int(e.right.value.real)
                if n < 0:
                    bad = a == 0
                    if np.any(bad):
                        raise EvalError("pole of negative power", _first_bad(z0, bad))
                return a**n
            b = _eval(e.right, z, z0)
            zero = a == 0
            if np.any(zero):
                bad = zero & (np.real(b) <= 0)
                if np.any(bad):
                    raise EvalError("zero raised to non-positive power", _first_bad(z0, bad))
                safe = np.where(zero, 1.0, a)
                return np.where(zero, 0.0, np.exp(b * _plog(safe)))
            return np.exp(b * _plog(a))
        b = _eval(e.right, z, z0)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            bad = b == 0
            if np.any(bad):
                raise EvalError("division by zero", _first_bad(z0, bad))
            return a / b
    raise TypeError(f"not an expression: {e!r}")


# -- differentiation --------------------------------------------------------

ZERO = Num(0.0)
ONE = Num(1.0)


def depends_on_z(e: Expr) -> bool:
    if isinstance(e, Var):
        return True
    if isinstance(e, (Num, Const)):
        return False
    if isinstance(e, (Neg, Call)):
        return depends_on_z(e.arg)
    return depends_on_z(e.left) or depends_on_z(e.right)


def _is(e: Expr, v: complex) -> bool:
    return isinstance(e, Num) and e.value == v


def _neg(a: Expr) -> Expr:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    return BinOp("+", a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if _is(b, 0):
        return a
    if _is(a, 0):
        return _neg(b)
    return BinOp("-", a, b)


def _mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    if _is(a, 0) or _is(b, 0):
        return ZERO
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    return BinOp("*", a, b)


def _div(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0:
        return Num(a.value / b.value)
    if _is(a, 0):
        return ZERO
    if _is(b, 1):
        return a
    return BinOp("/", a, b)


def _pow(a: Expr, b: Expr) -> Expr:
    if _is(b, 1):
        return a
    if _is(b, 0):
        return ONE
    return BinOp("^", a, b)


def differentiate(e: Expr) -> Expr:
    """Exact derivative with respect to ``z``."""
    if isinstance(e, Var):
        return ONE
    if isinstance(e, (Num, Const)):
        return ZERO
    if isinstance(e, Neg):
        return _neg(differentiate(e.arg))
    if isinstance(e, Call):
        u = e.arg
        du = differentiate(u)
        if e.fn == "exp":
            return _mul(e, du)
        if e.fn == "log":
            return _div(du, u)
        if e.fn == "sqrt":
            return _div(du, _mul(Num(2.0), e))
        raise ExprError(f"unknown function {e.fn}")
    u, v = e.left, e.right
    du, dv = differentiate(u), differentiate(v)
    if e.op == "+":
        return _add(du, dv)
    if e.op == "-":
        return _sub(du, dv)
    if e.op == "*":
        return _add(_mul(du, v), _mul(u, dv))
    if e.op == "/":
        return _div(_sub(_mul(du, v), _mul(u, dv)), _pow(v, Num(2.0)))
    if e.op == "^":
        if not depends_on_z(v):
            return _mul(_mul(v, _pow(u, _sub(v, ONE))), du)
        # u^v = exp(v log u)
        return _mul(e, _add(_mul(dv, Call("log", u)), _div(_mul(v, du), u)))
    raise TypeError(f"not an expression: {e!r}")
