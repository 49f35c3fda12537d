"""Analytic functions on the unit disk with exact derivative access.

Every function here is an :class:`AnalyticFn`.  Values are vectorized over
numpy arrays.  Derivatives are exact (closed form or symbolic), never finite
differences, and are built lazily.

Two evaluation entry points exist:

``f(z)``
    pointwise value.
``f.along_ray(z, ts)``
    values at ``ts * z`` for an increasing ``ts`` in ``[0, 1]``.  Functions
    holding a branch-tracked power continue the logarithm along the ray in
    that order, which is what quadrature on ``[0, z]`` needs.
"""

from __future__ import annotations

import cmath
import math
import threading
from math import factorial

import numpy as np

from . import exprlang

__all__ = [
    "AnalyticFn",
    "BranchError",
    "DomainError",
    "Const",
    "Linear",
    "Builtin",
    "ExprFn",
    "Composed",
    "Sum",
    "Product",
    "Quotient",
    "DivZ",
    "PrincipalPower",
    "TrackedPower",
    "FAMILIES",
    "builtin",
    "from_expr",
    "principal_log",
    "principal_pow",
    "rotate_fn",
]

FAMILIES = ("identity", "cayley", "koebe", "twostrip", "logmap")


class DomainError(ValueError):
    pass


class BranchError(ArithmeticError):
    """The base of a tracked power vanished on the continuation path."""

    def __init__(self, message: str, location=None):
        self.location = location
        super().__init__(message if location is None else f"{message} near z={location!r}")


def principal_log(w):
    """Log with imaginary part in (-pi, pi]."""
    # +0j normalizes a signed-zero imaginary part so the cut value is +pi
    return np.log(np.asarray(w, dtype=complex) + 0j)


def principal_pow(w, a):
    """``exp(a * Log w)`` with the principal logarithm.

    ``w == 0`` returns 0 when ``Re(a) > 0`` and raises :class:`DomainError`
    otherwise.
    """
    w = complex(w)
    a = complex(a)
    if w == 0:
        if a.real > 0:
            return 0j
        raise DomainError(f"0 ** {a} is undefined")
    return cmath.exp(a * cmath.log(w + 0j))


def _arr(z):
    return np.asarray(z, dtype=complex)


def _ray(z, ts):
    return np.multiply.outer(_arr(z), np.asarray(ts, dtype=float))


class AnalyticFn:
    """Base class.  Subclasses implement ``_eval`` and ``_derivative``."""

    def __init__(self):
        self._lock = threading.Lock()
        self._dcache = None

    def __call__(self, z):
        z = _arr(z)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = self._eval(z)
        out = np.broadcast_to(out, z.shape)
        return complex(out) if out.ndim == 0 else np.array(out, dtype=complex)

    def _eval(self, z):
        raise NotImplementedError

    def along_ray(self, z, ts, state=None):
        """Values at ``ts * z`` with shape ``z.shape + (len(ts),)``.

        ``state`` is an optional dict carrying branch-continuation state from
        an earlier call on the same ray with smaller ``ts``; it is updated in
        place.
        """
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return self._along_ray(_arr(z), np.asarray(ts, dtype=float), state)

    def _along_ray(self, z, ts, state=None):
        return self._eval(_ray(z, ts))

    def derivative(self) -> AnalyticFn:
        if self._dcache is None:
            with self._lock:
                if self._dcache is None:
                    self._dcache = self._derivative()
        return self._dcache

    def _derivative(self) -> AnalyticFn:
        raise NotImplementedError

    def log_derivative(self, z):
        """``f'/f``."""
        z = _arr(z)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = self._log_derivative(z)
        out = np.broadcast_to(out, z.shape)
        return complex(out) if out.ndim == 0 else np.array(out, dtype=complex)

    def _log_derivative(self, z):
        return self.derivative()._eval(z) / self._eval(z)

    def pre_schwarzian(self, z):
        """``f''/f'``."""
        return self.derivative().log_derivative(z)

    # arithmetic ---------------------------------------------------------

    @staticmethod
    def _lift(other) -> AnalyticFn:
        return other if isinstance(other, AnalyticFn) else Const(other)

    def __add__(self, other):
        return Sum(self, self._lift(other))

    def __radd__(self, other):
        return Sum(self._lift(other), self)

    def __sub__(self, other):
        return Sum(self, Product(Const(-1.0), self._lift(other)))

    def __rsub__(self, other):
        return Sum(self._lift(other), Product(Const(-1.0), self))

    def __mul__(self, other):
        return Product(self, self._lift(other))

    def __rmul__(self, other):
        return Product(self._lift(other), self)

    def __truediv__(self, other):
        return Quotient(self, self._lift(other))

    def __rtruediv__(self, other):
        return Quotient(self._lift(other), self)

    def __neg__(self):
        return Product(Const(-1.0), self)


class Const(AnalyticFn):
    def __init__(self, value):
        super().__init__()
        self.value = complex(value)

    def _eval(self, z):
        return np.full(z.shape, self.value)

    def _derivative(self):
        return Const(0.0)

    def _log_derivative(self, z):
        return np.zeros(z.shape, dtype=complex)

    def __repr__(self):
        return f"Const({self.value!r})"


class Linear(AnalyticFn):
    """``a + b z``."""

    def __init__(self, a, b):
        super().__init__()
        self.a, self.b = complex(a), complex(b)

    def _eval(self, z):
        return self.a + self.b * z

    def _derivative(self):
        return Const(self.b)

    def _log_derivative(self, z):
        return self.b / (self.a + self.b * z)

    def __repr__(self):
        return f"Linear({self.a!r}, {self.b!r})"


def _inv_pow(w, k):
    return w ** (-k)


class Builtin(AnalyticFn):
    """The named families, with closed-form derivatives of every order.

    ==========  ==================
    identity    z
    cayley      z/(1-z)
    koebe       z/(1-z)^2
    twostrip    z/(1-z^2)
    logmap      -log(1-z)
    ==========  ==================
    """

    normalized_tags = FAMILIES

    def __init__(self, tag: str, order: int = 0):
        if tag not in FAMILIES:
            raise ValueError(f"unknown family {tag!r}; expected one of {', '.join(FAMILIES)}")
        super().__init__()
        self.tag = tag
        self.order = order

    def _eval(self, z):
        n, t = self.order, self.tag
        if t == "identity":
            if n == 0:
                return z
            return np.full(z.shape, 1.0 + 0j if n == 1 else 0j)
        if t == "cayley":
            if n == 0:
                return z / (1 - z)
            return factorial(n) * _inv_pow(1 - z, n + 1)
        if t == "koebe":
            if n == 0:
                return z / (1 - z) ** 2
            return factorial(n + 1) * _inv_pow(1 - z, n + 2) - factorial(n) * _inv_pow(1 - z, n + 1)
        if t == "twostrip":
            if n == 0:
                return z / (1 - z * z)
            return 0.5 * factorial(n) * (_inv_pow(1 - z, n + 1) - (-1) ** n * _inv_pow(1 + z, n + 1))
        if t == "logmap":
            if n == 0:
                return -principal_log(1 - z)
            return factorial(n - 1) * _inv_pow(1 - z, n)
        raise AssertionError(t)

    def _derivative(self):
        return Builtin(self.tag, self.order + 1)

    def _log_derivative(self, z):
        if self.tag == "identity":
            return 1 / z if self.order == 0 else np.zeros(z.shape, dtype=complex)
        if self.order >= 1 and self.tag in ("cayley", "logmap"):
            return (self.order + (self.tag == "cayley")) / (1 - z)
        return super()._log_derivative(z)

    def __repr__(self):
        return f"Builtin({self.tag!r}, order={self.order})"


def builtin(tag: str) -> Builtin:
    return Builtin(tag)


class ExprFn(AnalyticFn):
    """Function backed by an expression tree; principal branches."""

    def __init__(self, expr):
        super().__init__()
        self.expr = exprlang.parse(expr) if isinstance(expr, str) else expr

    def _eval(self, z):
        return exprlang.evaluate(self.expr, z)

    def _derivative(self):
        return ExprFn(exprlang.differentiate(self.expr))

    def __repr__(self):
        return f"ExprFn({exprlang.to_text(self.expr)!r})"


def from_expr(src: str) -> ExprFn:
    return ExprFn(src)


class Composed(AnalyticFn):
    """``z -> outer * f(inner * z)``."""

    def __init__(self, f: AnalyticFn, outer, inner):
        super().__init__()
        self.f = f
        self.outer = complex(outer)
        self.inner = complex(inner)

    def _eval(self, z):
        return self.outer * self.f._eval(self.inner * z)

    def _along_ray(self, z, ts, state=None):
        return self.outer * self.f._along_ray(self.inner * z, ts, state)

    def _derivative(self):
        return Composed(self.f.derivative(), self.outer * self.inner, self.inner)

    def _log_derivative(self, z):
        return self.inner * self.f._log_derivative(self.inner * z)


def rotate_fn(f: AnalyticFn, theta: float) -> AnalyticFn:
    """``z -> exp(-i theta) f(exp(i theta) z)``."""
    if theta == 0:
        return f
    u = cmath.exp(1j * theta)
    return Composed(f, 1 / u, u)


class Sum(AnalyticFn):
    def __init__(self, f: AnalyticFn, g: AnalyticFn):
        super().__init__()
        self.f, self.g = f, g

    def _eval(self, z):
        return self.f._eval(z) + self.g._eval(z)

    def _along_ray(self, z, ts, state=None):
        return self.f._along_ray(z, ts, state) + self.g._along_ray(z, ts, state)

    def _derivative(self):
        return Sum(self.f.derivative(), self.g.derivative())


class Product(AnalyticFn):
    def __init__(self, f: AnalyticFn, g: AnalyticFn):
        super().__init__()
        self.f, self.g = f, g

    def _eval(self, z):
        return self.f._eval(z) * self.g._eval(z)

    def _along_ray(self, z, ts, state=None):
        return self.f._along_ray(z, ts, state) * self.g._along_ray(z, ts, state)

    def _derivative(self):
        if isinstance(self.f, Const):
            return Product(self.f, self.g.derivative())
        return Sum(Product(self.f.derivative(), self.g), Product(self.f, self.g.derivative()))

    def _log_derivative(self, z):
        if isinstance(self.f, Const):
            return self.g._log_derivative(z)
        return self.f._log_derivative(z) + self.g._log_derivative(z)


class Quotient(AnalyticFn):
    def __init__(self, f: AnalyticFn, g: AnalyticFn):
        super().__init__()
        self.f, self.g = f, g

    def _eval(self, z):
        return self.f._eval(z) / self.g._eval(z)

    def _along_ray(self, z, ts, state=None):
        return self.f._along_ray(z, ts, state) / self.g._along_ray(z, ts, state)

    def _derivative(self):
        # (f/g)' = (f/g) (f'/f - g'/g), written without dividing by f
        num = Sum(Product(self.f.derivative(), self.g), Product(Const(-1.0), Product(self.f, self.g.derivative())))
        return Quotient(num, Product(self.g, self.g))

    def _log_derivative(self, z):
        return self.f._log_derivative(z) - self.g._log_derivative(z)


class DivZ(AnalyticFn):
    """``(f(z)/z)^(order)`` for ``f(0) = 0``; the singularity at 0 is removed."""

    SERIES_RADIUS = 2e-3
    SERIES_TERMS = 5

    def __init__(self, f: AnalyticFn, order: int = 0):
        super().__init__()
        self.f = f
        self.order = order

    def _taylor(self, z):
        # (f/z)^(k)(z) = sum_n f^(n+k+1)(0) z^n / (n! (n+k+1))
        k = self.order
        out = np.zeros(z.shape, dtype=complex)
        d = self.f
        for _ in range(k + 1):
            d = d.derivative()
        for n in range(self.SERIES_TERMS):
            out = out + d._eval(np.zeros(1, dtype=complex))[0] * z**n / (factorial(n) * (n + k + 1))
            d = d.derivative()
        return out

    def _direct(self, z):
        k = self.order
        out = np.zeros(z.shape, dtype=complex)
        d = self.f
        for j in range(k + 1):
            coef = math.comb(k, j) * (-1) ** (k - j) * factorial(k - j)
            out = out + coef * d._eval(z) / z ** (k - j + 1)
            d = d.derivative()
        return out

    def _eval(self, z):
        z = _arr(z)
        if self.order == 0:
            zero = z == 0
            if not np.any(zero):
                return self.f._eval(z) / z
            out = np.empty(z.shape, dtype=complex)
            out[~zero] = self.f._eval(z[~zero]) / z[~zero]
            out[zero] = self.f.derivative()._eval(np.zeros(1, dtype=complex))[0]
            return out
        small = np.abs(z) <= self.SERIES_RADIUS
        if not np.any(small):
            return self._direct(z)
        out = np.empty(z.shape, dtype=complex)
        out[small] = self._taylor(z[small])
        out[~small] = self._direct(z[~small])
        return out

    def _along_ray(self, z, ts, state=None):
        if self.order == 0:
            pts = _ray(z, ts)
            vals = self.f._along_ray(z, ts, state)
            zero = pts == 0
            if np.any(zero):
                out = np.where(zero, 0, vals) / np.where(zero, 1, pts)
                out[zero] = self.f.derivative()._eval(np.zeros(1, dtype=complex))[0]
                return out
            return vals / pts
        return self._eval(_ray(z, ts))

    def _derivative(self):
        return DivZ(self.f, self.order + 1)

    def _log_derivative(self, z):
        if self.order > 0:
            return super()._log_derivative(z)
        z = _arr(z)
        zero = z == 0
        if not np.any(zero):
            return self.f._log_derivative(z) - 1 / z
        out = np.empty(z.shape, dtype=complex)
        out[~zero] = self.f._log_derivative(z[~zero]) - 1 / z[~zero]
        origin = np.zeros(1, dtype=complex)
        d1 = self.f.derivative()
        out[zero] = d1.derivative()._eval(origin)[0] / (2 * d1._eval(origin)[0])
        return out


class _PowerBase(AnalyticFn):
    def __init__(self, base: AnalyticFn, exponent):
        super().__init__()
        self.base = base
        self.c = complex(exponent)

    def _derivative(self):
        return Product(self, Product(Const(self.c), Quotient(self.base.derivative(), self.base)))

    def _log_derivative(self, z):
        return self.c * self.base._log_derivative(z)


class PrincipalPower(_PowerBase):
    """``exp(c Log b(z))`` with the principal logarithm.

    Used for powers of ``1 - e^{i theta} z``, whose real part stays
    positive on the disk so no continuation is needed.
    """

    def _eval(self, z):
        b = self.base._eval(z)
        return np.exp(self.c * principal_log(b))

    def _along_ray(self, z, ts, state=None):
        return np.exp(self.c * principal_log(self.base._along_ray(z, ts, state)))


class TrackedPower(_PowerBase):
    """``exp(c L(z))`` where ``L`` is the continuous log of the base along
    the segment from 0, seeded with the principal log of ``base(0)``.
    """

    MAX_JUMP = math.pi / 2
    MAX_SAMPLES = 1 << 14
    RAY_SAMPLES = 16

    def __init__(self, base: AnalyticFn, exponent):
        super().__init__(base, exponent)
        b0 = base(0.0)
        if b0 == 0:
            raise BranchError("tracked power needs a nonzero base at 0", 0j)
        self.seed = complex(principal_log(b0))

    def tracked_log(self, z, ts, state=None):
        """Continuous log of the base at ``ts * z``.

        Continuation starts from the seed at ``t = 0``, or from the last
        ``(t, log)`` recorded in ``state`` for this node.  The ray is refined
        until consecutive samples differ in argument by less than
        ``MAX_JUMP``.
        """
        z = _arr(z)
        ts = np.asarray(ts, dtype=float)
        key = id(self)
        if state is not None and key in state:
            t0, l0 = state[key]
        else:
            t0, l0 = 0.0, np.full(z.shape, self.seed)
        snapshot = {} if state is None else dict(state)
        grid = ts
        pick = np.arange(ts.size)
        while True:
            inner = dict(snapshot)
            b = self.base._along_ray(z, grid, inner)
            hit = (b == 0) | ~np.isfinite(b)
            if np.any(hit):
                where = np.argwhere(hit)[0]
                raise BranchError("base of tracked power vanished or blew up", complex(_ray(z, grid)[tuple(where)]))
            logs = principal_log(b)
            start = np.broadcast_to(np.imag(l0), z.shape)[..., None]
            arg = np.unwrap(np.concatenate([start, logs.imag], axis=-1), axis=-1)
            jump = np.abs(np.diff(arg, axis=-1)).max(initial=0.0)
            if jump <= self.MAX_JUMP or grid.size >= self.MAX_SAMPLES:
                if jump > self.MAX_JUMP:
                    raise BranchError("branch continuation did not resolve along the ray")
                out = logs.real + 1j * arg[..., 1:]
                if state is not None and grid.size:
                    state.update(inner)
                    state[key] = (grid[-1], out[..., -1])
                return out[..., pick]
            # insert midpoints, including one between t0 and the first node
            prev = np.concatenate([[t0], grid[:-1]])
            mids = 0.5 * (prev + grid)
            grid = np.ravel(np.column_stack([mids, grid]))
            pick = 2 * pick + 1

    def _along_ray(self, z, ts, state=None):
        return np.exp(self.c * self.tracked_log(z, ts, state))

    def _eval(self, z):
        ts = np.linspace(0.0, 1.0, self.RAY_SAMPLES + 1)[1:]
        return self._along_ray(z, ts)[..., -1]
