"""Integral transforms of normalized analytic functions.

The main object is the two-parameter power transform

    C[phi](z) = integral_0^z ( phi(s) / (s (1 - s)^beta) )^alpha ds,

optionally rotated by ``theta``.  Special cases are exposed by name:
``j_alpha`` (beta = 0), the Cesaro-type ``c_beta`` (alpha = 1), ``i_alpha``
(powers of the derivative) and the derivative-product sum ``hornich_add``.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .funcore import (
    AnalyticFn,
    Const,
    DivZ,
    Linear,
    PrincipalPower,
    Product,
    TrackedPower,
    principal_log,
    rotate_fn,
)
from .quadrature import (
    DEFAULT_BUDGET,
    QuadratureResult,
    integrate_rays,
    integrate_segment,
)

__all__ = [
    "IntegralFn",
    "NormalizationError",
    "PowerPrimitive",
    "TransformSpec",
    "c_beta",
    "cesaro_integrand",
    "cesaro_transform",
    "check_normalized",
    "hornich_add",
    "i_alpha",
    "j_alpha",
]

NORMALIZATION_TOL = 1e-12


class NormalizationError(ValueError):
    pass


def check_normalized(phi: AnalyticFn, tol: float = NORMALIZATION_TOL):
    """Require ``phi(0) = 0`` and ``phi'(0) = 1``."""
    v0 = phi(0.0)
    d0 = phi.derivative()(0.0)
    if abs(v0) > tol or abs(d0 - 1) > tol:
        raise NormalizationError(f"expected phi(0)=0 and phi'(0)=1, got {v0!r} and {d0!r}")


class IntegralFn(AnalyticFn):
    """``z -> integral of g along [0, z]``.  Its derivative is ``g`` itself."""

    def __init__(self, integrand: AnalyticFn, tol: float = 1e-10,
                 budget: int = DEFAULT_BUDGET):
        super().__init__()
        self.integrand = integrand
        self.tol = tol
        self.budget = budget

    def _eval(self, z):
        values, _ = integrate_rays(self.integrand, z, self.tol, self.budget)
        return values

    def evaluate(self, z) -> QuadratureResult:
        """Single-point value together with its error estimate."""
        return integrate_segment(self.integrand, z, self.tol, self.budget)

    def with_error(self, z):
        """Vectorized ``(values, error_estimates)``."""
        return integrate_rays(self.integrand, z, self.tol, self.budget)

    def _derivative(self):
        return self.integrand

    def __repr__(self):
        return f"IntegralFn({self.integrand!r})"


@dataclass(frozen=True)
class TransformSpec:
    alpha: complex
    beta: complex
    theta: float
    phi: AnalyticFn


def cesaro_integrand(phi: AnalyticFn, alpha, beta) -> AnalyticFn:
    """``(phi(z)/z)^alpha (1 - z)^(-alpha beta)`` with ``phi(z)/z`` raised along
    the continuous branch that equals 1 at the origin."""
    alpha = complex(alpha)
    beta = complex(beta)
    if alpha == 0:
        return Const(1.0)
    factor = TrackedPower(DivZ(phi), alpha)
    if beta == 0:
        return factor
    return Product(factor, PrincipalPower(Linear(1.0, -1.0), -alpha * beta))


def cesaro_transform(spec: TransformSpec, tol: float = 1e-10,
                     budget: int = DEFAULT_BUDGET) -> AnalyticFn:
    """Rotated power transform ``e^{-i theta} C[phi](e^{i theta} z)``."""
    check_normalized(spec.phi)
    inner = IntegralFn(cesaro_integrand(spec.phi, spec.alpha, spec.beta), tol, budget)
    return rotate_fn(inner, spec.theta)


def j_alpha(phi: AnalyticFn, alpha, theta: float = 0.0, **kw) -> AnalyticFn:
    return cesaro_transform(TransformSpec(alpha, 0.0, theta, phi), **kw)


def c_beta(phi: AnalyticFn, beta, theta: float = 0.0, **kw) -> AnalyticFn:
    return cesaro_transform(TransformSpec(1.0, beta, theta, phi), **kw)


def i_alpha(phi: AnalyticFn, alpha, tol: float = 1e-10,
            budget: int = DEFAULT_BUDGET) -> AnalyticFn:
    """``integral_0^z phi'(s)^alpha ds`` on the branch with ``phi'(0)^alpha = 1``."""
    check_normalized(phi)
    if complex(alpha) == 0:
        return IntegralFn(Const(1.0), tol, budget)
    return IntegralFn(TrackedPower(phi.derivative(), alpha), tol, budget)


def hornich_add(f: AnalyticFn, g: AnalyticFn, tol: float = 1e-10,
                budget: int = DEFAULT_BUDGET) -> AnalyticFn:
    """``integral_0^z f'(s) g'(s) ds``."""
    return IntegralFn(Product(f.derivative(), g.derivative()), tol, budget)


class PowerPrimitive(AnalyticFn):
    """Closed form of ``integral_0^z (1 - e^{i theta} s)^(-kappa) ds``:

    ``e^{-i theta} (1 - (1 - e^{i theta} z)^(1 - kappa)) / (1 - kappa)``, and
    ``-e^{-i theta} Log(1 - e^{i theta} z)`` when ``kappa = 1``.
    """

    def __init__(self, kappa, theta: float = 0.0):
        super().__init__()
        self.kappa = complex(kappa)
        self.theta = float(theta)
        self.u = cmath.exp(1j * self.theta)

    def _eval(self, z):
        base = 1 - self.u * np.asarray(z, dtype=complex)
        if abs(self.kappa - 1) < 1e-15:
            return -principal_log(base) / self.u
        expo = 1 - self.kappa
        return (1 - np.exp(expo * principal_log(base))) / (expo * self.u)

    def _derivative(self):
        return PrincipalPower(Linear(1.0, -self.u), -self.kappa)

    def __repr__(self):
        return f"PowerPrimitive(kappa={self.kappa!r}, theta={self.theta!r})"
