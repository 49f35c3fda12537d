"""Horizontal shear construction of harmonic maps.

Given an analytic ``phi`` and a dilatation ``omega`` with ``|omega| < 1``, the
shear solves ``H - G = phi`` and ``G' = omega H'``, so that

    H' = phi' / (1 - omega),   G' = omega H',   F = H + conj(G).
"""

from __future__ import annotations

import warnings

import numpy as np

from .funcore import AnalyticFn, Const, Product, Quotient, Sum
from .transforms import IntegralFn, TransformSpec, cesaro_transform

__all__ = [
    "HarmonicMap",
    "HarmonicShear",
    "ParameterRangeWarning",
    "SensePreservationWarning",
    "build_F",
    "jacobian",
    "lambda_family",
    "shear_solve",
]


class SensePreservationWarning(UserWarning):
    """``|omega| >= 1`` somewhere on the probe grid."""


class ParameterRangeWarning(UserWarning):
    """Parameters outside ``alpha >= 0, beta >= 0``."""


def _probe_points(n_radii: int = 48, n_angles: int = 96, r_max: float = 0.999):
    r = 1 - (1 - r_max) ** (np.arange(n_radii) / (n_radii - 1))
    t = 2 * np.pi * np.arange(n_angles) / n_angles
    return np.outer(r, np.exp(1j * t)).ravel()


class HarmonicMap:
    """``f = h + conj(g)`` with analytic ``h`` and ``g``.

    The dilatation defaults to ``g'/h'``.
    """

    def __init__(self, h: AnalyticFn, g: AnalyticFn, omega: AnalyticFn | None = None):
        self.h = h
        self.g = g
        self.omega = omega if omega is not None else Quotient(g.derivative(), h.derivative())
        self.warnings: list[str] = []

    def __call__(self, z):
        return self.h(z) + np.conj(self.g(z))

    def wirtinger(self, z):
        """``(f_z, f_zbar)``."""
        return self.h.derivative()(z), np.conj(self.g.derivative()(z))

    def jacobian(self, z):
        return jacobian(self, z)


class HarmonicShear(HarmonicMap):
    """Result of shearing ``phi`` with dilatation ``omega``."""

    def __init__(self, h, g, omega, phi):
        super().__init__(h, g, omega)
        self.phi = phi

    # The analytic and co-analytic names used throughout the criteria.
    @property
    def H(self):
        return self.h

    @property
    def G(self):
        return self.g


def shear_solve(phi: AnalyticFn, omega: AnalyticFn, probe=None,
                tol: float = 1e-10) -> HarmonicShear:
    """Shear ``phi`` horizontally with dilatation ``omega``.

    ``|omega|`` is sampled on ``probe`` (a default polar grid when None); any
    value ``>= 1`` adds a warning but the construction is still returned.
    """
    h_prime = Quotient(phi.derivative(), Sum(Const(1.0), -omega))
    g_prime = Product(omega, h_prime)
    out = HarmonicShear(IntegralFn(h_prime, tol), IntegralFn(g_prime, tol), omega, phi)
    pts = _probe_points() if probe is None else np.asarray(probe, dtype=complex)
    mod = np.abs(omega(pts))
    if not np.all(mod < 1):
        worst = int(np.nanargmax(np.where(np.isfinite(mod), mod, np.inf)))
        msg = f"|omega| = {mod[worst]:.6g} >= 1 at z = {complex(pts[worst]):.6g}; map is not sense-preserving"
        out.warnings.append(msg)
        warnings.warn(msg, SensePreservationWarning, stacklevel=2)
    return out


def build_F(spec: TransformSpec, w: AnalyticFn, probe=None, tol: float = 1e-10) -> HarmonicShear:
    """Shear the transform of ``spec`` with dilatation ``alpha (1 + beta) w``."""
    notes = []
    a, b = complex(spec.alpha), complex(spec.beta)
    if a.imag or b.imag or a.real < 0 or b.real < 0:
        notes.append(f"parameters alpha={spec.alpha}, beta={spec.beta} lie outside alpha, beta >= 0")
        warnings.warn(notes[-1], ParameterRangeWarning, stacklevel=2)
    phi = cesaro_transform(spec, tol=tol)
    omega = Product(Const(a * (1 + b)), w)
    out = shear_solve(phi, omega, probe, tol)
    out.warnings[:0] = notes
    out.spec = spec
    out.w = w
    return out


def lambda_family(s: HarmonicShear, lam) -> AnalyticFn:
    """``H + lam G`` for ``|lam| = 1``, with derivative ``H' (1 + lam omega)``."""
    lam = complex(lam)
    if abs(abs(lam) - 1) > 1e-12:
        raise ValueError(f"|lambda| must be 1, got {abs(lam)!r}")
    return IntegralFn(Product(s.h.derivative(), Sum(Const(1.0), Product(Const(lam), s.omega))))


def jacobian(s: HarmonicMap, z):
    """``|h'|^2 - |g'|^2``."""
    hp = s.h.derivative()(z)
    gp = s.g.derivative()(z)
    return np.abs(hp) ** 2 - np.abs(gp) ** 2
