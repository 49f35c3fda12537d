"""Univalence and convexity criteria evaluated on disk grids.

Pointwise functionals accept scalars or numpy arrays.  Suprema over the
disk are estimated by :func:`sup_functional` on a :class:`DiskGrid` with
local refinement around the extremal point; a verdict is ``certified`` only
when the estimate clears the bound by a safety slack.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .funcore import AnalyticFn, DomainError
from .quadrature import integrate_interval
from .shear import HarmonicMap, lambda_family

__all__ = [
    "CERTIFIED",
    "VIOLATED",
    "INCONCLUSIVE",
    "CheckReport",
    "CriticalPointError",
    "DiskGrid",
    "Params",
    "arcsin_bound",
    "becker_analytic_functional",
    "becker_harmonic_functional",
    "becker_necessity_checker",
    "becker_sufficient_checker",
    "convexity_checker",
    "convexity_functional",
    "ctc_arc_integral",
    "lemma_b_check",
    "lemma_e_form",
    "lemma_e_scan",
    "norm_hyperbolic",
    "norm_sup",
    "pre_schwarzian_analytic",
    "pre_schwarzian_harmonic",
    "stable_sweep",
    "sup_functional",
    "univalence_necessity_functional",
]

CERTIFIED = "certified"
VIOLATED = "bound-violated"
INCONCLUSIVE = "inconclusive"
DEFAULT_SLACK = 1e-3


class CriticalPointError(ArithmeticError):
    """The derivative vanishes where a pre-Schwarzian is needed."""


@dataclass(frozen=True)
class Params:
    """Theorem parameters, validated on construction.

    ``alpha`` and ``beta`` outside ``[0, inf)`` are rejected unless
    ``allow_out_of_range`` is set; counterexample studies need that.
    """

    alpha: float = 0.0
    beta: float = 0.0
    theta: float = 0.0
    delta: float = 0.0
    gamma: float = 2.0
    c: float = 0.0
    lam: complex = 1.0
    allow_out_of_range: bool = False

    def __post_init__(self):
        if not self.allow_out_of_range:
            if self.alpha < 0:
                raise ValueError(f"alpha must be >= 0, got {self.alpha}")
            if self.beta < 0:
                raise ValueError(f"beta must be >= 0, got {self.beta}")
        if not (0 <= self.delta < 1):
            raise ValueError(f"delta must lie in [0, 1), got {self.delta}")
        if self.gamma < 1:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")
        if not (-0.5 < self.c <= 0):
            raise ValueError(f"c must lie in (-1/2, 0], got {self.c}")
        if abs(abs(complex(self.lam)) - 1) > 1e-12:
            raise ValueError(f"|lambda| must be 1, got {abs(complex(self.lam))}")

    @property
    def out_of_range(self) -> list[str]:
        bad = []
        if self.alpha < 0:
            bad.append("alpha")
        if self.beta < 0:
            bad.append("beta")
        return bad


@dataclass(frozen=True)
class DiskGrid:
    """Polar grid ``r_k e^{i t_j}`` with radii clustered toward ``r_max``."""

    n_radii: int = 200
    n_angles: int = 512
    r_max: float = 0.999
    refinement: int = 2
    factor: int = 4

    def __post_init__(self):
        if not (0 < self.r_max < 1):
            raise ValueError("r_max must lie in (0, 1)")
        if self.n_radii < 2 or self.n_angles < 1:
            raise ValueError("grid needs at least 2 radii and 1 angle")

    @property
    def radii(self) -> np.ndarray:
        k = np.arange(self.n_radii)
        return 1 - (1 - self.r_max) ** (k / (self.n_radii - 1))

    @property
    def angles(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n_angles) / self.n_angles

    def points(self) -> np.ndarray:
        """Radius-major flat array of grid points."""
        return np.outer(self.radii, np.exp(1j * self.angles)).ravel()

    def boundary(self) -> np.ndarray:
        return self.r_max * np.exp(1j * self.angles)


@dataclass
class CheckReport:
    criterion: str
    parameters: dict
    sup_value: float
    argmax: complex
    bound: object
    verdict: str
    witnesses: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["argmax"] = _cjson(self.argmax)
        d["witnesses"] = [_witness_json(w) for w in self.witnesses]
        d["sup_value"] = _fjson(self.sup_value)
        d["bound"] = _fjson(self.bound) if isinstance(self.bound, float) else self.bound
        return d


def _fjson(x):
    x = float(x)
    return x if math.isfinite(x) else str(x)


def _cjson(z):
    if z is None:
        return None
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _witness_json(w):
    if isinstance(w, dict):
        return {k: (_cjson(v) if isinstance(v, complex) else v) for k, v in w.items()}
    z, v = w
    return [_cjson(z), _fjson(v) if not isinstance(v, complex) else _cjson(v)]


# pointwise functionals -------------------------------------------------------

def _arr(z):
    return np.asarray(z, dtype=complex)


def _out(x):
    x = np.asarray(x)
    return x.item() if x.ndim == 0 else x


def pre_schwarzian_analytic(h: AnalyticFn, z):
    """``h''/h'``."""
    z = _arr(z)
    d = h.derivative()(z)
    if np.any(d == 0):
        raise CriticalPointError("h' vanishes at a requested point")
    return _out(h.pre_schwarzian(z))


def _omega_parts(s: HarmonicMap, z):
    w = np.asarray(s.omega(z))
    dw = np.asarray(s.omega.derivative()(z))
    return w, dw


def pre_schwarzian_harmonic(s: HarmonicMap, z):
    """``h''/h' - conj(omega) omega' / (1 - |omega|^2)``."""
    z = _arr(z)
    w, dw = _omega_parts(s, z)
    if np.any(np.abs(w) >= 1):
        raise DomainError("|omega| >= 1: the map is not sense-preserving there")
    return _out(np.asarray(pre_schwarzian_analytic(s.h, z)) - np.conj(w) * dw / (1 - np.abs(w) ** 2))


def becker_harmonic_functional(s: HarmonicMap, z):
    """``(1-|z|^2)|z P| + |z omega'| (1-|z|^2)/(1-|omega|^2)``; at most 1
    throughout the disk is sufficient for univalence."""
    z = _arr(z)
    w, dw = _omega_parts(s, z)
    if np.any(np.abs(w) >= 1):
        raise DomainError("|omega| >= 1: the map is not sense-preserving there")
    p = np.asarray(s.h.pre_schwarzian(z)) - np.conj(w) * dw / (1 - np.abs(w) ** 2)
    q = 1 - np.abs(z) ** 2
    return _out(q * np.abs(z * p) + np.abs(z * dw) * q / (1 - np.abs(w) ** 2))


def becker_analytic_functional(h: AnalyticFn, z):
    """``(1-|z|^2) |z h''/h'|``."""
    z = _arr(z)
    return _out((1 - np.abs(z) ** 2) * np.abs(z * np.asarray(h.pre_schwarzian(z))))


def univalence_necessity_functional(h: AnalyticFn, z):
    """``(1-|z|^2) |h''/h'|``.  Every univalent ``h`` keeps it at most 6,
    so a larger value proves ``h`` is not univalent."""
    z = _arr(z)
    return _out((1 - np.abs(z) ** 2) * np.abs(np.asarray(h.pre_schwarzian(z))))


def convexity_functional(h: AnalyticFn, z):
    """``Re[1 + z h''/h']``."""
    z = _arr(z)
    return _out(np.real(1 + z * np.asarray(h.pre_schwarzian(z))))


def lemma_e_form(phi: AnalyticFn, mu: float, nu: float, z):
    """``Re{e^{i mu} (1 - 2 z e^{-i mu} cos nu + z^2 e^{-2 i mu}) phi'(z)}``.

    Nonnegative on the disk for some ``(mu, nu)`` exactly when a normalized
    locally univalent ``phi`` is convex in the horizontal direction.
    """
    z = _arr(z)
    u = np.exp(-1j * mu)
    quad = 1 - 2 * z * u * np.cos(nu) + z**2 * u**2
    return _out(np.real(np.exp(1j * mu) * quad * np.asarray(phi.derivative()(z))))


def arcsin_bound(r: float, alpha: float, beta: float) -> float:
    """``2 arcsin(r alpha (1+beta))``: bound on the argument swing of
    ``1 + lambda alpha (1+beta) w`` over an arc of radius ``r``."""
    x = r * alpha * (1 + beta)
    if abs(x) > 1:
        raise ValueError(f"arcsin argument {x} exceeds 1")
    return 2 * math.asin(x)


def ctc_arc_integral(h: AnalyticFn, r: float, t1: float, t2: float, tol: float = 1e-10) -> float:
    """``integral_{t1}^{t2} Re[1 + z h''/h'] dt`` over ``z = r e^{it}``.

    Close-to-convexity requires this to exceed ``-pi`` for all arcs.
    """
    if not (0 < r < 1):
        raise ValueError("r must lie in (0, 1)")
    if not (t1 < t2 <= t1 + 2 * math.pi + 1e-12):
        raise ValueError("need t1 < t2 <= t1 + 2 pi")
    d = h.derivative()

    def f(t):
        z = r * np.exp(1j * t)
        if np.any(d(z) == 0):
            raise CriticalPointError("h' vanishes on the arc")
        return np.real(1 + z * h.pre_schwarzian(z))

    return integrate_interval(f, t1, t2, tol).value.real


# grid suprema ------------------------------------------------------------------

def _evaluate(f, pts):
    try:
        with np.errstate(all="ignore"):
            vals = np.asarray(f(pts), dtype=float)
        if vals.shape != pts.shape:
            vals = np.broadcast_to(vals, pts.shape).astype(float)
        return vals
    except (ArithmeticError, ValueError):
        vals = np.empty(pts.shape)
        for i, z in enumerate(pts):
            try:
                vals[i] = float(f(complex(z)))
            except (ArithmeticError, ValueError):
                vals[i] = np.nan
        return vals


def _patches(grid: DiskGrid, r0: float, t0: float, dr: float, dt: float):
    m = grid.factor
    r = r0 + dr * np.arange(-m, m + 1) / m
    r = r[(r >= 0) & (r <= grid.r_max)]
    t = t0 + dt * np.arange(-m, m + 1) / m
    return np.outer(r, np.exp(1j * t)).ravel()


def sup_functional(f, grid: DiskGrid | None = None, *, name: str = "functional",
                   bound=None, sense: str = "max", slack: float = DEFAULT_SLACK,
                   parameters: dict | None = None, n_witnesses: int = 5) -> CheckReport:
    """Extremum of a real pointwise functional over the grid.

    With ``sense="max"`` the verdict is ``certified`` when the supremum is
    below ``bound - slack`` and ``bound-violated`` when it exceeds ``bound``.
    With ``sense="min"`` the roles are mirrored.  Points where ``f`` fails
    or returns a non-finite value are skipped and counted in the notes.
    """
    grid = grid or DiskGrid()
    if sense not in ("max", "min"):
        raise ValueError("sense must be 'max' or 'min'")
    sign = 1.0 if sense == "max" else -1.0
    pts = grid.points()
    vals = sign * _evaluate(f, pts)
    bad = ~np.isfinite(vals)
    if bad.all():
        raise ArithmeticError(f"{name}: functional failed at every grid point")
    masked = np.where(bad, -np.inf, vals)
    best = int(np.argmax(masked))  # first maximal index in enumeration order
    best_z, best_v = complex(pts[best]), float(masked[best])

    radii = grid.radii
    ri = best // grid.n_angles
    dr = float(max(radii[min(ri + 1, radii.size - 1)] - radii[ri], radii[ri] - radii[max(ri - 1, 0)]))
    dt = 2 * np.pi / grid.n_angles
    for _ in range(grid.refinement):
        local = _patches(grid, abs(best_z), math.atan2(best_z.imag, best_z.real), dr, dt)
        lv = sign * _evaluate(f, local)
        lv = np.where(np.isfinite(lv), lv, -np.inf)
        k = int(np.argmax(lv))
        if lv[k] > best_v:
            best_z, best_v = complex(local[k]), float(lv[k])
        dr /= grid.factor
        dt /= grid.factor

    ext = sign * best_v
    notes = []
    if bad.any():
        notes.append(f"{int(bad.sum())} grid points skipped after evaluation errors")
    verdict = INCONCLUSIVE
    witnesses = []
    if bound is not None:
        b = float(bound)
        if sense == "max":
            violated, safe = ext > b, ext <= b - slack
            over = np.flatnonzero(masked > b)
        else:
            violated, safe = ext < b, ext >= b + slack
            over = np.flatnonzero(masked > -b)
        verdict = VIOLATED if violated else CERTIFIED if safe else INCONCLUSIVE
        if violated:
            witnesses.append((best_z, ext))
            order = over[np.argsort(-masked[over], kind="stable")][:n_witnesses]
            witnesses += [(complex(pts[i]), float(sign * masked[i])) for i in order
                          if complex(pts[i]) != best_z][: n_witnesses - 1]
    return CheckReport(name, dict(parameters or {}), ext, best_z,
                       None if bound is None else float(bound), verdict, witnesses, notes)


def norm_sup(w: AnalyticFn, grid: DiskGrid | None = None) -> float:
    """Grid estimate of ``sup |w|``."""
    rep = sup_functional(lambda z: np.abs(w(z)), grid, name="norm_sup")
    if rep.sup_value >= 1:
        raise DomainError(f"|w| = {rep.sup_value} >= 1 at z = {rep.argmax}")
    return rep.sup_value


def norm_hyperbolic(w: AnalyticFn, grid: DiskGrid | None = None) -> float:
    """Grid estimate of ``sup |w'|(1-|z|^2)/(1-|w|^2)``."""
    dw = w.derivative()

    def quotient(z):
        v = np.abs(w(z))
        if np.any(v >= 1):
            raise DomainError("|w| >= 1 on the grid")
        return np.abs(dw(z)) * (1 - np.abs(z) ** 2) / (1 - v**2)

    grid = grid or DiskGrid()
    pts = grid.points()
    if np.any(np.abs(w(pts)) >= 1):
        raise DomainError("|w| >= 1 on the grid")
    return sup_functional(quotient, grid, name="norm_hyperbolic").sup_value


# composite checks ------------------------------------------------------------------

def lemma_b_check(s: HarmonicMap, c: float, grid: DiskGrid | None = None,
                  slack: float = 0.0) -> CheckReport:
    """``Re[1 + z h''/h'] > c`` together with ``|omega| < cos(pi |c|)``."""
    if not (-0.5 < c <= 0):
        raise ValueError(f"c must lie in (-1/2, 0], got {c}")
    grid = grid or DiskGrid()
    limit = math.cos(math.pi * abs(c))
    conv = sup_functional(lambda z: convexity_functional(s.h, z), grid,
                          name="convexity", bound=c, sense="min", slack=slack)
    dil = sup_functional(lambda z: np.abs(s.omega(z)), grid, name="dilatation",
                         bound=limit, slack=slack)
    conv_ok = conv.sup_value > c
    dil_ok = dil.sup_value < limit
    witnesses = []
    if not conv_ok:
        witnesses.append({"clause": "convexity", "z": conv.argmax, "value": conv.sup_value})
    if not dil_ok:
        witnesses.append({"clause": "dilatation", "z": dil.argmax, "value": dil.sup_value})
    verdict = CERTIFIED if conv_ok and dil_ok else VIOLATED
    return CheckReport(
        "lemma-b", {"c": c},
        dil.sup_value, dil.argmax,
        {"convexity_min_gt": c, "dilatation_sup_lt": limit},
        verdict, witnesses,
        [f"min Re[1+zh''/h'] = {conv.sup_value:.12g} at {conv.argmax}",
         f"sup |omega| = {dil.sup_value:.12g} at {dil.argmax}"],
    )


def lemma_e_scan(phi: AnalyticFn, grid: DiskGrid | None = None, mu_count: int = 64,
                 nu_count: int = 33, pairs=None) -> CheckReport:
    """Search ``(mu, nu)`` for which the horizontal-convexity form stays
    nonnegative on the grid.

    ``pairs`` overrides the default ``mu_count x nu_count`` scan of
    ``[0, 2 pi) x [0, pi]``.  Certified when some pair has grid minimum
    ``>= 0``; otherwise every pair is reported with its negative witness.
    """
    grid = grid or DiskGrid()
    if pairs is None:
        mus = 2 * np.pi * np.arange(mu_count) / mu_count
        nus = np.linspace(0.0, np.pi, nu_count)
        pairs = [(m, n) for m in mus for n in nus]
    pts = grid.points()
    dphi = np.asarray(phi.derivative()(pts))
    z2 = pts**2
    best = None
    witnesses = []
    for mu, nu in pairs:
        e = np.exp(-1j * mu)
        vals = np.real(np.exp(1j * mu) * (1 - 2 * pts * e * np.cos(nu) + z2 * e * e) * dphi)
        k = int(np.argmin(np.where(np.isfinite(vals), vals, np.inf)))
        mn = float(vals[k])
        if best is None or mn > best[2]:
            best = (mu, nu, mn, complex(pts[k]))
        if mn < 0:
            witnesses.append({"mu": float(mu), "nu": float(nu), "z": complex(pts[k]), "value": mn})
    mu, nu, mn, zmin = best
    if mn >= 0:
        # confirm the winning pair with local refinement
        rep = sup_functional(lambda z: lemma_e_form(phi, mu, nu, z), grid,
                             name="lemma-e", bound=0.0, sense="min", slack=0.0)
        mn, zmin = rep.sup_value, rep.argmax
    verdict = CERTIFIED if mn >= 0 else VIOLATED
    return CheckReport(
        "lemma-e-chd", {"mu": float(mu), "nu": float(nu), "pairs": len(pairs)},
        mn, zmin, 0.0, verdict,
        [] if verdict == CERTIFIED else witnesses,
        [f"best pair (mu, nu) = ({mu:.6g}, {nu:.6g}) with grid minimum {mn:.6g}"],
    )


def stable_sweep(s: HarmonicMap, checker, lambda_count: int = 64) -> CheckReport:
    """Run ``checker`` on ``h + lambda g`` for ``lambda_count`` equally spaced
    unimodular ``lambda`` starting at ``lambda = 1``.

    A failing ``lambda`` is a genuine counterexample; passing all sampled
    ``lambda`` is evidence, not proof, for the whole circle.
    """
    if lambda_count < 1:
        raise ValueError("lambda_count must be >= 1")
    reports = []
    first_fail = None
    worst = None
    for k in range(lambda_count):
        lam = complex(np.exp(2j * np.pi * k / lambda_count))
        if k == 0:
            lam = 1 + 0j
        rep = checker(lambda_family(s, lam))
        rep.parameters["lambda"] = [lam.real, lam.imag]
        reports.append(rep)
        if rep.verdict == VIOLATED and first_fail is None:
            first_fail = (lam, rep)
        if worst is None or rep.sup_value > worst[1].sup_value:
            worst = (lam, rep)
    verdicts = {r.verdict for r in reports}
    if VIOLATED in verdicts:
        verdict = VIOLATED
    elif verdicts == {CERTIFIED}:
        verdict = CERTIFIED
    else:
        verdict = INCONCLUSIVE
    lam, rep = first_fail if first_fail else worst
    witnesses = []
    if first_fail:
        witnesses.append({"lambda": lam, "z": rep.argmax, "value": rep.sup_value})
    name = reports[0].criterion
    return CheckReport(
        f"stable-sweep[{name}]", {"lambda_count": lambda_count},
        worst[1].sup_value, worst[1].argmax, reports[0].bound, verdict, witnesses,
        [f"{sum(r.verdict == VIOLATED for r in reports)} of {lambda_count} lambda values violate the bound",
         "sufficiency verdicts are sampled over lambda; a violation is a true counterexample"],
    )


def becker_sufficient_checker(grid: DiskGrid | None = None, slack: float = DEFAULT_SLACK):
    """Checker certifying ``(1-|z|^2)|z h''/h'| <= 1`` (sufficient for
    univalence) on the grid."""
    grid = grid or DiskGrid()

    def check(h):
        return sup_functional(lambda z: becker_analytic_functional(h, z), grid,
                              name="becker-analytic", bound=1.0, slack=slack)

    return check


def becker_necessity_checker(grid: DiskGrid | None = None):
    """Checker that falsifies univalence when ``(1-|z|^2)|h''/h'| > 6``.

    Staying below 6 proves nothing, so the passing verdict is inconclusive.
    """
    grid = grid or DiskGrid()

    def check(h):
        rep = sup_functional(lambda z: univalence_necessity_functional(h, z), grid,
                             name="univalence-necessity", bound=6.0, slack=0.0)
        if rep.verdict == CERTIFIED:
            rep.verdict = INCONCLUSIVE
        return rep

    return check


def convexity_checker(grid: DiskGrid | None = None):
    """Checker reporting the grid minimum of ``Re[1 + z h''/h']``.

    A negative minimum means ``h`` is not convex; it is reported as a
    violation of the convexity bound 0.
    """
    grid = grid or DiskGrid()

    def check(h):
        return sup_functional(lambda z: convexity_functional(h, z), grid,
                              name="convexity", bound=0.0, sense="min", slack=0.0)

    return check
