"""Parameter bounds of the univalence, stability and convexity theorems.

Every calculator works in exact arithmetic (rationals and square roots via
sympy).  Float inputs are read through their decimal representation, so
``0.5`` becomes ``1/2``.  Calculators return a :class:`BoundResult` whose
``alpha_max`` is the largest admissible ``alpha``; calculators that test a
given ``alpha`` also fill ``conditions`` and ``holds``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import sympy as sp

__all__ = [
    "BoundResult",
    "THEOREMS",
    "ctc",
    "exact",
    "lif_shu",
    "lif_univ",
    "shcc",
    "shu",
    "thm31",
    "thm34",
    "thm37",
]


def exact(x) -> sp.Expr:
    """Exact sympy number from an int, Fraction, float, string or sympy value."""
    if isinstance(x, sp.Basic):
        return x
    if isinstance(x, bool):
        raise TypeError("boolean is not a parameter value")
    if isinstance(x, int):
        return sp.Integer(x)
    if isinstance(x, Fraction):
        return sp.Rational(x.numerator, x.denominator)
    if isinstance(x, float):
        return sp.Rational(repr(x))
    if isinstance(x, str):
        return sp.nsimplify(sp.sympify(x, rational=True))
    raise TypeError(f"unsupported parameter value {x!r}")


@dataclass
class BoundResult:
    theorem: str
    alpha_max: sp.Expr | None = None
    case: str | None = None
    conditions: dict = field(default_factory=dict)
    holds: bool | None = None
    strict: bool = False

    @property
    def value(self) -> float | None:
        return None if self.alpha_max is None else float(self.alpha_max)

    def admits(self, alpha) -> bool:
        a = exact(alpha)
        if self.alpha_max is None:
            raise ValueError(f"{self.theorem} has no alpha bound")
        return bool(a < self.alpha_max) if self.strict else bool(a <= self.alpha_max)

    def as_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "alpha_max": None if self.alpha_max is None else float(self.alpha_max),
            "alpha_max_exact": None if self.alpha_max is None else str(self.alpha_max),
            "case": self.case,
            "conditions": {k: bool(v) for k, v in self.conditions.items()},
            "holds": self.holds,
        }


def _nonneg(name, v):
    if v < 0:
        raise ValueError(f"{name} must be >= 0, got {v}")


def _delta(v):
    if not (0 <= v < 1):
        raise ValueError(f"delta must lie in [0, 1), got {v}")


def _norm(name, v):
    if not (0 <= v <= 1):
        raise ValueError(f"{name} must lie in [0, 1], got {v}")


def _gamma(v):
    if v < 1:
        raise ValueError(f"gamma must be >= 1, got {v}")


def thm31(beta) -> BoundResult:
    """Becker-type univalence of the transform: ``|alpha| <= 1/(2(2+|beta|))``."""
    b = sp.Abs(exact(beta))
    return BoundResult("thm31", sp.nsimplify(1 / (2 * (2 + b))))


def thm34(beta, delta, alpha=None) -> BoundResult:
    """CHD shear: ``alpha (beta + 2(1-delta)) <= 3``."""
    b, d = exact(beta), exact(delta)
    _nonneg("beta", b)
    _delta(d)
    width = b + 2 * (1 - d)
    out = BoundResult("thm34", sp.nsimplify(3 / width))
    if alpha is not None:
        a = exact(alpha)
        out.conditions["alpha*(beta+2(1-delta)) <= 3"] = a * width <= 3
        out.holds = bool(a * width <= 3)
    return out


def thm37(beta, delta, w_norm, alpha=None) -> BoundResult:
    """Linearly connected image: ``alpha(beta+2(1-delta)) <= 2`` and
    ``alpha(1+beta)||w|| < 1/3``."""
    b, d, wn = exact(beta), exact(delta), exact(w_norm)
    _nonneg("beta", b)
    _delta(d)
    _norm("||w||", wn)
    first = 2 / (b + 2 * (1 - d))
    limits = [first]
    if wn > 0:
        limits.append(sp.Rational(1, 3) / ((1 + b) * wn))
    out = BoundResult("thm37", sp.nsimplify(sp.Min(*limits)))
    # the dilatation clause is strict, so only the first clause can be tight
    out.strict = len(limits) > 1 and limits[1] <= first
    if alpha is not None:
        a = exact(alpha)
        c1 = a * (b + 2 * (1 - d)) <= 2
        c2 = a * (1 + b) * wn < sp.Rational(1, 3)
        out.conditions = {"alpha*(beta+2(1-delta)) <= 2": c1, "alpha*(1+beta)*||w|| < 1/3": c2}
        out.holds = bool(c1 and c2)
    return out


def _lif_case(b, wn, ws):
    if b >= 1:
        return "beta>=1"
    lhs = b + 2 * (1 + b) * ws * (1 + wn)
    return "a" if lhs <= 2 * (1 - b) else "b"


def lif_univ(gamma, beta, w_norm, w_star) -> BoundResult:
    """Univalence of the shear for ``phi`` in a linearly invariant family of
    order ``gamma``, with the case split on ``beta``."""
    g, b, wn, ws = exact(gamma), exact(beta), exact(w_norm), exact(w_star)
    _gamma(g)
    _nonneg("beta", b)
    _norm("||w||", wn)
    _norm("||w*||", ws)
    case = _lif_case(b, wn, ws)
    if case == "a":
        denom = 4 * (2 * g + 1) * (1 - b) + (b + (1 + b) * ws * (1 + wn)) ** 2 + 4 * (1 - b**2) * ws
        amax = 4 * (1 - b) / denom
    else:
        amax = 1 / (2 * g + 2 * b + (1 + b) * ws * (1 + wn))
    return BoundResult("lif_univ", sp.nsimplify(amax), case=case)


def shu(beta, w_norm, w_star) -> BoundResult:
    """Stable univalence: ``alpha <= 1/(2(2+beta+(1+beta)||w*||(1+||w||)))``."""
    b, wn, ws = exact(beta), exact(w_norm), exact(w_star)
    _nonneg("beta", b)
    _norm("||w||", wn)
    _norm("||w*||", ws)
    return BoundResult("shu", sp.nsimplify(1 / (2 * (2 + b + (1 + b) * ws * (1 + wn)))))


def lif_shu(gamma, beta, w_norm, w_star) -> BoundResult:
    """Stable univalence for ``phi`` in a linearly invariant family."""
    g, b, wn, ws = exact(gamma), exact(beta), exact(w_norm), exact(w_star)
    _gamma(g)
    _nonneg("beta", b)
    _norm("||w||", wn)
    _norm("||w*||", ws)
    case = _lif_case(b, wn, ws)
    if case == "a":
        amax = 4 * (1 - b) / (4 * (2 * g + 1) * (1 - b) + (b + 2 * (1 + b) * ws * (1 + wn)) ** 2)
    else:
        amax = 1 / (2 * (g + b + (1 + b) * ws * (1 + wn)))
    return BoundResult("lif_shu", sp.nsimplify(amax), case=case)


def ctc(delta, beta, c, alpha=None) -> BoundResult:
    """Stable close-to-convexity via the pre-Schwarzian lower bound ``c``:
    ``alpha(1+beta) <= 1`` and ``alpha(2(1-delta)+beta) <= -2c``."""
    d, b, cc = exact(delta), exact(beta), exact(c)
    _delta(d)
    _nonneg("beta", b)
    if not (sp.Rational(-1, 2) < cc <= 0):
        raise ValueError(f"c must lie in (-1/2, 0], got {cc}")
    amax = sp.Min(1 / (1 + b), -2 * cc / (2 * (1 - d) + b))
    out = BoundResult("ctc", sp.nsimplify(amax))
    if alpha is not None:
        a = exact(alpha)
        c1 = a * (1 + b) <= 1
        c2 = a * (2 * (1 - d) + b) <= -2 * cc
        out.conditions = {"alpha*(1+beta) <= 1": c1, "alpha*(2(1-delta)+beta) <= -2c": c2}
        out.holds = bool(c1 and c2)
    return out


def shcc(beta) -> BoundResult:
    """Stable close-to-convexity from the arcsin estimate:
    ``alpha <= 1/((1+beta) sqrt 2)``."""
    b = exact(beta)
    _nonneg("beta", b)
    return BoundResult("shcc", sp.radsimp(1 / ((1 + b) * sp.sqrt(2))))


THEOREMS = {
    "thm31": thm31,
    "thm34": thm34,
    "thm37": thm37,
    "lif_univ": lif_univ,
    "shu": shu,
    "lif_shu": lif_shu,
    "ctc": ctc,
    "shcc": shcc,
}
