from __future__ import annotations

import math

import numpy as np
import pytest

from geoshear.criteria import (
    CERTIFIED,
    INCONCLUSIVE,
    VIOLATED,
    CriticalPointError,
    DiskGrid,
    Params,
    arcsin_bound,
    becker_analytic_functional,
    becker_harmonic_functional,
    becker_necessity_checker,
    becker_sufficient_checker,
    convexity_checker,
    convexity_functional,
    ctc_arc_integral,
    lemma_b_check,
    lemma_e_form,
    lemma_e_scan,
    norm_hyperbolic,
    norm_sup,
    pre_schwarzian_analytic,
    pre_schwarzian_harmonic,
    stable_sweep,
    sup_functional,
    univalence_necessity_functional,
)
from geoshear.funcore import Const, DivZ, DomainError, Product, Sum, builtin, from_expr
from geoshear.shear import HarmonicMap, build_F, shear_solve
from geoshear.transforms import TransformSpec, cesaro_transform
from geoshear.verify import disk_samples

SMALL = DiskGrid(60, 128)


def test_params_validation():
    Params(alpha=0.2, beta=0.5, delta=0.5, c=-0.4)
    for bad in (dict(alpha=-1), dict(beta=-0.5), dict(delta=1), dict(gamma=0.5),
                dict(c=-0.5), dict(c=0.1), dict(lam=0.5)):
        with pytest.raises(ValueError):
            Params(**bad)
    p = Params(alpha=2, beta=-0.5, allow_out_of_range=True)
    assert p.out_of_range == ["beta"]


def test_grid_layout():
    g = DiskGrid(5, 8, r_max=0.99)
    assert g.radii[0] == 0 and g.radii[-1] == pytest.approx(0.99)
    assert np.all(np.diff(g.radii) > 0)
    pts = g.points()
    assert pts.shape == (40,)
    assert pts[8] == pytest.approx(g.radii[1])
    with pytest.raises(ValueError):
        DiskGrid(r_max=1.0)


@pytest.mark.parametrize("tag,expected", [("identity", 0), ("koebe", 4), ("cayley", 2)])
def test_pre_schwarzian_at_origin(tag, expected):
    assert pre_schwarzian_analytic(builtin(tag), 0) == pytest.approx(expected, abs=1e-14)


def test_pre_schwarzian_critical_point():
    with pytest.raises(CriticalPointError):
        pre_schwarzian_analytic(from_expr("z+z^2/2"), -1 + 0j)


def test_harmonic_pre_schwarzian_reduces_to_analytic():
    h = builtin("koebe")
    z = disk_samples(10, 0.9, 0)
    s = HarmonicMap(h, Product(Const(0.0), h), omega=Const(0.0))
    np.testing.assert_allclose(pre_schwarzian_harmonic(s, z), pre_schwarzian_analytic(h, z), rtol=1e-14)
    # constant dilatation: the second term vanishes
    s = shear_solve(h, Const(0.4))
    np.testing.assert_allclose(pre_schwarzian_harmonic(s, z), pre_schwarzian_analytic(s.h, z), rtol=1e-12)


def test_harmonic_pre_schwarzian_affine_invariance():
    # f + a conj(f) = (h + a g) + conj(g + conj(a) h)
    s = build_F(TransformSpec(0.2, 0.5, 0.0, builtin("cayley")), from_expr("z/2"))
    a = 0.3 + 0.1j
    h1 = Sum(s.h, Product(Const(a), s.g))
    g1 = Sum(s.g, Product(Const(np.conj(a)), s.h))
    t = HarmonicMap(h1, g1)
    z = disk_samples(20, 0.9, 1)
    np.testing.assert_allclose(pre_schwarzian_harmonic(t, z), pre_schwarzian_harmonic(s, z), atol=1e-9)


def test_becker_functionals():
    z = disk_samples(20, 0.9, 2)
    ident = HarmonicMap(builtin("identity"), Product(Const(0.0), builtin("identity")), Const(0.0))
    np.testing.assert_allclose(becker_harmonic_functional(ident, z), 0, atol=1e-15)
    np.testing.assert_allclose(becker_analytic_functional(builtin("identity"), z), 0, atol=1e-15)
    # h''/h' = 2/(1-z) for cayley: with the z factor 0.75 * 1 / 0.5, without it 0.75 * 2 / 0.5
    assert becker_analytic_functional(builtin("cayley"), 0.5) == pytest.approx(1.5, abs=1e-14)
    assert univalence_necessity_functional(builtin("cayley"), 0.5) == pytest.approx(3.0, abs=1e-14)


@pytest.mark.parametrize("w", ["z/2", "-z", "(2*z+1)/(2+z)", "0.3*z^2"])
def test_becker_harmonic_vanishes_at_origin(w):
    s = build_F(TransformSpec(0.2, 0.5, 0.0, builtin("koebe")), from_expr(w))
    assert becker_harmonic_functional(s, 0) == 0


def test_sup_functional_semantics():
    rep = sup_functional(lambda z: np.zeros(np.shape(z)), SMALL)
    assert rep.sup_value == 0 and rep.verdict == INCONCLUSIVE
    rep = sup_functional(lambda z: np.abs(z), SMALL, bound=1.01)
    assert rep.sup_value == pytest.approx(0.999) and rep.verdict == CERTIFIED
    rep = sup_functional(lambda z: np.abs(z), SMALL, bound=0.9)
    assert rep.verdict == VIOLATED and rep.witnesses
    rep = sup_functional(lambda z: np.abs(z), SMALL, bound=0.9995)
    assert rep.verdict == INCONCLUSIVE
    rep = sup_functional(lambda z: np.real(z), SMALL, bound=-2, sense="min")
    assert rep.sup_value == pytest.approx(-0.999) and rep.verdict == CERTIFIED


def test_sup_functional_refines_between_grid_points():
    coarse = DiskGrid(10, 7, r_max=0.9, refinement=0)
    fine = DiskGrid(10, 7, r_max=0.9, refinement=2)
    f = lambda z: np.real(z * np.exp(-0.2j))  # noqa: E731
    assert sup_functional(f, fine).sup_value > sup_functional(f, coarse).sup_value


def test_sup_functional_skips_failures():
    def f(z):
        z = np.asarray(z)
        if z.ndim and np.any(np.abs(z) > 0.5):
            raise ArithmeticError("boom")
        if not z.ndim and abs(z) > 0.5:
            raise ArithmeticError("boom")
        return np.abs(z)

    rep = sup_functional(f, SMALL)
    assert rep.sup_value <= 0.5 and rep.notes


def test_norms():
    w = from_expr("z/2")
    assert norm_sup(w) == pytest.approx(0.5, abs=1e-3)
    assert norm_hyperbolic(w) == pytest.approx(0.5, abs=1e-6)
    assert norm_hyperbolic(builtin("identity")) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DomainError):
        norm_hyperbolic(from_expr("2*z"))
    with pytest.raises(DomainError):
        norm_sup(from_expr("z+0.5"))


def _blaschke_text(zeros, rotation):
    def c(a):
        return f"({float(a.real)!r}+({float(a.imag)!r})*i)"

    factors = [f"(z-{c(a)})/(1-{c(np.conj(a))}*z)" for a in zeros]
    return f"{c(np.exp(1j * rotation))}*" + "*".join(factors)


def test_schwarz_pick_on_random_self_maps():
    rng = np.random.default_rng(42)
    for _ in range(50):
        k = int(rng.integers(1, 4))
        zeros = 0.9 * np.sqrt(rng.random(k)) * np.exp(2j * np.pi * rng.random(k))
        w = from_expr(_blaschke_text(zeros, rng.uniform(0, 2 * np.pi)))
        if rng.random() < 0.5:
            w = Product(Const(rng.uniform(0.2, 1.0)), w)
        assert norm_hyperbolic(w, SMALL) <= 1 + 1e-9


@pytest.mark.parametrize("tag", ["identity", "cayley", "koebe", "twostrip"])
def test_linear_invariance_order_of_univalent_families(tag):
    # (1-|z|^2) |z phi'/phi| <= 2 gamma with gamma = 2
    phi = builtin(tag)
    q = DivZ(phi)
    rep = sup_functional(lambda z: (1 - np.abs(z) ** 2) * np.abs(phi.derivative()(z) / q(z)),
                         DiskGrid(), bound=4.0, slack=0.0)
    assert rep.sup_value <= 4.0


def test_lemma_e_form_identity():
    x = np.linspace(-0.99, 0.99, 50)
    np.testing.assert_allclose(lemma_e_form(builtin("identity"), 0, np.pi / 2, x), 1 + x**2, atol=1e-14)


def test_lemma_e_form_is_periodic_in_mu():
    phi = builtin("koebe")
    z = disk_samples(30, 0.9, 3)
    for mu in (0.3, 1.7, 4.0):
        np.testing.assert_allclose(lemma_e_form(phi, mu, 0.8, z),
                                   lemma_e_form(phi, mu + 2 * np.pi, 0.8, z), atol=1e-9)


def test_lemma_e_scan_on_convex_function():
    rep = lemma_e_scan(builtin("cayley"), SMALL, mu_count=8, nu_count=5)
    assert rep.verdict == CERTIFIED and rep.sup_value >= 0


def test_ctc_arc_integral_and_arcsin_bound():
    assert ctc_arc_integral(builtin("identity"), 0.7, 0.2, 2.5) == pytest.approx(2.3, abs=1e-12)
    # Re[1+zh''/h'] for koebe integrates to 2 pi over the full circle
    assert ctc_arc_integral(builtin("koebe"), 0.9, 0, 2 * np.pi) == pytest.approx(2 * np.pi, abs=1e-9)
    assert arcsin_bound(1, 1 / math.sqrt(2), 0) == pytest.approx(math.pi / 2)
    assert arcsin_bound(0.8, 0, 3) == 0
    assert arcsin_bound(1, 0.25, 1) == pytest.approx(math.pi / 3, abs=1e-15)
    with pytest.raises(ValueError):
        arcsin_bound(1, 1, 1)


def test_lemma_b():
    s = HarmonicMap(builtin("cayley"), Product(Const(0.0), builtin("cayley")), Const(0.0))
    assert lemma_b_check(s, 0.0, SMALL).verdict == CERTIFIED
    c = -0.3
    s = shear_solve(builtin("cayley"), Const(math.cos(math.pi * abs(c))))
    rep = lemma_b_check(s, c, SMALL)
    assert rep.verdict == VIOLATED
    assert rep.witnesses[0]["clause"] == "dilatation"


def test_lemma_b_dilatation_clause_for_scaled_generator():
    c = -0.4
    w = Product(Const(math.cos(math.pi * c) / 2), builtin("identity"))
    s = build_F(TransformSpec(4 / 15, 1, 0.0, builtin("koebe")), w)
    rep = lemma_b_check(s, c, SMALL)
    assert rep.sup_value < math.cos(math.pi * abs(c))
    assert rep.verdict == CERTIFIED


def test_stable_sweep_with_zero_coanalytic_part():
    h = builtin("cayley")
    s = shear_solve(h, Const(0.0))
    rep = stable_sweep(s, convexity_checker(SMALL), lambda_count=4)
    assert rep.verdict == CERTIFIED
    assert rep.sup_value == pytest.approx((1 - 0.999) / (1 + 0.999), rel=1e-9)


def test_stable_sweep_finds_counterexample():
    s = build_F(TransformSpec(1, 1, 0.0, builtin("cayley")), from_expr("z/2"))
    rep = stable_sweep(s, convexity_checker(SMALL), lambda_count=8)
    assert rep.verdict == VIOLATED
    assert rep.witnesses[0]["lambda"] == 1


def test_checkers():
    s = shear_solve(builtin("identity"), Const(0.0))
    assert stable_sweep(s, becker_sufficient_checker(SMALL), 2).verdict == CERTIFIED
    assert stable_sweep(s, becker_necessity_checker(SMALL), 2).verdict == INCONCLUSIVE


@pytest.mark.parametrize("tag,delta,alpha,beta,theta", [
    ("cayley", 0.5, 1.0, 1.0, 0.0),
    ("cayley", 0.5, 0.5, 2.0, 0.7),
    ("koebe", 0.0, 0.5, 2.0, 0.0),
    ("koebe", 0.0, 2 / 3, 1.0, 1.3),
])
def test_transform_is_convex_under_linear_connectivity_premise(tag, delta, alpha, beta, theta):
    assert alpha * (beta + 2 * (1 - delta)) <= 2 + 1e-12
    f = cesaro_transform(TransformSpec(alpha, beta, theta, builtin(tag)))
    rep = sup_functional(lambda z: convexity_functional(f, z), DiskGrid(), sense="min")
    assert rep.sup_value >= -1e-9

