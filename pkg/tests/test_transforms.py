from __future__ import annotations

import math

import numpy as np
import pytest

from geoshear.funcore import builtin, from_expr
from geoshear.transforms import (
    NormalizationError,
    PowerPrimitive,
    TransformSpec,
    c_beta,
    cesaro_integrand,
    cesaro_transform,
    hornich_add,
    i_alpha,
    j_alpha,
)
from geoshear.verify import disk_samples


def _points(n=20, radius=0.9, seed=5):
    return disk_samples(n, radius, seed)


def test_alpha_zero_is_identity():
    z = _points()
    for tag in ("koebe", "cayley"):
        f = cesaro_transform(TransformSpec(0, 0.7, 0.0, builtin(tag)))
        np.testing.assert_allclose(f(z), z, atol=1e-14)
    np.testing.assert_allclose(j_alpha(builtin("koebe"), 0)(z), z, atol=1e-14)
    np.testing.assert_allclose(i_alpha(builtin("koebe"), 0)(z), z, atol=1e-14)


def test_alexander_transform_of_koebe():
    assert j_alpha(builtin("koebe"), 1)(0.5) == pytest.approx(1.0, abs=1e-10)


def test_cayley_example_value():
    f = cesaro_transform(TransformSpec(0.2, 0.5, 0.0, builtin("cayley")))
    expected = (1 - 0.5**0.7) / 0.7
    assert f(0.5) == pytest.approx(expected, abs=1e-10)
    assert f(0.5).real == pytest.approx(0.549183, abs=1e-6)


def test_j_three_halves_of_twostrip():
    assert j_alpha(builtin("twostrip"), 1.5)(0.6) == pytest.approx(0.75, abs=1e-10)


def test_i_alpha_examples():
    z = _points()
    phi = builtin("koebe")
    np.testing.assert_allclose(i_alpha(phi, 1)(z), phi(z), atol=1e-9)
    assert i_alpha(builtin("cayley"), 2)(0.5) == pytest.approx(7 / 3, abs=1e-9)


def test_hornich_examples():
    z = _points()
    g = builtin("koebe")
    np.testing.assert_allclose(hornich_add(builtin("identity"), g)(z), g(z), atol=1e-9)
    c = builtin("cayley")
    assert hornich_add(c, c)(0.5) == pytest.approx(7 / 3, abs=1e-9)


def test_normalization_is_enforced():
    with pytest.raises(NormalizationError):
        cesaro_transform(TransformSpec(1, 0, 0.0, from_expr("2*z")))
    with pytest.raises(NormalizationError):
        i_alpha(from_expr("z+1"), 2)


@pytest.mark.parametrize("tag", ["koebe", "cayley", "twostrip"])
@pytest.mark.parametrize("alpha,beta", [(0.3, 0.5), (1.5, 0.0), (0.25 + 0.1j, 1.0)])
def test_hornich_decomposition(tag, alpha, beta):
    phi = builtin(tag)
    z = _points()
    lhs = cesaro_transform(TransformSpec(alpha, beta, 0.0, phi))(z)
    rhs = hornich_add(j_alpha(phi, alpha), i_alpha(builtin("logmap"), alpha * beta))(z)
    np.testing.assert_allclose(lhs, rhs, atol=1e-9)


@pytest.mark.parametrize("tag", ["koebe", "cayley"])
def test_composition_identity(tag):
    phi, alpha, beta = builtin(tag), 0.6, 0.5
    z = _points()
    lhs = cesaro_transform(TransformSpec(alpha, beta, 0.0, phi))(z)
    rhs = i_alpha(c_beta(phi, beta), alpha)(z)
    np.testing.assert_allclose(lhs, rhs, atol=1e-9)


def test_special_cases_coincide():
    phi, z = builtin("koebe"), _points()
    np.testing.assert_allclose(
        cesaro_transform(TransformSpec(0.4, 0.0, 0.0, phi))(z), j_alpha(phi, 0.4)(z), atol=1e-12)
    # the classical Cesaro transform: integral of phi(s)/(s(1-s))
    cesaro = cesaro_transform(TransformSpec(1, 1, 0.0, builtin("cayley")))
    # for cayley the integrand is (1-s)^-2
    np.testing.assert_allclose(cesaro(z), z / (1 - z), atol=1e-9)
    np.testing.assert_allclose(
        c_beta(phi, 1)(z), cesaro_transform(TransformSpec(1, 1, 0.0, phi))(z), atol=1e-12)


FIGURE_PARAMS = [
    ("cayley", 1 / 5, 1 / 2, lambda a, b: a * (1 + b)),
    ("identity", 1 / 14, 1, lambda a, b: a * b),
    ("koebe", 4 / 15, 1, lambda a, b: a * (2 + b)),
    ("cayley", 7 / 10, 1 / 100, lambda a, b: a * (1 + b)),
]


@pytest.mark.parametrize("tag,alpha,beta,exponent", FIGURE_PARAMS)
@pytest.mark.parametrize("theta", [0.0, 0.7, math.pi / 4])
def test_closed_forms(tag, alpha, beta, exponent, theta):
    z = disk_samples(100, 0.95, 1)
    numeric = cesaro_transform(TransformSpec(alpha, beta, theta, builtin(tag)))(z)
    closed = PowerPrimitive(exponent(alpha, beta), theta)(z)
    assert np.max(np.abs(numeric - closed)) <= 1e-9


def test_power_primitive_logarithmic_case():
    assert PowerPrimitive(1.0)(0.5) == pytest.approx(math.log(2))
    z = 0.3 + 0.2j
    d = PowerPrimitive(1.7, 0.4).derivative()
    assert d(z) == pytest.approx((1 - np.exp(0.4j) * z) ** -1.7, rel=1e-14)


def test_derivative_is_the_integrand():
    spec = TransformSpec(0.35, 0.8, 0.0, builtin("koebe"))
    f = cesaro_transform(spec)
    g = cesaro_integrand(spec.phi, spec.alpha, spec.beta)
    h = 1e-5
    for z in _points(10, 0.85):
        fd = (f(z + h) - f(z - h)) / (2 * h)
        assert abs(fd - g(z)) <= 1e-6 * abs(g(z))
        assert f.derivative()(z) == pytest.approx(g(z), rel=1e-14)


def test_rotated_derivative():
    theta, z = 0.9, 0.4 - 0.3j
    spec = TransformSpec(0.5, 0.5, theta, builtin("cayley"))
    f = cesaro_transform(spec)
    g = cesaro_integrand(spec.phi, spec.alpha, spec.beta)
    assert f.derivative()(z) == pytest.approx(g(np.exp(1j * theta) * z), rel=1e-14)


def test_non_integer_power_uses_continuous_branch():
    # (exp(4s))^(1/2) on the continuous branch has primitive (exp(2z) - 1)/2
    phi = from_expr("z*exp(4*z)")
    z = 0.95j
    val = j_alpha(phi, 0.5)(z)
    assert val == pytest.approx((np.exp(2 * z) - 1) / 2, abs=1e-10)


def test_error_estimate_is_reported():
    f = j_alpha(builtin("koebe"), 1)
    res = f.evaluate(0.5)
    assert res.value == pytest.approx(1.0, abs=1e-10)
    assert 0 <= res.error_estimate <= 1e-9 and res.nodes_used >= 15
    vals, errs = f.with_error(np.array([0.5, 0.9j]))
    assert np.all(errs <= 1e-9)
