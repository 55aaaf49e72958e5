import cmath
import math

import pytest
import scipy.integrate
import scipy.special

from app.numerics.errors import ParameterPole, PoleHit
from app.numerics.special import (
    HypergeometricMethod,
    gamma_fn,
    gamma_ratio,
    gauss_2f1,
    gaussian_moment_integral,
    kummer_1f1,
    laplace_1f1_identity,
    radial_gaussian_integral,
    sphere_abs_moment,
    sphere_area,
)


@pytest.mark.parametrize(
    "a, b, z",
    [
        (0.5, 1.5, 0.3),
        (1.0, 0.5, 2.0),
        (1.5, 0.5, 12.0),
        (2.0, 1.5, -3.0),
        (0.5, 1.5, -25.0),
        (1.5, 2.5, 45.0),
        (-2.0, 0.5, -4.0),
    ],
)
def test_kummer_matches_scipy(a, b, z):
    result = kummer_1f1(a, b, z)
    expected = scipy.special.hyp1f1(a, b, z)
    assert result.value == pytest.approx(expected, rel=1e-9)
    assert result.est_error <= 1e-7 * abs(expected)


@pytest.mark.parametrize("a, b", [(0.5, 1.5), (1.5, 2.5), (0.25, 1.5)])
def test_kummer_large_argument_falls_back_to_series(a, b):
    # the omitted fourth asymptotic term is above 1e-10 relative at z = 200
    result = kummer_1f1(a, b, 200.0)
    expected = scipy.special.hyp1f1(a, b, 200.0)
    assert result.method is HypergeometricMethod.SERIES
    assert result.value == pytest.approx(expected, rel=1e-9)


def test_kummer_large_argument_keeps_exact_asymptotics():
    # (1 - a)_k vanishes for a = 1, so the expansion terminates
    result = kummer_1f1(1.0, 2.5, 200.0)
    assert result.method is HypergeometricMethod.ASYMPTOTIC
    assert result.value == pytest.approx(scipy.special.hyp1f1(1.0, 2.5, 200.0), rel=1e-9)


def test_kummer_trivial_arguments():
    assert kummer_1f1(1.3, 2.0, 0.0).value == 1.0
    assert kummer_1f1(0.0, 2.0, 5.0).value == 1.0


def test_kummer_negative_argument_uses_connection():
    assert kummer_1f1(0.5, 1.5, -10.0).method is HypergeometricMethod.CONNECTION


@pytest.mark.parametrize("b", [0.0, -1.0, -3.0])
def test_kummer_lower_parameter_pole(b):
    with pytest.raises(ParameterPole):
        kummer_1f1(1.0, b, 0.5)


@pytest.mark.parametrize(
    "a1, a2, b1, z",
    [
        (0.5, 1.0, 1.5, 0.4),
        (1.0, 1.5, 2.5, -0.5),
        (0.5, 2.0, 1.5, -4.0),
        (1.5, 0.5, 2.0, -20.0),
        (-2.0, 1.5, 2.5, -3.0),
    ],
)
def test_gauss_matches_scipy(a1, a2, b1, z):
    assert gauss_2f1(a1, a2, b1, z).value == pytest.approx(scipy.special.hyp2f1(a1, a2, b1, z), rel=1e-9)


def test_gauss_closed_form_when_parameters_cancel():
    assert gauss_2f1(0.7, 2.0, 2.0, -3.0).value == pytest.approx(4.0**-0.7, rel=1e-14)
    assert gauss_2f1(2.0, 0.7, 2.0, 0.5).value == pytest.approx(0.5**-0.7, rel=1e-14)


def test_gauss_domain_and_pole():
    with pytest.raises(ValueError):
        gauss_2f1(0.5, 0.5, 1.5, 1.0)
    with pytest.raises(ParameterPole):
        gauss_2f1(0.5, 0.5, -2.0, 0.3)


def test_gamma_functions():
    assert gamma_fn(5.0) == pytest.approx(24.0)
    assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi))
    assert gamma_fn(1.0 + 1.0j) == pytest.approx(complex(scipy.special.gamma(1.0 + 1.0j)))
    assert gamma_ratio(5.0, 3.0) == pytest.approx(12.0)
    assert gamma_ratio(200.5, 200.0) == pytest.approx(math.exp(math.lgamma(200.5) - math.lgamma(200.0)))
    for pole in (0.0, -1.0, -4.0):
        with pytest.raises(PoleHit):
            gamma_fn(pole)


@pytest.mark.parametrize("n, r", [(0.0, 0.0), (1.0, 1.5), (2.5, -2.0), (3.0, 4.0)])
def test_gaussian_moment_integral_matches_quadrature(n, r):
    expected, _ = scipy.integrate.quad(lambda s: s**n * math.exp(-s * s + r * s), 0.0, math.inf)
    assert gaussian_moment_integral(n, r) == pytest.approx(expected, rel=1e-8)


def test_gaussian_moment_integral_rejects_divergent_order():
    with pytest.raises(ValueError):
        gaussian_moment_integral(-1.0, 0.0)


@pytest.mark.parametrize("n, z", [(2.0, 0.5), (3.0, 2.0), (1.5, 1.0 + 0.5j)])
def test_radial_gaussian_integral(n, z):
    real, _ = scipy.integrate.quad(lambda r: (r ** (n - 1) * cmath.exp(-z * r * r)).real, 0.0, math.inf)
    imag, _ = scipy.integrate.quad(lambda r: (r ** (n - 1) * cmath.exp(-z * r * r)).imag, 0.0, math.inf)
    assert complex(radial_gaussian_integral(n, z)) == pytest.approx(complex(real, imag), rel=1e-8)


def test_radial_gaussian_integral_needs_decay():
    with pytest.raises(ValueError):
        radial_gaussian_integral(2.0, -1.0)


@pytest.mark.parametrize("a, b, alpha, c", [(0.5, 1.5, 1.0, 2.0), (1.0, 0.5, 0.5, 1.0), (1.5, 2.5, 2.0, 0.7)])
def test_laplace_identity_matches_quadrature(a, b, alpha, c):
    expected, _ = scipy.integrate.quad(
        lambda t: math.exp(-c * t) * t ** (alpha - 1.0) * scipy.special.hyp1f1(a, b, -t), 0.0, math.inf
    )
    assert laplace_1f1_identity(a, b, alpha, c) == pytest.approx(expected, rel=1e-6)


def test_sphere_measures():
    assert sphere_area(2) == pytest.approx(2.0 * math.pi)
    assert sphere_area(3) == pytest.approx(4.0 * math.pi)
    assert sphere_abs_moment(2, 0) == pytest.approx(sphere_area(2))
    assert sphere_abs_moment(2, 1) == pytest.approx(4.0)
    assert sphere_abs_moment(3, 1) == pytest.approx(2.0 * math.pi)
    assert sphere_abs_moment(3, 2) == pytest.approx(4.0 * math.pi / 3.0)
