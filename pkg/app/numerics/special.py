"""
Scalar special functions used by the bound constants.

Kummer's 1F1 is summed as a Taylor series up to a crossover argument and by
its large-argument expansion beyond it; negative arguments go through
Kummer's transformation. Gauss' 2F1 on the negative real axis is reduced to
the unit disk with the Pfaff transformation, and to a neighbourhood of w = 0
with the 1 - w connection formula when the Pfaff argument approaches 1.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np
import scipy.special

from app.numerics.errors import ParameterPole, PoleHit, SeriesNotConverged

logger = logging.getLogger(__name__)

# For z > BIG_Z the three-term asymptotic expansion is tried first. It is kept
# only when the first omitted term is below TARGET_REL_ERROR, or when z > OVERFLOW_Z
# where e^z overflows the series; otherwise the convergent series is summed.
BIG_Z = 30.0
OVERFLOW_Z = 700.0
ASYMPTOTIC_TERMS = 3
TARGET_REL_ERROR = 1e-10
MAX_SERIES_TERMS = 20_000
MAX_2F1_TERMS = 4_000_000
PFAFF_DIRECT_LIMIT = 0.75

_EPS = np.finfo(float).eps


class HypergeometricMethod(str, Enum):
    SERIES = "series"
    CONNECTION = "connection"
    ASYMPTOTIC = "asymptotic"


@dataclass(frozen=True)
class HypergeometricResult:
    """Value of a hypergeometric function together with an error estimate."""
    value: float
    est_error: float
    method: HypergeometricMethod

    def __float__(self) -> float:
        return float(self.value)

    @property
    def rel_error(self) -> float:
        return self.est_error / abs(self.value) if self.value != 0.0 else self.est_error


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0.0 and float(x).is_integer()


def gamma_fn(z):
    """
    Gamma function, real or complex argument.

    Raises:
        PoleHit: z is a non-positive integer
    """
    if np.iscomplexobj(z):
        z = complex(z)
        if z.imag == 0.0 and _is_nonpositive_integer(z.real):
            raise PoleHit(f"Gamma has a pole at {z}")
        return complex(scipy.special.gamma(z))
    z = float(z)
    if _is_nonpositive_integer(z):
        raise PoleHit(f"Gamma has a pole at {z}")
    return float(scipy.special.gamma(z))


def gamma_ratio(numerator: float, denominator: float) -> float:
    """Gamma(numerator)/Gamma(denominator) evaluated in log space."""
    sign = scipy.special.gammasgn(numerator) * scipy.special.gammasgn(denominator)
    return float(sign * math.exp(scipy.special.gammaln(numerator) - scipy.special.gammaln(denominator)))


# Kummer 1F1


def _kummer_series(a: float, b: float, z: float) -> Tuple[float, float]:
    term = 1.0
    total = 1.0
    magnitude = 1.0
    for k in range(MAX_SERIES_TERMS):
        term *= (a + k) / (b + k) * z / (k + 1)
        total += term
        magnitude += abs(term)
        if term == 0.0:
            return total, 2.0 * _EPS * magnitude
        if k + 1 > abs(z) and abs(term) <= _EPS * abs(total):
            return total, abs(term) + 2.0 * (k + 1) ** 0.5 * _EPS * magnitude
    raise SeriesNotConverged(f"1F1({a}; {b}; {z}) series did not converge in {MAX_SERIES_TERMS} terms")


def _kummer_asymptotic(a: float, b: float, z: float) -> Tuple[float, float, float, float]:
    """
    Large-z expansion Gamma(b)/Gamma(a) e^z z^(a-b) sum_k (b-a)_k (1-a)_k / (k! z^k).

    Returns (log_scale, sign, series, series_error) with
    value = sign * exp(z + log_scale) * series.
    """
    log_scale = (a - b) * math.log(z) + scipy.special.gammaln(b) - scipy.special.gammaln(a)
    sign = float(scipy.special.gammasgn(b) * scipy.special.gammasgn(a))
    term = 1.0
    series = 1.0
    for k in range(ASYMPTOTIC_TERMS):
        term *= (b - a + k) * (1.0 - a + k) / ((k + 1) * z)
        series += term
    next_term = term * (b - a + ASYMPTOTIC_TERMS) * (1.0 - a + ASYMPTOTIC_TERMS) / ((ASYMPTOTIC_TERMS + 1) * z)
    return log_scale, sign, series, abs(next_term) + _EPS * abs(series)


def _kummer_positive(a: float, b: float, z: float, shift: float = 0.0) -> HypergeometricResult:
    """
    exp(shift) * 1F1(a; b; z) for z > 0.

    The shift lets Kummer's transformation cancel the exponential growth
    before it is formed.
    """
    terminating = _is_nonpositive_integer(a)
    if z > BIG_Z and not terminating:
        log_scale, sign, series, error = _kummer_asymptotic(a, b, z)
        rel = error / abs(series)
        if rel <= TARGET_REL_ERROR or z > OVERFLOW_Z:
            scale = sign * math.exp(z + shift + log_scale)
            return HypergeometricResult(scale * series, abs(scale) * error, HypergeometricMethod.ASYMPTOTIC)
        logger.debug(f"1F1({a}; {b}; {z}): asymptotic estimate {rel:.1e} above target, summing series")
    total, error = _kummer_series(a, b, z)
    scale = math.exp(shift)
    return HypergeometricResult(scale * total, scale * error, HypergeometricMethod.SERIES)


def kummer_1f1(a: float, b: float, z: float) -> HypergeometricResult:
    """
    Kummer's confluent hypergeometric function 1F1(a; b; z) for real arguments.

    Args:
        a: Upper parameter
        b: Lower parameter, not a non-positive integer
        z: Argument; negative values use Kummer's transformation

    Returns:
        HypergeometricResult with value, error estimate and evaluation route

    Raises:
        ParameterPole: b is a non-positive integer
    """
    a = float(a)
    b = float(b)
    z = float(z)
    if _is_nonpositive_integer(b):
        raise ParameterPole(f"1F1 lower parameter b={b} is a non-positive integer")
    if z == 0.0 or a == 0.0:
        return HypergeometricResult(1.0, 0.0, HypergeometricMethod.SERIES)
    if z > 0.0:
        return _kummer_positive(a, b, z)
    if _is_nonpositive_integer(a):
        total, error = _kummer_series(a, b, z)
        return HypergeometricResult(total, error, HypergeometricMethod.SERIES)
    # 1F1(a; b; z) = e^z 1F1(b - a; b; -z)
    inner = _kummer_positive(b - a, b, -z, shift=z)
    return HypergeometricResult(inner.value, inner.est_error, HypergeometricMethod.CONNECTION)


# Gauss 2F1


def _gauss_series(a1: float, a2: float, b1: float, w: float) -> Tuple[float, float]:
    """Direct series for 0 <= w < 1, summed in vectorised blocks."""
    if w == 0.0:
        return 1.0, 0.0
    total = 1.0
    magnitude = 1.0
    term = 1.0
    start = 0
    block = 512
    while start < MAX_2F1_TERMS:
        k = np.arange(start, start + block, dtype=float)
        ratios = (a1 + k) * (a2 + k) / ((b1 + k) * (k + 1.0)) * w
        terms = term * np.cumprod(ratios)
        total += float(np.sum(terms))
        magnitude += float(np.sum(np.abs(terms)))
        term = float(terms[-1])
        if term == 0.0:
            return total, 2.0 * _EPS * magnitude
        tail_ratio = abs(ratios[-1])
        if tail_ratio < 1.0 and abs(term) / (1.0 - tail_ratio) <= 0.25 * _EPS * abs(total):
            return total, abs(term) / (1.0 - tail_ratio) + 2.0 * _EPS * magnitude
        start += block
        block = min(block * 2, 65_536)
    raise SeriesNotConverged(f"2F1({a1}, {a2}; {b1}; {w}) series did not converge")


def _terminates(*parameters: float) -> bool:
    return any(_is_nonpositive_integer(p) for p in parameters)


def _gauss_near_one(a: float, b: float, c: float, w: float) -> Tuple[float, float]:
    """
    2F1(a, b; c; w) for w close to 1 through the 1 - w connection formula.

    Requires c - a - b not an integer.
    """
    s = c - a - b
    v = 1.0 - w
    first, first_err = _gauss_series(a, b, 1.0 - s, v)
    second, second_err = _gauss_series(c - a, c - b, 1.0 + s, v)
    gamma_c = scipy.special.gamma(c)
    coeff1 = gamma_c * scipy.special.gamma(s) * scipy.special.rgamma(c - a) * scipy.special.rgamma(c - b)
    coeff2 = gamma_c * scipy.special.gamma(-s) * scipy.special.rgamma(a) * scipy.special.rgamma(b) * v**s
    value = coeff1 * first + coeff2 * second
    error = abs(coeff1) * first_err + abs(coeff2) * second_err + 4.0 * _EPS * (abs(coeff1 * first) + abs(coeff2 * second))
    return float(value), float(error)


def _gauss_unit_interval(a: float, b: float, c: float, w: float) -> Tuple[float, float, HypergeometricMethod]:
    if w <= PFAFF_DIRECT_LIMIT or _terminates(a, b):
        value, error = _gauss_series(a, b, c, w)
        return value, error, HypergeometricMethod.SERIES
    if not float(c - a - b).is_integer():
        value, error = _gauss_near_one(a, b, c, w)
        return value, error, HypergeometricMethod.CONNECTION
    value, error = _gauss_series(a, b, c, w)
    return value, error, HypergeometricMethod.SERIES


def gauss_2f1(a1: float, a2: float, b1: float, z: float) -> HypergeometricResult:
    """
    Gauss hypergeometric function 2F1(a1, a2; b1; z) for real z < 1.

    Negative arguments are mapped to w = z/(z - 1) in [0, 1) by the Pfaff
    transformation 2F1(a1, a2; b1; z) = (1 - z)^(-a1) 2F1(a1, b1 - a2; b1; w).

    Raises:
        ParameterPole: b1 is a non-positive integer
    """
    a1 = float(a1)
    a2 = float(a2)
    b1 = float(b1)
    z = float(z)
    if _is_nonpositive_integer(b1):
        raise ParameterPole(f"2F1 lower parameter b1={b1} is a non-positive integer")
    if z >= 1.0:
        raise ValueError(f"2F1 is only evaluated for z < 1, got {z}")
    if z == 0.0 or a1 == 0.0 or a2 == 0.0:
        return HypergeometricResult(1.0, 0.0, HypergeometricMethod.SERIES)

    # 2F1(a, b; b; z) = (1 - z)^(-a)
    if a2 == b1 or a1 == b1:
        exponent = a1 if a2 == b1 else a2
        value = (1.0 - z) ** (-exponent)
        return HypergeometricResult(value, 2.0 * _EPS * abs(value), HypergeometricMethod.CONNECTION)

    if z > 0.0 or _terminates(a1, a2):
        value, error = _gauss_series(a1, a2, b1, z) if z > 0.0 else _gauss_polynomial(a1, a2, b1, z)
        return HypergeometricResult(value, error, HypergeometricMethod.SERIES)

    w = z / (z - 1.0)
    candidates = ((a1, b1 - a2), (a2, b1 - a1))
    # Prefer a Pfaff image that terminates
    upper, other = next(
        (pair for pair in candidates if _terminates(*pair)),
        candidates[0],
    )
    prefactor = (1.0 - z) ** (-upper)
    inner, inner_err, method = _gauss_unit_interval(upper, other, b1, w)
    if method is HypergeometricMethod.SERIES:
        method = HypergeometricMethod.CONNECTION
    return HypergeometricResult(prefactor * inner, abs(prefactor) * inner_err, method)


def _gauss_polynomial(a1: float, a2: float, b1: float, z: float) -> Tuple[float, float]:
    """Terminating series for a non-positive integer upper parameter."""
    order = int(-min(p for p in (a1, a2) if _is_nonpositive_integer(p)))
    term = 1.0
    total = 1.0
    magnitude = 1.0
    for k in range(order):
        term *= (a1 + k) * (a2 + k) / ((b1 + k) * (k + 1)) * z
        total += term
        magnitude += abs(term)
    return total, 2.0 * (order + 1) * _EPS * magnitude


# Gaussian integrals


def gaussian_moment_integral(n: float, r: float) -> float:
    """
    Closed form of the integral of s^n exp(-s^2 + r s) over s in [0, inf).

    (1/2) Gamma((n+1)/2) 1F1((n+1)/2; 1/2; r^2/4)
        + (r/2) Gamma(n/2 + 1) 1F1(n/2 + 1; 3/2; r^2/4)
    """
    if n <= -1.0:
        raise ValueError(f"Moment order must exceed -1, got {n}")
    z = r * r / 4.0
    even = 0.5 * gamma_fn((n + 1.0) / 2.0) * kummer_1f1((n + 1.0) / 2.0, 0.5, z).value
    odd = 0.5 * r * gamma_fn(n / 2.0 + 1.0) * kummer_1f1(n / 2.0 + 1.0, 1.5, z).value
    return even + odd


def radial_gaussian_integral(n: float, z: complex) -> complex:
    """
    Integral of r^(n-1) exp(-z r^2) over r in [0, inf) for Re z > 0.

    Equals (1/2) Gamma(n/2) z^(-n/2) on the principal branch.
    """
    if n <= 0.0:
        raise ValueError(f"Radial exponent must be positive, got {n}")
    z = complex(z)
    if z.real <= 0.0:
        raise ValueError(f"Re z must be positive, got {z}")
    value = 0.5 * gamma_fn(n / 2.0) * np.exp(-(n / 2.0) * np.log(z))
    return complex(value) if z.imag != 0.0 else float(value.real)


def laplace_1f1_identity(a: float, b: float, alpha: float, c: float) -> float:
    """
    Closed form c^(-alpha) Gamma(alpha) 2F1(a, alpha; b; -1/c) of the Laplace
    transform of t^(alpha-1) 1F1(a; b; -t) at c > 0.
    """
    if c <= 0.0 or alpha <= 0.0:
        raise ValueError(f"Need c > 0 and alpha > 0, got c={c}, alpha={alpha}")
    return c ** (-alpha) * gamma_fn(alpha) * gauss_2f1(a, alpha, b, -1.0 / c).value


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def sphere_abs_moment(d: int, first: int, second: int = 0) -> float:
    """
    Integral of |w_1|^first |w_2|^second over the unit sphere in R^d.
    """
    half = 0.5
    value = 2.0 * math.gamma((first + 1) * half) * math.gamma((second + 1) * half)
    value *= math.gamma(half) ** (d - 2)
    return value / math.gamma((first + second + d) * half)
