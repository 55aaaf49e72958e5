"""
Closed-form bound constants C1..C8 and the growth bound (omega, M) of the semigroup.

All constants are built from the spectral quantities of a system: kappa = cond(Y),
a1 = a_max^2/(a_min a0), nu = a_max^2 eta^2 p^2 / a0 and b0.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Literal, Optional, Sequence

import numpy as np
import scipy.integrate

from app.numerics.errors import HypothesisViolated
from app.numerics.linalg import SpectralQuantities
from app.numerics.special import gamma_ratio, gauss_2f1, kummer_1f1

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.1
SAFETY_FACTOR = 1.05

OmegaMode = Literal["lp_weighted", "cb_unweighted"]


def _f11(a: float, b: float, z: float) -> float:
    return kummer_1f1(a, b, z).value


def bracket(level: int, d: int, nu_t: float, a1: float = 1.0, delta_ij: int = 0) -> float:
    """
    Square bracket of C1 (level 1), C2 (level 2) or C3 (level 3) at nu*t.
    """
    root = math.sqrt(nu_t)
    if level == 1:
        return _f11(d / 2, 0.5, nu_t) + 2.0 * gamma_ratio((d + 1) / 2, d / 2) * root * _f11((d + 1) / 2, 1.5, nu_t)
    if level == 2:
        return gamma_ratio((d + 1) / 2, d / 2) * _f11((d + 1) / 2, 0.5, nu_t) + 2.0 * gamma_ratio(
            (d + 2) / 2, d / 2
        ) * root * _f11((d + 2) / 2, 1.5, nu_t)
    if level == 3:
        value = gamma_ratio((d + 2) / 2, d / 2) * _f11((d + 2) / 2, 0.5, nu_t) + 2.0 * gamma_ratio(
            (d + 3) / 2, d / 2
        ) * root * _f11((d + 3) / 2, 1.5, nu_t)
        if delta_ij:
            value += 0.5 / a1 * _f11(d / 2, 0.5, nu_t)
            value += gamma_ratio((d + 1) / 2, d / 2) / a1 * root * _f11((d + 1) / 2, 1.5, nu_t)
        return value
    raise ValueError(f"Bracket level must be 1, 2 or 3, got {level}")


def _prefactor(order: int, sq: SpectralQuantities, t: float) -> float:
    """kappa a1^((d+order)/2) e^(-b0 t) (t a_min)^(-order/2)."""
    return (
        sq.kappa
        * sq.a1 ** ((sq.d + order) / 2.0)
        * math.exp(-sq.b0 * t)
        * (t * sq.a_min) ** (-order / 2.0)
    )


def bound_C(
    level: int,
    sq: SpectralQuantities,
    t: float,
    p: Optional[float] = None,
    C_theta: float = 1.0,
    delta_ij: int = 0,
) -> float:
    """
    Evaluate C_level(t) for level 1..6.

    Levels 1-3 bound the weighted L1 norms of K, K^i and K^{ji}; levels 4-6
    bound T(t) and its first and second derivatives in the weighted L^p norm.
    p = inf is evaluated with exponent 1. nu is taken from sq.

    Args:
        level: 1..6
        sq: Spectral quantities carrying eta and p
        t: Time, t > 0
        p: Norm exponent for levels 4-6 (defaults to sq.p)
        C_theta: Weight constant for levels 4-6
        delta_ij: 1 when i == j for levels 3 and 6
    """
    if not t > 0.0:
        raise ValueError(f"Bound constants need t > 0, got {t}")
    if level not in range(1, 7):
        raise ValueError(f"Bound level must lie in 1..6, got {level}")
    order = (level - 1) % 3
    value = bracket(order + 1, sq.d, sq.nu * t, sq.a1, delta_ij)
    if level <= 3:
        return _prefactor(order, sq, t) * value
    exponent = sq.p if p is None else p
    if math.isinf(exponent):
        exponent = 1.0
    return C_theta * _prefactor(order, sq, t) * value ** (1.0 / exponent)


def bound_C78(sq: SpectralQuantities, p: float, C_theta: float, vartheta: float) -> Dict[str, float]:
    """
    Laplace-in-time constants C7 and C8.

    They depend on the system and on vartheta only, never on lambda or eta.
    """
    if not 0.0 < vartheta < 1.0:
        raise ValueError(f"vartheta must lie in (0, 1), got {vartheta}")
    if math.isinf(p):
        p = 1.0
    d = sq.d
    ratio = vartheta / (1.0 - vartheta)
    inflation = 1.0 / (1.0 - vartheta)

    seven = gauss_2f1(-(d - 1) / 2, 1.0, 0.5, -ratio).value + math.sqrt(math.pi) * gamma_ratio(
        (d + 1) / 2, d / 2
    ) * math.sqrt(ratio) * gauss_2f1(-(d - 2) / 2, 1.5, 1.5, -ratio).value
    C7 = C_theta * sq.kappa * sq.a1 ** (d / 2) * inflation ** (1.0 / p) * seven ** (1.0 / p)

    eight = gamma_ratio((d + 1) / 2, d / 2) * gauss_2f1(-d / 2, 0.5, 0.5, -ratio).value + 2.0 * gamma_ratio(
        (d + 2) / 2, d / 2
    ) / math.sqrt(math.pi) * math.sqrt(ratio) * gauss_2f1(-(d - 1) / 2, 1.0, 1.5, -ratio).value
    C8 = (
        C_theta
        * sq.kappa
        * sq.a1 ** ((d + 1) / 2)
        * math.sqrt(math.pi / sq.a_min)
        * inflation ** (1.0 / (2.0 * p))
        * eight ** (1.0 / p)
    )
    return {"C7": float(C7), "C8": float(C8)}


@dataclass(frozen=True)
class BoundConstants:
    """
    Evaluator for C1..C8 with fixed parameters.

    Attributes:
        sq: Spectral quantities (eta and p fixed inside)
        C_theta: Weight constant
        vartheta: Fraction of the spectral margin available to the weight, in (0, 1)
        delta_ij: 1 for diagonal second derivatives
    """
    sq: SpectralQuantities
    C_theta: float = 1.0
    vartheta: float = 0.5
    delta_ij: int = 0

    def C(self, level: int, t: float) -> float:
        return bound_C(level, self.sq, t, self.sq.p, self.C_theta, self.delta_ij)

    def __call__(self, level: int, t: float) -> float:
        return self.C(level, t)

    @property
    def C7(self) -> float:
        return bound_C78(self.sq, self.sq.p, self.C_theta, self.vartheta)["C7"]

    @property
    def C8(self) -> float:
        return bound_C78(self.sq, self.sq.p, self.C_theta, self.vartheta)["C8"]

    def row(self, t: float) -> List[float]:
        return [float(t)] + [self.C(level, t) for level in range(1, 7)]


def bound_table(sq: SpectralQuantities, ts: Sequence[float], C_theta: float = 1.0, delta_ij: int = 0) -> List[List[float]]:
    """Rows t, C1..C6 for CSV export."""
    constants = BoundConstants(sq=sq, C_theta=C_theta, delta_ij=delta_ij)
    return [constants.row(t) for t in ts]


def admissible_eta_squared(sq: SpectralQuantities, re_lambda: float, omega: float, vartheta: float) -> float:
    """Largest eta^2 allowed by vartheta a0 (Re lambda - omega) / (a_max^2 p^2)."""
    return vartheta * sq.a0 * (re_lambda - omega) / (sq.a_max**2 * sq.p**2)


def improper_integral_check(
    sq: SpectralQuantities,
    C_theta: float,
    vartheta: float,
    re_lambda: float,
    omega: float,
) -> Dict[str, float]:
    """
    Integrate e^{-Re lambda t} C4(t) and e^{-Re lambda t} C5(t) over (0, inf)
    and compare them with C7/(Re lambda - omega) and C8/(Re lambda - omega)^(1/2).

    Raises:
        HypothesisViolated: Re lambda <= omega, omega < -b0 or eta too large
    """
    margin = re_lambda - omega
    if margin <= 0.0:
        raise HypothesisViolated(f"Re lambda = {re_lambda} must exceed omega = {omega}")
    if omega < -sq.b0:
        raise HypothesisViolated(f"omega = {omega} lies below -b0 = {-sq.b0}")
    cap = admissible_eta_squared(sq, re_lambda, omega, vartheta)
    if sq.eta**2 > cap:
        raise HypothesisViolated(f"eta^2 = {sq.eta**2:.4g} exceeds the admissible {cap:.4g}")

    constants = BoundConstants(sq=sq, C_theta=C_theta, vartheta=vartheta)

    def laplace(level: int) -> float:
        # t = s^2 removes the t^(-1/2) singularity of C5
        value, _ = scipy.integrate.quad(
            lambda s: 2.0 * s * math.exp(-re_lambda * s * s) * constants.C(level, s * s) if s > 0.0 else 0.0,
            0.0,
            np.inf,
            epsabs=0.0,
            epsrel=1e-10,
            limit=400,
        )
        return float(value)

    integral4 = laplace(4)
    integral5 = laplace(5)
    bound7 = constants.C7 / margin
    bound8 = constants.C8 / math.sqrt(margin)
    logger.debug(f"Laplace check: C4 {integral4:.4e} <= {bound7:.4e}, C5 {integral5:.4e} <= {bound8:.4e}")
    return {
        "integral_C4": integral4,
        "bound_C7": bound7,
        "integral_C5": integral5,
        "bound_C8": bound8,
    }


def _log_grid(upper: float, count: int = 2000) -> np.ndarray:
    return np.geomspace(1e-8, upper, count)


def omega_bound(
    sq: SpectralQuantities,
    mode: OmegaMode = "lp_weighted",
    p: Optional[float] = None,
    C_theta: float = 1.0,
    epsilon: float = DEFAULT_EPSILON,
) -> Dict[str, float]:
    """
    Growth bound ||T(t)|| <= M e^{omega t}.

    lp_weighted: omega = -b0 + (1 + epsilon) nu / p, M = C_theta kappa a1^(d/2) C*
    with C* the sampled sup of e^{-(1+epsilon) nu t / p} [bracket]^(1/p) times
    the safety factor. cb_unweighted: (-b0, kappa a1^(d/2)).
    """
    base = sq.kappa * sq.a1 ** (sq.d / 2)
    if mode == "cb_unweighted":
        return {"omega": -sq.b0, "M": base, "C_star": 1.0}
    if mode != "lp_weighted":
        raise ValueError(f"Unknown omega mode: {mode}")
    if epsilon <= 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    p = sq.p if p is None else p
    if math.isinf(p):
        p = 1.0
    omega = -sq.b0 + (1.0 + epsilon) * sq.nu / p
    if sq.nu == 0.0:
        return {"omega": omega, "M": C_theta * base, "C_star": 1.0}

    # in s = nu t the envelope peaks near s = (d - 1) / (2 epsilon)
    upper = min(600.0, max(50.0, 40.0 * (sq.d + 1) / epsilon))
    samples = _log_grid(upper)
    ratios = [
        math.exp(-(1.0 + epsilon) * s / p) * bracket(1, sq.d, s) ** (1.0 / p)
        for s in samples
    ]
    c_star = SAFETY_FACTOR * max(1.0, max(ratios))
    logger.debug(f"omega bound: omega={omega:.4g}, C*={c_star:.4g} over s in (0, {upper:.0f}]")
    return {"omega": omega, "M": C_theta * base * c_star, "C_star": c_star}
