"""
Heat kernel of the complex Ornstein-Uhlenbeck operator and its shifted forms.

H(x, xi, t) = (4 pi t A)^(-d/2) exp(-B t - (4 t A)^(-1) |e^{tS} x - xi|^2)
is evaluated entry-wise on the eigenvalues of A and B and mapped back with
Y (.) Y^-1. K(psi, t) = H(x, e^{tS} x - psi, t) is the shifted kernel, with
the x-derivatives K^i and K^{ji} obtained by multiplying its diagonal.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Sequence, Tuple

import numpy as np
import scipy.integrate

from app.numerics.errors import QuadratureNotConverged, SystemNotScalar
from app.numerics.linalg import (
    OUSystem,
    matrix_function,
    rotation,
    spectral_norm,
    spectral_quantities,
)
from app.numerics.quadrature import (
    DEFAULT_SETTINGS,
    QuadratureSettings,
    box_rule,
    envelope_scales,
    gauss_legendre,
    integrate,
    truncation_radius,
)
from app.numerics.special import sphere_abs_moment, sphere_area

logger = logging.getLogger(__name__)

MultiIndex = Tuple[int, ...]


@dataclass(frozen=True)
class KernelQuery:
    """Evaluation point of the heat kernel H(x, xi, t)."""
    sys: OUSystem
    t: float
    x: np.ndarray
    xi: np.ndarray


@dataclass(frozen=True)
class RiccatiSolution:
    N_matrix: np.ndarray
    phi: complex


@dataclass(frozen=True)
class RiccatiResidual:
    res_N: float
    res_phi: float


def _require_positive_time(t: float) -> float:
    t = float(t)
    if not t > 0.0:
        raise ValueError(f"Kernel evaluations need t > 0, got {t}")
    return t


def heat_kernel_diagonal(sys: OUSystem, distance2, t: float) -> np.ndarray:
    """
    Diagonal entries of Y^-1 H Y for squared distances of any shape.

    Returns an array of shape distance2.shape + (N,).
    """
    t = _require_positive_time(t)
    distance2 = np.asarray(distance2, dtype=float)[..., None]
    lam_a = sys.lambdaA
    exponent = (
        -(sys.d / 2.0) * np.log(4.0 * math.pi * t * lam_a)
        - sys.lambdaB * t
        - distance2 / (4.0 * t * lam_a)
    )
    return np.exp(exponent)


def heat_kernel(q: KernelQuery) -> np.ndarray:
    """
    H(x, xi, t) as a complex N x N matrix.
    """
    t = _require_positive_time(q.t)
    moved = rotation(q.sys.S, t) @ np.asarray(q.x, dtype=float)
    gap = moved - np.asarray(q.xi, dtype=float)
    return q.sys.from_diagonal(heat_kernel_diagonal(q.sys, gap @ gap, t))


def heat_kernel_batch(sys: OUSystem, x, xi, t: float) -> np.ndarray:
    """H for stacked points x, xi of shape (..., d); returns (..., N, N)."""
    t = _require_positive_time(t)
    moved = np.asarray(x, dtype=float) @ rotation(sys.S, t).T
    gap = moved - np.asarray(xi, dtype=float)
    return sys.from_diagonal(heat_kernel_diagonal(sys, np.sum(gap * gap, axis=-1), t))


def shifted_kernel_diagonal(sys: OUSystem, psi, t: float, beta: MultiIndex = ()) -> np.ndarray:
    """
    Diagonal entries of Y^-1 K^beta(psi, t) Y for stacked psi of shape (..., d).

    beta is () for K, (i,) for K^i and (i, j) for K^{ji}, with 0-based indices.
    """
    psi = np.asarray(psi, dtype=float)
    base = heat_kernel_diagonal(sys, np.sum(psi * psi, axis=-1), t)
    if not beta:
        return base
    if len(beta) > 2:
        raise ValueError(f"Derivative order {len(beta)} is not supported")
    inverse = 1.0 / (2.0 * t * sys.lambdaA)
    projections = psi @ rotation(sys.S, t)
    first = projections[..., beta[0]][..., None]
    if len(beta) == 1:
        return -first * inverse * base
    second = projections[..., beta[1]][..., None]
    kronecker = 1.0 if beta[0] == beta[1] else 0.0
    return (first * second * inverse**2 - kronecker * inverse) * base


def kernel_K(sys: OUSystem, psi, t: float) -> np.ndarray:
    return sys.from_diagonal(shifted_kernel_diagonal(sys, psi, t))


def kernel_Ki(sys: OUSystem, psi, t: float, i: int) -> np.ndarray:
    return sys.from_diagonal(shifted_kernel_diagonal(sys, psi, t, (i,)))


def kernel_Kji(sys: OUSystem, psi, t: float, i: int, j: int) -> np.ndarray:
    return sys.from_diagonal(shifted_kernel_diagonal(sys, psi, t, (i, j)))


# Riccati construction (scalar case)


def _scalar_coefficients(sys: OUSystem) -> Tuple[complex, complex]:
    if not sys.is_scalar:
        raise SystemNotScalar(f"Riccati construction needs N = 1, system {sys.name} has N = {sys.N}")
    return complex(sys.lambdaA[0]), complex(sys.lambdaB[0])


def riccati_solution(sys: OUSystem, t: float) -> RiccatiSolution:
    """
    Closed-form solution of the Riccati system behind the kernel.

    N(t) = [[I, -e^{tS^T}], [-e^{tS}, I]] / (2 conj(alpha) t)
    phi(t) = (4 pi alpha)^(-d/2) t^(-d/2) e^(-delta t)
    """
    alpha, delta = _scalar_coefficients(sys)
    t = _require_positive_time(t)
    d = sys.d
    identity = np.eye(d)
    rotated = rotation(sys.S, t)
    blocks = np.block([[identity, -rotated.T], [-rotated, identity]])
    n_matrix = blocks / (2.0 * np.conj(alpha) * t)
    phi = np.exp(-(d / 2.0) * np.log(4.0 * math.pi * alpha)) * t ** (-d / 2.0) * np.exp(-delta * t)
    return RiccatiSolution(N_matrix=n_matrix.astype(complex), phi=complex(phi))


def riccati_residual(sys: OUSystem, t: float, step: float = 1e-5) -> RiccatiResidual:
    """
    Residuals of N_t = -2 conj(alpha) N P N + S~^T N + N S~ and
    phi_t = -(d/(2t) + delta) phi, with time derivatives by central differences
    of relative step `step`.
    """
    alpha, delta = _scalar_coefficients(sys)
    t = _require_positive_time(t)
    d = sys.d
    h = step * t

    current = riccati_solution(sys, t)
    ahead = riccati_solution(sys, t + h)
    behind = riccati_solution(sys, t - h)

    n = current.N_matrix
    n_t = (ahead.N_matrix - behind.N_matrix) / (2.0 * h)
    projector = np.zeros((2 * d, 2 * d))
    projector[:d, :d] = np.eye(d)
    drift = np.zeros((2 * d, 2 * d))
    drift[:d, :d] = sys.S
    residual = n_t + 2.0 * np.conj(alpha) * n @ projector @ n - drift.T @ n - n @ drift

    phi_t = (ahead.phi - behind.phi) / (2.0 * h)
    phi_residual = phi_t + (d / (2.0 * t) + delta) * current.phi

    return RiccatiResidual(res_N=float(np.linalg.norm(residual, 2)), res_phi=float(abs(phi_residual)))


# Quadrature of kernel integrals


def _checked(
    integrand: Callable[[np.ndarray], np.ndarray],
    build_rule: Callable[[int], object],
    settings: QuadratureSettings,
    label: str,
) -> np.ndarray:
    rule = build_rule(settings.order)
    value, magnitude = integrate(integrand, rule, settings.chunk_size)
    if not settings.refine_check:
        return value
    refined, _ = integrate(integrand, build_rule(settings.refined_order), settings.chunk_size)
    scale = max(float(np.max(magnitude)), np.finfo(float).tiny)
    gap = float(np.max(np.abs(refined - value)))
    if gap > 10.0 * settings.tol * scale:
        raise QuadratureNotConverged(
            f"{label}: refinements differ by {gap:.3e} (scale {scale:.3e}, tol {settings.tol:.1e})"
        )
    return refined


def _kernel_box(sys: OUSystem, t: float, settings: QuadratureSettings):
    sq = spectral_quantities(sys)
    radius = truncation_radius(sq, t, 0.0, settings.tol)
    _, narrow = envelope_scales(sq, t)
    width = settings.panel_scale * narrow
    center = np.zeros(sys.d)
    return lambda order: box_rule(center, radius, width, order, (0.0,), settings.max_panels)


def kernel_moments(
    sys: OUSystem,
    t: float,
    order: int,
    i: int = 0,
    j: int = 0,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> np.ndarray:
    """
    Quadrature of the kernel moments over the truncated box.

    order 0: integral of K; order 1: integral of K psi_i;
    order 2: integral of K psi_i psi_j.
    """
    t = _require_positive_time(t)
    if order not in (0, 1, 2):
        raise ValueError(f"Moment order must be 0, 1 or 2, got {order}")

    def integrand(nodes: np.ndarray) -> np.ndarray:
        values = shifted_kernel_diagonal(sys, nodes, t)
        if order >= 1:
            values = values * nodes[:, i, None]
        if order == 2:
            values = values * nodes[:, j, None]
        return values

    diagonal = _checked(integrand, _kernel_box(sys, t, settings), settings, f"moment order {order}")
    return sys.from_diagonal(diagonal)


def weighted_kernel_l1(
    sys: OUSystem,
    level: int,
    eta_p: float,
    t: float,
    i: int = 0,
    j: int = 0,
    tol: float = 1e-9,
    angular_nodes: int = 32,
) -> float:
    """
    Integral of exp(eta_p |psi|) ||K^beta(psi, t)||_2 over R^d, |beta| = level.

    K is radial and the weight rotation invariant, so psi -> e^{tS} psi
    aligns <psi, e^{tS} e_i> with psi_i. Levels 0 and 1, and level 2 with
    i != j, factor into a sphere moment times a radial integral; level 2 with
    i == j keeps one polar angle.
    """
    t = _require_positive_time(t)
    if level not in (0, 1, 2):
        raise ValueError(f"Level must be 0, 1 or 2, got {level}")
    d = sys.d
    sq = spectral_quantities(sys)
    radius = truncation_radius(sq, t, eta_p, tol * 1e-3)
    inverse = 1.0 / (2.0 * t * sys.lambdaA)

    def radial_profile(r: float) -> np.ndarray:
        return heat_kernel_diagonal(sys, r * r, t)

    if level == 2 and i == j:
        nodes, weights = gauss_legendre(angular_nodes)
        theta = 0.25 * math.pi * (nodes + 1.0)
        theta_weights = 0.25 * math.pi * weights
        cos2 = np.cos(theta) ** 2
        measure = 2.0 * sphere_area(d - 1) * np.sin(theta) ** (d - 2) * theta_weights

        def integrand(r: float) -> np.ndarray:
            factor = (r * r * cos2[:, None]) * inverse**2 - inverse
            norms = spectral_norm(sys.from_diagonal(factor * radial_profile(r)))
            return r ** (d - 1) * math.exp(eta_p * r) * norms

        values, error = scipy.integrate.quad_vec(integrand, 0.0, radius, epsrel=tol, epsabs=0.0, norm="max", limit=4000)
        total = float(np.dot(measure, values))
        error = float(np.dot(np.abs(measure), np.broadcast_to(error, values.shape)))
    else:
        if level == 0:
            angular = sphere_area(d)
            scale = np.ones_like(inverse)
        elif level == 1:
            angular = sphere_abs_moment(d, 1)
            scale = inverse
        else:
            angular = sphere_abs_moment(d, 1, 1)
            scale = inverse**2

        def integrand(r: float) -> float:
            norm = spectral_norm(sys.from_diagonal(scale * radial_profile(r)))
            return float(r ** (d - 1 + level) * math.exp(eta_p * r) * norm)

        value, error = scipy.integrate.quad_vec(integrand, 0.0, radius, epsrel=tol, epsabs=0.0, limit=4000)
        total = angular * float(value)
        error = angular * float(error)

    if not np.isfinite(total) or error > 10.0 * tol * abs(total) + np.finfo(float).tiny:
        raise QuadratureNotConverged(
            f"Weighted L1 integral at level {level}, t={t}: estimate {error:.3e} for value {total:.3e}"
        )
    return total


def chapman_kolmogorov_residual(
    sys: OUSystem,
    x,
    xi,
    t1: float,
    t2: float,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> float:
    """
    Relative residual of the integral of H(x, zeta, t1) H(zeta, xi, t2) over
    zeta against H(x, xi, t1 + t2), in spectral norm.
    """
    t1 = _require_positive_time(t1)
    t2 = _require_positive_time(t2)
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    first_rotation = rotation(sys.S, t1)
    second_rotation = rotation(sys.S, t2)
    y1 = first_rotation @ x
    y2 = second_rotation.T @ xi

    sq = spectral_quantities(sys)
    wide1, narrow1 = envelope_scales(sq, t1)
    wide2, narrow2 = envelope_scales(sq, t2)
    center = (wide2**2 * y1 + wide1**2 * y2) / (wide1**2 + wide2**2)
    combined = wide1 * wide2 / math.hypot(wide1, wide2)
    radius = combined * math.sqrt(math.log(1.0 / settings.tol) + sys.d)
    width = settings.panel_scale * min(narrow1, narrow2)

    def integrand(zeta: np.ndarray) -> np.ndarray:
        gap1 = y1 - zeta
        gap2 = zeta @ second_rotation.T - xi
        left = heat_kernel_diagonal(sys, np.sum(gap1 * gap1, axis=-1), t1)
        right = heat_kernel_diagonal(sys, np.sum(gap2 * gap2, axis=-1), t2)
        return left * right

    build = lambda order: box_rule(center, radius, width, order, (0.0,), settings.max_panels)  # noqa: E731
    diagonal = _checked(integrand, build, settings, "Chapman-Kolmogorov")
    composed = sys.from_diagonal(diagonal)
    direct = heat_kernel(KernelQuery(sys=sys, t=t1 + t2, x=x, xi=xi))
    return float(spectral_norm(composed - direct) / spectral_norm(direct))


def dirac_limit_probe(
    sys: OUSystem,
    phi: Callable[[np.ndarray], np.ndarray],
    x,
    t_sequence: Sequence[float],
    settings: QuadratureSettings = DEFAULT_SETTINGS,
) -> List[float]:
    """
    Errors ||integral of H(x, xi, t) phi(xi) dxi - e^{-Bt} phi(x)|| along t_sequence.

    phi maps stacked points (M, d) to scalar values (M,).
    """
    x = np.asarray(x, dtype=float)
    phi_x = complex(np.asarray(phi(x[None, :]))[0])
    errors = []
    for t in t_sequence:
        t = _require_positive_time(t)
        moved = rotation(sys.S, t) @ x

        def integrand(psi: np.ndarray, moved=moved, t=t) -> np.ndarray:
            samples = np.asarray(phi(moved - psi), dtype=complex)
            return shifted_kernel_diagonal(sys, psi, t) * samples[:, None]

        diagonal = _checked(integrand, _kernel_box(sys, t, settings), settings, f"Dirac probe t={t}")
        target = matrix_function(sys, lambda lam, t=t: np.exp(-lam * t), "B") * phi_x
        errors.append(float(spectral_norm(sys.from_diagonal(diagonal) - target)))
        logger.debug(f"Dirac probe {sys.name}: t={t}, error={errors[-1]:.3e}")
    return errors


def observed_orders(t_sequence: Sequence[float], errors: Sequence[float]) -> List[float]:
    """Observed convergence orders log(e_k/e_{k+1}) / log(t_k/t_{k+1})."""
    orders = []
    for (t_a, e_a), (t_b, e_b) in zip(zip(t_sequence, errors), zip(t_sequence[1:], errors[1:])):
        if e_a <= 0.0 or e_b <= 0.0:
            orders.append(math.inf)
            continue
        orders.append(math.log(e_a / e_b) / math.log(t_a / t_b))
    return orders


def kernel_slice_rows(sys: OUSystem, t: float, radii: Iterable[float], axis: int = 0) -> List[List[float]]:
    """
    CSV rows t, |psi|, then re/im pairs of K(psi, t) for psi along one axis.
    """
    rows = []
    for r in radii:
        psi = np.zeros(sys.d)
        psi[axis] = r
        matrix = kernel_K(sys, psi, t)
        row = [float(t), float(abs(r))]
        for entry in matrix.ravel():
            row.extend([float(entry.real), float(entry.imag)])
        rows.append(row)
    return rows


def kernel_csv_header(sys: OUSystem) -> List[str]:
    header = ["t", "psi"]
    for a in range(sys.N):
        for b in range(sys.N):
            header.extend([f"K{a}{b}_re", f"K{a}{b}_im"])
    return header


def write_kernel_csv(path, sys: OUSystem, rows: Iterable[Sequence[float]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(kernel_csv_header(sys))
        writer.writerows(rows)
