"""
Ornstein-Uhlenbeck semigroup T(t) acting on grid data and analytic fields.

[T(t)v](x) = integral of K(psi, t) v(e^{tS} x - psi) over psi, evaluated per
target in the diagonal basis of A and B. Derivatives D^beta T(t)v come from the
differentiated kernels K^i and K^{ji} applied to the same samples.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.numerics.bounds import bound_C
from app.numerics.errors import QuadratureNotConverged, TooCloseToBoundary
from app.numerics.fields import Field, ensure_field
from app.numerics.grid import BOUNDARY_LAYER, AxisSpec, GridFunction, GridSpec
from app.numerics.kernel import MultiIndex, shifted_kernel_diagonal
from app.numerics.linalg import OUSystem, rotation, spectral_quantities
from app.numerics.quadrature import (
    QuadratureSettings,
    envelope_scales,
    gaussian_box_fraction,
    integrate,
    panel_rule,
    tensor_rule,
    truncation_radius,
)
from app.numerics.weights import WeightFunction, lp_norm_values, make_weight, sup_norm_values

logger = logging.getLogger(__name__)

SEMIGROUP_SETTINGS = QuadratureSettings(tol=1e-8, max_panels=64)


@dataclass(frozen=True)
class SemigroupQuery:
    """
    Attributes:
        sys: Validated system
        t: Time, t >= 0
        v: Input data (GridFunction or Field)
        grid: Output grid; defaults to the grid of v
        settings: Spatial quadrature settings
    """
    sys: OUSystem
    t: float
    v: object
    grid: Optional[GridSpec] = None
    settings: QuadratureSettings = field(default=SEMIGROUP_SETTINGS)


@dataclass
class ConvolutionResult:
    values: Dict[MultiIndex, np.ndarray]
    est_error: float


def _output_grid(v, grid: Optional[GridSpec]) -> GridSpec:
    if grid is not None:
        return grid
    if isinstance(v, GridFunction):
        return v.spec
    raise ValueError("An output grid is required when the input is not a grid function")


def _axis_rules(
    field_: Field,
    center: np.ndarray,
    radius: float,
    width: float,
    settings: QuadratureSettings,
    refined: bool,
) -> Optional[List[Tuple[np.ndarray, np.ndarray]]]:
    """
    One-dimensional psi-rules per axis on [-radius, radius] intersected with
    center - support. Grid cell edges become panel breakpoints.
    """
    box = field_.support()
    axes = []
    for k in range(field_.d):
        lower, upper = -radius, radius
        if box is not None:
            lower = max(lower, center[k] - box[1][k])
            upper = min(upper, center[k] - box[0][k])
        if upper <= lower:
            return None
        edges = field_.cell_edges(k)
        if edges is not None:
            order = settings.refined_cell_order if refined else settings.cell_order
            axes.append(panel_rule(lower, upper, width, order, center[k] - edges, None))
            continue
        axis_width = min(width, field_.feature_scale)
        if (upper - lower) / axis_width > settings.max_panels:
            logger.warning(
                f"Panel count {math.ceil((upper - lower) / axis_width)} capped at {settings.max_panels} on axis {k}"
            )
        order = settings.refined_order if refined else settings.order
        axes.append(panel_rule(lower, upper, axis_width, order, (), settings.max_panels))
    return axes


def _convolve(
    sys: OUSystem,
    v,
    t: float,
    centers: np.ndarray,
    betas: Sequence[MultiIndex] = ((),),
    settings: QuadratureSettings = SEMIGROUP_SETTINGS,
) -> ConvolutionResult:
    """
    Integrals of K^beta(psi, t) v(center - psi) for every center and beta.
    """
    field_ = ensure_field(v)
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    sq = spectral_quantities(sys)
    wide, narrow = envelope_scales(sq, t)
    radius = truncation_radius(sq, t, 0.0, settings.tol)
    width = settings.panel_scale * narrow

    def target_integral(center: np.ndarray, refined: bool) -> Tuple[np.ndarray, np.ndarray]:
        axes = _axis_rules(field_, center, radius, width, settings, refined)
        if axes is None or any(nodes.size == 0 for nodes, _ in axes):
            zero = np.zeros((len(betas), sys.N), dtype=complex)
            return zero, np.zeros((len(betas), sys.N))
        rule = tensor_rule(axes)

        def integrand(psi: np.ndarray) -> np.ndarray:
            samples = field_.evaluate(center - psi) @ sys.Y_inv.T
            return np.stack([shifted_kernel_diagonal(sys, psi, t, beta) * samples for beta in betas], axis=1)

        return integrate(integrand, rule, settings.chunk_size)

    diagonals = np.zeros((centers.shape[0], len(betas), sys.N), dtype=complex)
    magnitudes = np.zeros((centers.shape[0], len(betas), sys.N))
    for index, center in enumerate(centers):
        diagonals[index], magnitudes[index] = target_integral(center, refined=False)

    if settings.refine_check and centers.shape[0]:
        count = min(settings.check_targets, centers.shape[0])
        for index in np.unique(np.linspace(0, centers.shape[0] - 1, count).round().astype(int)):
            refined, _ = target_integral(centers[index], refined=True)
            gap = float(np.max(np.abs(refined - diagonals[index])))
            scale = float(np.max(magnitudes[index]))
            if gap > 10.0 * settings.tol * scale + np.finfo(float).tiny:
                raise QuadratureNotConverged(
                    f"Semigroup quadrature at t={t}, target {centers[index].tolist()}: "
                    f"refinements differ by {gap:.3e} (scale {scale:.3e})"
                )

    values = {beta: diagonals[:, b, :] @ sys.Y.T for b, beta in enumerate(betas)}
    est_error = _tail_estimate(sys, field_, t, centers, wide, settings) + settings.tol * float(
        np.max(magnitudes, initial=0.0)
    )
    return ConvolutionResult(values=values, est_error=est_error)


def _tail_estimate(sys: OUSystem, field_: Field, t: float, centers: np.ndarray, wide: float, settings) -> float:
    """Kernel mass beyond a grid, times the largest boundary value of the data."""
    if not isinstance(field_, GridFunction):
        return 0.0
    values = np.linalg.norm(field_.values, axis=-1)
    boundary = max(float(np.max(np.take(values, [0, -1], axis=axis))) for axis in range(field_.d))
    if boundary == 0.0:
        return 0.0
    lower, upper = field_.support()
    outside = 1.0 - gaussian_box_fraction(centers, lower, upper, wide)
    envelope = bound_C(1, spectral_quantities(sys), t)
    tail = float(np.max(outside)) * boundary * envelope
    if tail > 1e-6 * float(np.max(values)):
        logger.warning(f"Grid truncation tail {tail:.2e} at t={t} for system {sys.name}")
    return tail


def evaluate_semigroup(
    sys: OUSystem,
    v,
    t: float,
    points,
    betas: Sequence[MultiIndex] = ((),),
    settings: QuadratureSettings = SEMIGROUP_SETTINGS,
) -> ConvolutionResult:
    """
    D^beta [T(t)v](x) at stacked points x for each beta.

    t = 0 returns the samples of v without quadrature.
    """
    if t < 0.0:
        raise ValueError(f"Semigroup time must be non-negative, got {t}")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if t == 0.0:
        if any(betas):
            raise ValueError("Kernel derivatives are undefined at t = 0")
        return ConvolutionResult(values={(): ensure_field(v).evaluate(points)}, est_error=0.0)
    centers = points @ rotation(sys.S, t).T
    return _convolve(sys, v, t, centers, betas, settings)


def evaluate_diffusion(
    sys: OUSystem,
    v,
    t: float,
    points,
    settings: QuadratureSettings = SEMIGROUP_SETTINGS,
) -> np.ndarray:
    """[G(t,0)v](y) = integral of H(e^{-tS} y, xi, t) v(xi) at stacked points y."""
    if not t > 0.0:
        raise ValueError(f"Diffusion factor needs t > 0, got {t}")
    return _convolve(sys, v, t, np.atleast_2d(points), ((),), settings).values[()]


def apply_semigroup(q: SemigroupQuery) -> GridFunction:
    """T(t)v sampled on the output grid; T(0) returns v itself."""
    if q.t < 0.0:
        raise ValueError(f"Semigroup time must be non-negative, got {q.t}")
    if q.t == 0.0 and isinstance(q.v, GridFunction) and (q.grid is None or q.grid == q.v.spec):
        return q.v
    spec = _output_grid(q.v, q.grid)
    started = time.perf_counter()
    result = evaluate_semigroup(q.sys, q.v, q.t, spec.points(), ((),), q.settings)
    logger.debug(
        f"T({q.t}) on {spec.size} nodes for {q.sys.name} in {1000 * (time.perf_counter() - started):.0f} ms"
    )
    values = result.values[()].reshape(spec.shape + (q.sys.N,))
    return GridFunction(spec, values, result.est_error, q.settings.interpolation_order)


def apply_diffusion(
    sys: OUSystem,
    v,
    t: float,
    grid: Optional[GridSpec] = None,
    settings: QuadratureSettings = SEMIGROUP_SETTINGS,
) -> GridFunction:
    spec = _output_grid(v, grid)
    result = _convolve(sys, v, t, spec.points(), ((),), settings)
    return GridFunction(spec, result.values[()].reshape(spec.shape + (sys.N,)), result.est_error)


def _relative_gap(spec: GridSpec, lhs: np.ndarray, rhs: np.ndarray, w: WeightFunction, p: Optional[float]) -> float:
    if p is None or math.isinf(p):
        gap = sup_norm_values(spec, lhs - rhs, w)
        scale = sup_norm_values(spec, rhs, w)
    else:
        gap = lp_norm_values(spec, lhs - rhs, w, p)
        scale = lp_norm_values(spec, rhs, w, p)
    return gap / scale if scale > 0.0 else gap


def interior_spec(spec: GridSpec, fraction: float = BOUNDARY_LAYER, max_count: Optional[int] = None) -> GridSpec:
    """
    Grid over the nodes outside the boundary layer, thinned to at most
    max_count nodes per axis.
    """
    axes = []
    for axis in spec.axes:
        nodes = axis.nodes
        margin = fraction * (axis.max - axis.min)
        kept = nodes[(nodes >= axis.min + margin - 1e-12) & (nodes <= axis.max - margin + 1e-12)]
        if kept.size < 2:
            kept = nodes
        count = int(kept.size) if max_count is None else min(int(kept.size), max_count)
        axes.append(AxisSpec(float(kept[0]), float(kept[-1]), count))
    return GridSpec(tuple(axes))


def semigroup_composition_residual(
    sys: OUSystem,
    v,
    s: float,
    t: float,
    grid: Optional[GridSpec] = None,
    p: Optional[float] = 2.0,
    settings: QuadratureSettings = SEMIGROUP_SETTINGS,
    max_targets: int = 17,
) -> float:
    """
    Relative discrepancy of T(t)(T(s)v) and T(t+s)v on the interior sub-grid.

    T(s)v is sampled on the full grid and interpolated; the comparison uses at
    most max_targets nodes per axis.
    """
    if s == 0.0 or t == 0.0:
        return 0.0
    spec = _output_grid(v, grid)
    inner = apply_semigroup(SemigroupQuery(sys, s, v, spec, settings))
    interior = interior_spec(spec, max_count=max_targets)
    points = interior.points()
    composed = evaluate_semigroup(sys, inner, t, points, ((),), settings).values[()]
    direct = evaluate_semigroup(sys, v, s + t, points, ((),), settings).values[()]
    residual = _relative_gap(interior, composed, direct, make_weight("unit"), p)
    logger.info(f"Composition residual for {sys.name}, s={s}, t={t}: {residual:.3e}")
    return residual


def factorization_residual(
    sys: OUSystem,
    v,
    t: float,
    points,
    settings: QuadratureSettings = SEMIGROUP_SETTINGS,
) -> float:
    """max |T(t)v(x) - G(t,0)v(e^{tS} x)| relative to max |T(t)v(x)|."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    semigroup = evaluate_semigroup(sys, v, t, points, ((),), settings).values[()]
    diffusion = evaluate_diffusion(sys, v, t, points @ rotation(sys.S, t).T, settings)
    scale = float(np.max(np.linalg.norm(semigroup, axis=-1)))
    gap = float(np.max(np.linalg.norm(semigroup - diffusion, axis=-1)))
    return gap / scale if scale > 0.0 else gap


def generator_from_stencil(sys: OUSystem, center_value, plus, minus, x, h: float) -> np.ndarray:
    """
    A Lap v + <Sx, grad v> - B v from central differences.

    plus[k] and minus[k] are the samples at x + h e_k and x - h e_k.
    """
    x = np.asarray(x, dtype=float)
    center_value = np.asarray(center_value, dtype=complex)
    plus = np.asarray(plus, dtype=complex)
    minus = np.asarray(minus, dtype=complex)
    laplacian = np.sum(plus - 2.0 * center_value + minus, axis=0) / h**2
    gradient = (plus - minus) / (2.0 * h)
    drift = sys.S @ x
    return sys.A @ laplacian + drift @ gradient - sys.B @ center_value


def stencil_points(x, h: float) -> np.ndarray:
    """x, then x + h e_k for every k, then x - h e_k for every k."""
    x = np.asarray(x, dtype=float)
    shifts = h * np.eye(x.shape[0])
    return np.vstack([x[None, :], x + shifts, x - shifts])


def split_stencil(samples: np.ndarray, d: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    return samples[0], samples[1 : d + 1], samples[d + 1 :]


def apply_generator_fd(sys: OUSystem, v, x, h: float) -> np.ndarray:
    """
    L v(x) by second-order central differences.

    Raises:
        TooCloseToBoundary: x is closer than 2h to the edge of the grid of v
    """
    x = np.asarray(x, dtype=float)
    field_ = ensure_field(v)
    if isinstance(field_, GridFunction) and not field_.spec.contains(x[None, :], margin=2.0 * h)[0]:
        raise TooCloseToBoundary(f"Point {x.tolist()} lies within 2h = {2 * h} of the grid boundary")
    samples = field_.evaluate(stencil_points(x, h))
    center, plus, minus = split_stencil(samples, x.shape[0])
    return generator_from_stencil(sys, center, plus, minus, x, h)


def _norm(spec: GridSpec, values: np.ndarray, w: WeightFunction, p: Optional[float]) -> float:
    if p is None or math.isinf(p):
        return sup_norm_values(spec, values, w)
    return lp_norm_values(spec, values, w, p)


def strong_continuity_probe(
    sys: OUSystem,
    v,
    w: WeightFunction,
    p: Optional[float],
    t_sequence: Sequence[float],
    grid: Optional[GridSpec] = None,
    settings: QuadratureSettings = SEMIGROUP_SETTINGS,
) -> List[float]:
    """||T(t)v - v|| in the weighted L^p (or sup for p None) norm along t_sequence."""
    spec = _output_grid(v, grid)
    points = spec.points()
    base = ensure_field(v).evaluate(points).reshape(spec.shape + (-1,))
    distances = []
    for t in t_sequence:
        moved = evaluate_semigroup(sys, v, t, points, ((),), settings).values[()].reshape(base.shape)
        distances.append(_norm(spec, moved - base, w, p))
        logger.debug(f"Continuity probe {sys.name}: t={t}, distance={distances[-1]:.3e}")
    return distances


def boundedness_sweep(
    sys: OUSystem,
    v,
    norms: Sequence[Tuple[WeightFunction, Optional[float]]],
    t_values: Sequence[float],
    grid: Optional[GridSpec] = None,
    settings: QuadratureSettings = SEMIGROUP_SETTINGS,
) -> List[Dict[str, object]]:
    """
    Measured ||D^beta T(t)v|| / ||v|| against C4, C5 and C6 for |beta| = 0, 1, 2,
    for every (weight, p) pair in norms.

    Derivatives use the kernel route and are computed once per t. p None
    selects the weighted sup norm with the p = 1 constants.
    """
    spec = _output_grid(v, grid)
    d = sys.d
    points = spec.points()
    initial = ensure_field(v).evaluate(points).reshape(spec.shape + (-1,))
    betas: List[MultiIndex] = [()] + [(i,) for i in range(d)] + [(i, j) for i in range(d) for j in range(i, d)]
    rows = []
    for t in t_values:
        result = evaluate_semigroup(sys, v, t, points, betas, settings)
        for w, p in norms:
            exponent = 1.0 if p is None or math.isinf(p) else p
            sq = spectral_quantities(sys, eta=w.eta, p=exponent)
            norm_v = _norm(spec, initial, w, p)
            ratios = {0: 0.0, 1: 0.0, 2: 0.0}
            for beta in betas:
                values = result.values[beta].reshape(spec.shape + (sys.N,))
                level = len(beta)
                bound = bound_C(4 + level, sq, t, exponent, w.C_theta, int(level == 2 and beta[0] == beta[1]))
                ratios[level] = max(ratios[level], _norm(spec, values, w, p) / (norm_v * bound))
            rows.append(
                {
                    "weight": w.label,
                    "p": "sup" if p is None or math.isinf(p) else p,
                    "t": float(t),
                    "ratio_C4": ratios[0],
                    "ratio_C5": ratios[1],
                    "ratio_C6": ratios[2],
                    "est_error": result.est_error,
                }
            )
            logger.debug(f"Boundedness {sys.name}, {w.label}, p={p}, t={t}: {ratios}")
    return rows


def boundedness_check(
    sys: OUSystem,
    v,
    w: WeightFunction,
    p: Optional[float],
    t_values: Sequence[float],
    grid: Optional[GridSpec] = None,
    settings: QuadratureSettings = SEMIGROUP_SETTINGS,
) -> List[Dict[str, float]]:
    """Rows t, ratio_C4, ratio_C5, ratio_C6, est_error for a single norm."""
    rows = boundedness_sweep(sys, v, [(w, p)], t_values, grid, settings)
    return [{key: value for key, value in row.items() if key not in ("weight", "p")} for row in rows]
