"""
Radial weight functions of exponential growth and weighted grid norms.

Named families, with eta = |mu| and C_theta = 1:

    exp_abs       exp(-mu |x|)
    cosh_abs      cosh(mu |x|)
    exp_smooth    exp(-mu sqrt(|x|^2 + 1))
    cosh_smooth   cosh(mu sqrt(|x|^2 + 1))

The axiom checks sample with a fixed seed so reports are reproducible.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.numerics.errors import EmptyGrid
from app.numerics.grid import GridFunction, GridSpec
from app.numerics.linalg import rotation

logger = logging.getLogger(__name__)

BOUNDARY_TAIL_RATIO = 1e-6
SAMPLE_SCALE = 5.0
_LOG2 = math.log(2.0)


class WeightKind(str, Enum):
    EXP_ABS = "exp_abs"
    COSH_ABS = "cosh_abs"
    EXP_SMOOTH = "exp_smooth"
    COSH_SMOOTH = "cosh_smooth"
    UNIT = "unit"
    CUSTOM = "custom"


@dataclass(frozen=True)
class WeightFunction:
    """
    Weight theta with growth envelope theta(x+y) <= C_theta theta(x) e^{eta |y|}.

    func is only used for the custom kind and maps (M, d) points to (M,) values.
    """
    kind: WeightKind
    mu: float = 0.0
    eta: float = 0.0
    C_theta: float = 1.0
    func: Optional[Callable[[np.ndarray], np.ndarray]] = None

    @property
    def label(self) -> str:
        if self.kind == WeightKind.UNIT:
            return "unit"
        return f"{self.kind.value}(mu={self.mu:g})"


def make_weight(kind, mu: float = 0.0, func=None, eta: Optional[float] = None, C_theta: Optional[float] = None) -> WeightFunction:
    """Build a weight; named families get eta = |mu| and C_theta = 1."""
    kind = WeightKind(kind)
    if kind == WeightKind.UNIT:
        return WeightFunction(kind=kind)
    if kind == WeightKind.CUSTOM:
        if func is None:
            raise ValueError("A custom weight needs a callable")
        return WeightFunction(kind=kind, mu=mu, eta=eta or 0.0, C_theta=C_theta or 1.0, func=func)
    return WeightFunction(kind=kind, mu=float(mu), eta=abs(float(mu)), C_theta=1.0)


def _log_cosh(z: np.ndarray) -> np.ndarray:
    return np.logaddexp(z, -z) - _LOG2


def log_weight(w: WeightFunction, points) -> np.ndarray:
    """log theta at stacked points (..., d)."""
    points = np.asarray(points, dtype=float)
    radius = np.linalg.norm(points, axis=-1)
    if w.kind == WeightKind.UNIT:
        return np.zeros_like(radius)
    if w.kind == WeightKind.EXP_ABS:
        return -w.mu * radius
    if w.kind == WeightKind.COSH_ABS:
        return _log_cosh(w.mu * radius)
    smooth = np.sqrt(radius**2 + 1.0)
    if w.kind == WeightKind.EXP_SMOOTH:
        return -w.mu * smooth
    if w.kind == WeightKind.COSH_SMOOTH:
        return _log_cosh(w.mu * smooth)
    flat = points.reshape(-1, points.shape[-1])
    return np.log(np.asarray(w.func(flat), dtype=float)).reshape(radius.shape)


def eval_weight(w: WeightFunction, x):
    """theta(x) for a single point (float) or stacked points (array)."""
    x = np.asarray(x, dtype=float)
    values = np.exp(log_weight(w, x))
    return float(values) if x.ndim == 1 else values


def _samples(rng: np.random.Generator, count: int, d: int, scale: float = SAMPLE_SCALE) -> np.ndarray:
    return rng.normal(scale=scale, size=(count, d))


@dataclass(frozen=True)
class GrowthEnvelopeCheck:
    max_violation: float
    C_observed: float

    @property
    def holds(self) -> bool:
        return self.max_violation <= 1.0 + 1e-9


def check_growth_envelope(w: WeightFunction, sample_count: int = 10_000, seed: int = 0, d: int = 2) -> GrowthEnvelopeCheck:
    """
    Sample theta(x+y) / (theta(x) e^{eta |y|}) over random pairs.

    C_observed is the largest sampled ratio, max_violation the same ratio
    divided by the declared C_theta.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be at least 1")
    rng = np.random.default_rng(seed)
    x = _samples(rng, sample_count, d)
    y = _samples(rng, sample_count, d)
    log_ratio = log_weight(w, x + y) - log_weight(w, x) - w.eta * np.linalg.norm(y, axis=-1)
    observed = float(np.exp(np.max(log_ratio)))
    return GrowthEnvelopeCheck(max_violation=observed / w.C_theta, C_observed=observed)


def _smooth_gradient_ratio(w: WeightFunction, x: np.ndarray, step: float = 1e-5) -> float:
    d = x.shape[-1]
    gradient = np.zeros_like(x)
    for k in range(d):
        shift = np.zeros(d)
        shift[k] = step
        gradient[:, k] = (log_weight(w, x + shift) - log_weight(w, x - shift)) / (2.0 * step)
    return float(np.max(np.linalg.norm(gradient, axis=-1)))


def check_translation_regularity(
    w: WeightFunction,
    psi_sequence: Sequence[float],
    sample_count: int = 2000,
    seed: int = 0,
    d: int = 2,
) -> Dict[str, object]:
    """
    Sampled sup over x of |theta(x+psi) - theta(x)| / theta(x) for each |psi|.

    For the smooth families the gradient bound |grad theta| <= |mu| theta is
    measured by central differences and returned as gradient_ratio.
    """
    rng = np.random.default_rng(seed)
    x = _samples(rng, sample_count, d)
    directions = rng.normal(size=(sample_count, d))
    directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
    ratios = []
    for size in psi_sequence:
        difference = log_weight(w, x + size * directions) - log_weight(w, x)
        ratios.append(float(np.max(np.abs(np.expm1(difference)))))
    gradient_ratio = None
    if w.kind in (WeightKind.EXP_SMOOTH, WeightKind.COSH_SMOOTH):
        gradient_ratio = _smooth_gradient_ratio(w, x)
    return {"ratios": ratios, "gradient_ratio": gradient_ratio}


def check_rotation_invariance(
    w: WeightFunction,
    S,
    t_samples: Sequence[float],
    sample_count: int = 200,
    seed: int = 0,
) -> float:
    """Max over samples of |theta(e^{tS} x) - theta(x)| / theta(x)."""
    S = np.asarray(S, dtype=float)
    rng = np.random.default_rng(seed)
    x = _samples(rng, sample_count, S.shape[0])
    worst = 0.0
    for t in t_samples:
        rotated = x @ rotation(S, t).T
        difference = log_weight(w, rotated) - log_weight(w, x)
        worst = max(worst, float(np.max(np.abs(np.expm1(difference)))))
    return worst


def lower_envelope(w: WeightFunction) -> Tuple[float, float]:
    """
    Constants (C~, nu) with theta(x) >= C~ e^{nu |x|}.
    """
    mu = w.mu
    if w.kind == WeightKind.UNIT:
        return 1.0, 0.0
    if w.kind in (WeightKind.COSH_ABS, WeightKind.COSH_SMOOTH):
        return 0.5, abs(mu)
    if w.kind == WeightKind.EXP_ABS:
        return 1.0, -mu
    if w.kind == WeightKind.EXP_SMOOTH:
        return (math.exp(-mu), -mu) if mu >= 0.0 else (1.0, -mu)
    raise ValueError("Custom weights carry no recorded lower envelope")


def check_lower_envelope(w: WeightFunction, sample_count: int = 10_000, seed: int = 0, d: int = 2) -> float:
    """Smallest sampled theta(x) / (C~ e^{nu |x|}); at least 1 when the envelope holds."""
    factor, rate = lower_envelope(w)
    rng = np.random.default_rng(seed)
    x = np.concatenate([np.zeros((1, d)), _samples(rng, sample_count, d)])
    log_ratio = log_weight(w, x) - math.log(factor) - rate * np.linalg.norm(x, axis=-1)
    return float(np.exp(np.min(log_ratio)))


def weight_ratio_bound(wa: WeightFunction, wb: WeightFunction, sample_count: int = 10_000, seed: int = 0, d: int = 2) -> float:
    """Sampled sup of theta_a / theta_b, a witness for theta_a <= C theta_b."""
    rng = np.random.default_rng(seed)
    x = np.concatenate([np.zeros((1, d)), _samples(rng, sample_count, d)])
    return float(np.exp(np.max(log_weight(wa, x) - log_weight(wb, x))))


# Weighted norms of grid data


def _axis_selection(spec: GridSpec, interior: Optional[float]) -> List[np.ndarray]:
    selection = []
    for axis in spec.axes:
        index = np.arange(axis.count)
        if interior:
            margin = interior * (axis.max - axis.min)
            nodes = axis.nodes
            index = index[(nodes >= axis.min + margin - 1e-12) & (nodes <= axis.max - margin + 1e-12)]
        if index.size == 0:
            raise EmptyGrid(f"No nodes left on axis [{axis.min}, {axis.max}] after removing the boundary layer")
        selection.append(index)
    return selection


def _trapezoid_weights(count: int, h: float) -> np.ndarray:
    weights = np.full(count, h)
    if count > 1:
        weights[0] = weights[-1] = 0.5 * h
    return weights


def _weighted_moduli(spec: GridSpec, values: np.ndarray, w: WeightFunction, selection) -> np.ndarray:
    points = spec.points().reshape(spec.shape + (spec.d,))
    sub = np.ix_(*selection)
    moduli = np.linalg.norm(values[sub], axis=-1)
    return moduli * np.exp(log_weight(w, points[sub]))


def _warn_boundary_tail(scaled: np.ndarray, label: str) -> None:
    peak = float(np.max(scaled))
    if peak == 0.0 or scaled.ndim == 0:
        return
    edges = []
    for axis in range(scaled.ndim):
        edges.append(np.max(np.take(scaled, [0, -1], axis=axis)))
    tail = float(max(edges))
    if tail > BOUNDARY_TAIL_RATIO * peak:
        logger.warning(f"{label}: weighted boundary values reach {tail / peak:.2e} of the grid max")


def lp_norm_values(
    spec: GridSpec,
    values: np.ndarray,
    w: WeightFunction,
    p: float,
    interior: Optional[float] = None,
) -> float:
    """
    Composite trapezoid approximation of (integral |theta v|^p)^(1/p).

    values has shape spec.shape + (N,); |.| is the Euclidean norm on C^N.
    """
    if spec.size == 0:
        raise EmptyGrid("Grid has no nodes")
    if p < 1.0:
        raise ValueError(f"p must lie in [1, inf), got {p}")
    values = np.asarray(values).reshape(spec.shape + (-1,))
    selection = _axis_selection(spec, interior)
    scaled = _weighted_moduli(spec, values, w, selection)
    _warn_boundary_tail(scaled, f"L^{p:g} norm under {w.label}")
    total = scaled**p
    for axis, index in enumerate(selection):
        weights = _trapezoid_weights(index.size, spec.axes[axis].h)
        total = np.tensordot(weights, total, axes=(0, 0))
    return float(total) ** (1.0 / p)


def sup_norm_values(spec: GridSpec, values: np.ndarray, w: WeightFunction, interior: Optional[float] = None) -> float:
    """Max over nodes of theta(x) |v(x)|."""
    if spec.size == 0:
        raise EmptyGrid("Grid has no nodes")
    values = np.asarray(values).reshape(spec.shape + (-1,))
    return float(np.max(_weighted_moduli(spec, values, w, _axis_selection(spec, interior))))


def weighted_lp_norm(v: GridFunction, w: WeightFunction, p: float, interior: Optional[float] = None) -> float:
    return lp_norm_values(v.spec, v.values, w, p, interior)


def weighted_sup_norm(v: GridFunction, w: WeightFunction, interior: Optional[float] = None) -> float:
    return sup_norm_values(v.spec, v.values, w, interior)


def weighted_norm(v: GridFunction, w: WeightFunction, p: Optional[float], interior: Optional[float] = None) -> float:
    """L^p_theta norm for finite p, C_{b,theta} norm for p None or inf."""
    if p is None or math.isinf(p):
        return weighted_sup_norm(v, w, interior)
    return weighted_lp_norm(v, w, p, interior)
