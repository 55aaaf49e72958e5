"""
Gauss-Legendre panel rules and Gaussian-envelope truncation for kernel integrals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import scipy.special

from app.numerics.linalg import SpectralQuantities


@dataclass(frozen=True)
class QuadratureSettings:
    """
    Spatial quadrature settings.

    Attributes:
        tol: Target relative tolerance of truncation and refinement checks
        order: Gauss-Legendre points per panel and axis
        refined_order: Order of the comparison rule in convergence checks
        panel_scale: Panel width in units of the narrow envelope scale
        refine_check: Compare against the refined rule and raise on disagreement
        chunk_size: Maximum number of nodes evaluated at once
        max_panels: Upper bound on panels per axis
        interpolation_order: 1 for multilinear, 3 for cubic spline grid data
        cell_order: Gauss-Legendre points per grid cell for interpolated data
        refined_cell_order: Cell order of the comparison rule
        check_targets: Number of targets re-integrated with the refined rule
    """
    tol: float = 1e-8
    order: int = 8
    refined_order: int = 12
    panel_scale: float = 1.0
    refine_check: bool = True
    chunk_size: int = 200_000
    max_panels: int = 48
    interpolation_order: int = 3
    cell_order: int = 6
    refined_cell_order: int = 8
    check_targets: int = 3


DEFAULT_SETTINGS = QuadratureSettings()


@dataclass(frozen=True)
class TensorRule:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return int(self.weights.shape[0])


@lru_cache(maxsize=64)
def gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    nodes, weights = scipy.special.roots_legendre(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def panel_rule(
    lower: float,
    upper: float,
    width: float,
    order: int,
    breakpoints: Sequence[float] = (),
    max_panels: Optional[int] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Composite Gauss-Legendre rule on [lower, upper].

    Panels have width at most `width`; every breakpoint inside the interval
    becomes a panel edge.
    """
    if upper <= lower:
        return np.zeros(0), np.zeros(0)
    edges = [lower] + sorted(b for b in breakpoints if lower < b < upper) + [upper]
    base_nodes, base_weights = gauss_legendre(order)
    nodes = []
    weights = []
    for left, right in zip(edges[:-1], edges[1:]):
        count = max(1, math.ceil((right - left) / width - 1e-12))
        if max_panels is not None:
            count = min(count, max_panels)
        cuts = np.linspace(left, right, count + 1)
        half = 0.5 * np.diff(cuts)
        mid = 0.5 * (cuts[:-1] + cuts[1:])
        nodes.append((mid[:, None] + half[:, None] * base_nodes[None, :]).ravel())
        weights.append((half[:, None] * base_weights[None, :]).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def tensor_rule(axes: Sequence[Tuple[np.ndarray, np.ndarray]]) -> TensorRule:
    """Tensor product of one-dimensional rules."""
    grids = np.meshgrid(*[axis[0] for axis in axes], indexing="ij")
    weight_grids = np.meshgrid(*[axis[1] for axis in axes], indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    weights = np.prod(np.stack([w.ravel() for w in weight_grids], axis=-1), axis=-1)
    return TensorRule(nodes=nodes, weights=weights)


def box_rule(
    center: np.ndarray,
    half_width: float,
    width: float,
    order: int,
    breakpoints: Sequence[float] = (0.0,),
    max_panels: Optional[int] = None,
) -> TensorRule:
    """
    Tensor rule on the cube center + [-half_width, half_width]^d.

    Breakpoints are offsets from the center shared by all axes.
    """
    center = np.asarray(center, dtype=float)
    axes = []
    for c in center:
        nodes, weights = panel_rule(
            c - half_width,
            c + half_width,
            width,
            order,
            [c + b for b in breakpoints],
            max_panels,
        )
        axes.append((nodes, weights))
    return tensor_rule(axes)


def unit_cube_rule(d: int, panels: int, order: int) -> TensorRule:
    """Tensor rule on [0, 1]^d with equal panels per axis."""
    nodes, weights = panel_rule(0.0, 1.0, 1.0 / panels, order)
    return tensor_rule([(nodes, weights)] * d)


def envelope_scales(sq: SpectralQuantities, t: float) -> Tuple[float, float]:
    """
    (wide, narrow) length scales of the shifted kernel at time t.

    wide bounds the decay of |K| from above, narrow bounds the scale on which
    the complex Gaussian oscillates.
    """
    wide = math.sqrt(4.0 * t * sq.a_max**2 / sq.a0)
    narrow = math.sqrt(4.0 * t * sq.a_min)
    return wide, narrow


def truncation_radius(sq: SpectralQuantities, t: float, eta: float = 0.0, tol: float = 1e-8) -> float:
    """
    Radius beyond which the weighted Gaussian envelope is below tol.

    R(t) = w (sqrt(ln(1/tol) + d) + eta w / 2) with w = sqrt(4 t a_max^2 / a0).
    """
    wide, _ = envelope_scales(sq, t)
    return wide * (math.sqrt(math.log(1.0 / tol) + sq.d) + eta * wide / 2.0)


def gaussian_box_fraction(center: np.ndarray, lower: np.ndarray, upper: np.ndarray, scale: float) -> np.ndarray:
    """
    Mass fraction of the envelope exp(-|psi|^2/scale^2), centred at `center`,
    that lies inside the box [lower, upper]. Works on stacked centres.
    """
    inside = 0.5 * (
        scipy.special.erf((upper - center) / scale) - scipy.special.erf((lower - center) / scale)
    )
    return np.prod(np.clip(inside, 0.0, 1.0), axis=-1)


def integrate(
    integrand: Callable[[np.ndarray], np.ndarray],
    rule: TensorRule,
    chunk_size: int = DEFAULT_SETTINGS.chunk_size,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Weighted sum of integrand values over the rule, in fixed chunk order.

    Returns (integral, integral of the modulus).
    """
    total = None
    magnitude = None
    for start in range(0, rule.size, chunk_size):
        stop = min(start + chunk_size, rule.size)
        values = np.asarray(integrand(rule.nodes[start:stop]))
        weights = rule.weights[start:stop]
        part = np.tensordot(weights, values, axes=(0, 0))
        part_abs = np.tensordot(weights, np.abs(values), axes=(0, 0))
        total = part if total is None else total + part
        magnitude = part_abs if magnitude is None else magnitude + part_abs
    return total, magnitude
