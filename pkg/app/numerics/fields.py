"""
Input data for the semigroup and the resolvent.

A field is anything that can be sampled at stacked points and reports where it
lives: grid functions (app.numerics.grid) and analytic callables.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol, Sequence, Tuple, runtime_checkable

import numpy as np

from app.numerics.grid import GridFunction, GridSpec


@runtime_checkable
class Field(Protocol):
    @property
    def d(self) -> int: ...

    @property
    def N(self) -> int: ...

    @property
    def feature_scale(self) -> float: ...

    def evaluate(self, points) -> np.ndarray: ...

    def support(self) -> Optional[Tuple[np.ndarray, np.ndarray]]: ...

    def cell_edges(self, axis: int) -> Optional[np.ndarray]: ...


@dataclass(frozen=True)
class FunctionField:
    """
    Analytic field v: R^d -> C^N.

    func maps (M, d) points to (M, N) or, for N = 1, (M,) values. With a support
    box the field is zero outside it; feature_scale is the length on which v
    varies and caps the quadrature panel width.
    """
    func: Callable[[np.ndarray], np.ndarray]
    dimension: int
    components: int = 1
    lower: Optional[Sequence[float]] = None
    upper: Optional[Sequence[float]] = None
    feature_scale: float = 1.0
    label: str = field(default="field")

    @property
    def d(self) -> int:
        return self.dimension

    @property
    def N(self) -> int:
        return self.components

    def evaluate(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        values = np.asarray(self.func(points), dtype=complex)
        if values.ndim == 1:
            values = values[:, None]
        values = np.broadcast_to(values, (points.shape[0], self.components)).copy()
        box = self.support()
        if box is not None:
            outside = ~np.all((points >= box[0]) & (points <= box[1]), axis=-1)
            values[outside] = 0.0
        return values

    def support(self) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        if self.lower is None or self.upper is None:
            return None
        return np.asarray(self.lower, dtype=float), np.asarray(self.upper, dtype=float)

    def cell_edges(self, axis: int) -> Optional[np.ndarray]:
        return None

    def on_grid(self, spec: GridSpec, interpolation_order: int = 3) -> GridFunction:
        return GridFunction.from_callable(spec, self.evaluate, interpolation_order)


def gaussian_bump(d: int, width: float = 1.0, amplitude=1.0, center=None, components: int = 1) -> FunctionField:
    """v(x) = amplitude * exp(-|x - center|^2 / (2 width^2)), supported where it exceeds 1e-17."""
    center = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    amplitude = np.broadcast_to(np.asarray(amplitude, dtype=complex), (components,)).copy()
    reach = width * math.sqrt(2.0 * math.log(1e17))

    def func(points: np.ndarray) -> np.ndarray:
        gap = points - center
        return np.exp(-np.sum(gap * gap, axis=-1) / (2.0 * width**2))[:, None] * amplitude

    return FunctionField(
        func=func,
        dimension=d,
        components=components,
        lower=center - reach,
        upper=center + reach,
        feature_scale=width,
        label=f"gaussian(width={width})",
    )


def constant_field(d: int, value, half_width: float) -> FunctionField:
    """Constant field on the box [-half_width, half_width]^d."""
    value = np.atleast_1d(np.asarray(value, dtype=complex))
    return FunctionField(
        func=lambda points: np.broadcast_to(value, (points.shape[0], value.shape[0])),
        dimension=d,
        components=value.shape[0],
        lower=[-half_width] * d,
        upper=[half_width] * d,
        feature_scale=math.inf,
        label=f"constant({value.tolist()})",
    )


def ensure_field(v) -> Field:
    if isinstance(v, (GridFunction, FunctionField)):
        return v
    if isinstance(v, Field):
        return v
    raise TypeError(f"Expected a grid function or a field, got {type(v).__name__}")
