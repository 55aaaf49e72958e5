"""
Uniform tensor grids and complex vector-valued grid functions.
"""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.ndimage

from app.numerics.errors import EmptyGrid

logger = logging.getLogger(__name__)

BOUNDARY_LAYER = 0.1
# Zero padding around the data before spline prefiltering
_SPLINE_PAD = 12


@dataclass(frozen=True)
class AxisSpec:
    min: float
    max: float
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise EmptyGrid(f"Axis needs at least 2 nodes, got {self.count}")
        if not self.max > self.min:
            raise EmptyGrid(f"Axis range [{self.min}, {self.max}] is empty")

    @property
    def h(self) -> float:
        return (self.max - self.min) / (self.count - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.count)


@dataclass(frozen=True)
class GridSpec:
    """Uniform tensor grid, one AxisSpec per spatial dimension."""
    axes: Tuple[AxisSpec, ...]

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """
        Parse "min:max:count,min:max:count,...".

        A single axis is repeated when combined with `with_dimension`.
        """
        axes = []
        for chunk in text.split(","):
            parts = chunk.strip().split(":")
            if len(parts) != 3:
                raise ValueError(f"Axis spec must read min:max:count, got '{chunk}'")
            axes.append(AxisSpec(float(parts[0]), float(parts[1]), int(parts[2])))
        return cls(tuple(axes))

    @classmethod
    def uniform(cls, d: int, lower: float, upper: float, count: int) -> "GridSpec":
        return cls(tuple(AxisSpec(lower, upper, count) for _ in range(d)))

    def with_dimension(self, d: int) -> "GridSpec":
        if self.d == d:
            return self
        if self.d == 1:
            return GridSpec(self.axes * d)
        raise ValueError(f"Grid has dimension {self.d}, system needs {d}")

    @property
    def d(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(axis.count for axis in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def h(self) -> np.ndarray:
        return np.array([axis.h for axis in self.axes])

    @property
    def lower(self) -> np.ndarray:
        return np.array([axis.min for axis in self.axes])

    @property
    def upper(self) -> np.ndarray:
        return np.array([axis.max for axis in self.axes])

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.h))

    def axis_nodes(self) -> List[np.ndarray]:
        return [axis.nodes for axis in self.axes]

    def points(self) -> np.ndarray:
        """All nodes as an (M, d) array in C order."""
        mesh = np.meshgrid(*self.axis_nodes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def interior_mask(self, fraction: float = BOUNDARY_LAYER) -> np.ndarray:
        """Boolean mask of nodes at least `fraction` of the extent away from every face."""
        masks = []
        for axis in self.axes:
            margin = fraction * (axis.max - axis.min)
            nodes = axis.nodes
            masks.append((nodes >= axis.min + margin - 1e-12) & (nodes <= axis.max - margin + 1e-12))
        mesh = np.meshgrid(*masks, indexing="ij")
        return np.logical_and.reduce(mesh)

    def interior_points(self, fraction: float = BOUNDARY_LAYER) -> np.ndarray:
        return self.points()[self.interior_mask(fraction).ravel()]

    def contains(self, points: np.ndarray, margin: float = 0.0) -> np.ndarray:
        points = np.atleast_2d(points)
        return np.all((points >= self.lower + margin) & (points <= self.upper - margin), axis=-1)

    def to_header(self) -> Dict[str, Any]:
        return {
            "d": self.d,
            "axes": [{"min": a.min, "max": a.max, "count": a.count} for a in self.axes],
        }

    @classmethod
    def from_header(cls, header: Dict[str, Any]) -> "GridSpec":
        return cls(tuple(AxisSpec(float(a["min"]), float(a["max"]), int(a["count"])) for a in header["axes"]))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """
    Complex N-vector samples on a GridSpec.

    values has shape spec.shape + (N,). Between nodes the data is interpolated
    multilinearly (interpolation_order=1) or by cubic splines (3); outside the
    grid it is zero.
    """
    spec: GridSpec
    values: np.ndarray
    est_error: float = 0.0
    interpolation_order: int = 3

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.ndim == self.spec.d:
            values = values[..., None]
        if values.shape[:-1] != self.spec.shape:
            raise ValueError(f"Values of shape {values.shape} do not match grid shape {self.spec.shape}")
        if self.interpolation_order not in (1, 3):
            raise ValueError(f"Interpolation order must be 1 or 3, got {self.interpolation_order}")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(
        cls,
        spec: GridSpec,
        func: Callable[[np.ndarray], np.ndarray],
        interpolation_order: int = 3,
    ) -> "GridFunction":
        samples = np.asarray(func(spec.points()), dtype=complex)
        if samples.ndim == 1:
            samples = samples[:, None]
        return cls(spec, samples.reshape(spec.shape + (samples.shape[-1],)), 0.0, interpolation_order)

    @property
    def d(self) -> int:
        return self.spec.d

    @property
    def N(self) -> int:
        return int(self.values.shape[-1])

    def flat_values(self) -> np.ndarray:
        return self.values.reshape(-1, self.N)

    def support(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.spec.lower, self.spec.upper

    def cell_edges(self, axis: int) -> Optional[np.ndarray]:
        return self.spec.axes[axis].nodes

    @property
    def feature_scale(self) -> float:
        return float(np.min(self.spec.h))

    @cached_property
    def _coefficients(self) -> List[np.ndarray]:
        parts = []
        for component in range(self.N):
            for part in (self.values[..., component].real, self.values[..., component].imag):
                if self.interpolation_order == 1:
                    parts.append(np.ascontiguousarray(part))
                    continue
                padded = np.pad(part, _SPLINE_PAD, mode="constant")
                parts.append(scipy.ndimage.spline_filter(padded, order=3, mode="grid-constant"))
        return parts

    def evaluate(self, points) -> np.ndarray:
        """Interpolated values at (M, d) points, shape (M, N)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        coords = ((points - self.spec.lower) / self.spec.h).T
        pad = 0 if self.interpolation_order == 1 else _SPLINE_PAD
        result = np.zeros((points.shape[0], self.N), dtype=complex)
        for component in range(self.N):
            real, imag = self._coefficients[2 * component], self._coefficients[2 * component + 1]
            kwargs = dict(order=self.interpolation_order, mode="grid-constant", cval=0.0, prefilter=False)
            result[:, component] = scipy.ndimage.map_coordinates(real, coords + pad, **kwargs) + 1j * (
                scipy.ndimage.map_coordinates(imag, coords + pad, **kwargs)
            )
        inside = self.spec.contains(points)
        result[~inside] = 0.0
        return result

    def with_values(self, values: np.ndarray, est_error: float = 0.0) -> "GridFunction":
        return GridFunction(self.spec, values, est_error, self.interpolation_order)


def write_grid_csv(path, function: GridFunction) -> None:
    """
    RFC-4180 CSV: node coordinates x0..x{d-1}, then re/im pairs per component.
    """
    header = [f"x{k}" for k in range(function.d)]
    for component in range(function.N):
        header.extend([f"v{component}_re", f"v{component}_im"])
    points = function.spec.points()
    values = function.flat_values()
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for point, row in zip(points, values):
            writer.writerow([*map(float, point), *[x for z in row for x in (float(z.real), float(z.imag))]])


def read_grid_csv(path, spec: GridSpec, interpolation_order: int = 3) -> GridFunction:
    """Read a grid CSV written in node order of `spec`."""
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader if row]
    if len(rows) != spec.size:
        raise ValueError(f"CSV holds {len(rows)} nodes, grid has {spec.size}")
    data = np.array(rows)
    pairs = data[:, spec.d :]
    if pairs.shape[1] % 2 or len(header) != data.shape[1]:
        raise ValueError("CSV value columns must come in re/im pairs")
    values = pairs[:, 0::2] + 1j * pairs[:, 1::2]
    return GridFunction(spec, values.reshape(spec.shape + (values.shape[-1],)), 0.0, interpolation_order)


def write_grid_header(path, spec: GridSpec, extra: Optional[Dict[str, Any]] = None) -> None:
    header = spec.to_header()
    if extra:
        header.update(extra)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(header, handle, indent=2)


def read_grid_header(path) -> GridSpec:
    with open(path, encoding="utf-8") as handle:
        return GridSpec.from_header(json.load(handle))


def sample_points(spec: GridSpec, indices: Sequence[Sequence[int]]) -> np.ndarray:
    """Coordinates of the nodes with the given multi-indices."""
    nodes = spec.axis_nodes()
    return np.array([[nodes[k][i] for k, i in enumerate(index)] for index in indices])
