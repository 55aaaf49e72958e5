import cmath

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.numerics.errors import TooCloseToBoundary
from app.numerics.fields import FunctionField, gaussian_bump
from app.numerics.grid import GridFunction, GridSpec
from app.numerics.linalg import rotation
from app.numerics.semigroup import (
    SemigroupQuery,
    apply_generator_fd,
    apply_semigroup,
    boundedness_check,
    evaluate_diffusion,
    evaluate_semigroup,
    factorization_residual,
    interior_spec,
    semigroup_composition_residual,
    strong_continuity_probe,
)
from app.numerics.weights import make_weight

CENTER = np.array([0.5, -0.25])
WIDTH = 0.8
POINTS = np.array([[0.0, 0.0], [1.0, 0.5], [-0.7, 1.2], [2.0, -1.0]])


def propagated_gaussian(alpha, delta, S, x, t, derivative=None):
    """T(t) applied to exp(-|x - CENTER|^2 / (2 WIDTH^2)), or its x-derivative along `derivative`."""
    spread = WIDTH**2 + 2.0 * alpha * t
    Q = rotation(S, t)
    gap = Q @ np.asarray(x) - CENTER
    value = (WIDTH**2 / spread) ** (len(gap) / 2) * cmath.exp(-delta * t - (gap @ gap) / (2.0 * spread))
    if derivative is None:
        return value
    return -(gap @ Q[:, derivative]) / spread * value


@pytest.fixture
def bump():
    return gaussian_bump(2, width=WIDTH, center=CENTER)


@pytest.mark.parametrize("system, alpha, delta", [("damped_rotating", 1.0, 0.5), ("rotating", 1.0 + 0.5j, 2.0)])
def test_semigroup_of_gaussian(request, bump, system, alpha, delta):
    sys = request.getfixturevalue(system)
    t = 0.4
    result = evaluate_semigroup(sys, bump, t, POINTS, betas=[(), (0,), (1,)])
    for k, x in enumerate(POINTS):
        expected = propagated_gaussian(alpha, delta, sys.S, x, t)
        assert abs(result.values[()][k, 0] - expected) <= 1e-7
        for i in range(2):
            derivative = propagated_gaussian(alpha, delta, sys.S, x, t, derivative=i)
            assert abs(result.values[(i,)][k, 0] - derivative) <= 1e-7
    assert result.est_error < 1e-6


def test_semigroup_at_zero_time(bump, damped_rotating, coarse_grid):
    v = bump.on_grid(coarse_grid)
    assert apply_semigroup(SemigroupQuery(damped_rotating, 0.0, v)) is v
    at_zero = evaluate_semigroup(damped_rotating, bump, 0.0, POINTS)
    assert_allclose(at_zero.values[()], bump.evaluate(POINTS))
    assert at_zero.est_error == 0.0


def test_semigroup_time_is_checked(bump, damped_rotating):
    with pytest.raises(ValueError):
        evaluate_semigroup(damped_rotating, bump, -0.1, POINTS)
    with pytest.raises(ValueError):
        evaluate_semigroup(damped_rotating, bump, 0.0, POINTS, betas=[(0,)])
    with pytest.raises(ValueError):
        apply_semigroup(SemigroupQuery(damped_rotating, 0.5, bump))


def test_semigroup_of_matrix_system(shared):
    field = gaussian_bump(2, width=WIDTH, center=CENTER, amplitude=[1.0, 0.5j], components=2)
    values = evaluate_semigroup(shared, field, 0.3, POINTS).values[()]
    assert values.shape == (len(POINTS), 2)
    # v(x) = g(x) c, and T(t)(g c) is a linear combination per diagonal mode
    coefficients = shared.Y_inv @ np.array([1.0, 0.5j])
    for k, x in enumerate(POINTS):
        modes = [
            propagated_gaussian(shared.lambdaA[m], shared.lambdaB[m], shared.S, x, 0.3) * coefficients[m]
            for m in range(2)
        ]
        assert_allclose(values[k], shared.Y @ np.array(modes), atol=1e-7)


def test_factorization_through_diffusion(bump, rotating):
    assert factorization_residual(rotating, bump, 0.7, POINTS) <= 1e-8
    with pytest.raises(ValueError):
        evaluate_diffusion(rotating, bump, 0.0, POINTS)


def test_generator_by_finite_differences(damped_rotating):
    v = FunctionField(func=lambda p: p[:, 0] ** 2 + p[:, 1], dimension=2)
    for x in ([0.3, -1.2], [2.0, 0.5]):
        x0, x1 = x
        expected = 2.0 + 2.0 * x0 * x1 - x0 - 0.5 * (x0**2 + x1)
        assert apply_generator_fd(damped_rotating, v, x, 1e-2)[0] == pytest.approx(expected, abs=1e-8)


def test_generator_near_grid_boundary(damped_rotating, coarse_grid):
    v = GridFunction(coarse_grid, np.zeros(coarse_grid.shape))
    with pytest.raises(TooCloseToBoundary):
        apply_generator_fd(damped_rotating, v, [3.9, 0.0], 0.1)


def test_interior_spec(coarse_grid):
    inner = interior_spec(coarse_grid, max_count=5)
    assert inner.shape == (5, 5)
    assert inner.axes[0].min == pytest.approx(-3.0)
    assert inner.axes[0].max == pytest.approx(3.0)
    assert interior_spec(coarse_grid).shape == (13, 13)


@pytest.mark.slow
def test_composition_on_grid_data(damped_rotating):
    spec = GridSpec.parse("-8:8:49").with_dimension(2)
    v = gaussian_bump(2, width=1.5).on_grid(spec)
    assert semigroup_composition_residual(damped_rotating, v, 0.2, 0.3, max_targets=5) <= 1e-3


@pytest.mark.slow
def test_strong_continuity(bump, damped_rotating, coarse_grid):
    distances = strong_continuity_probe(
        damped_rotating, bump, make_weight("cosh_abs", mu=0.5), 2.0, [0.1, 0.01, 0.001], grid=coarse_grid
    )
    assert distances[0] > distances[1] > distances[2]
    assert distances[2] < 0.02


@pytest.mark.slow
@pytest.mark.parametrize("p", [2.0, None])
def test_semigroup_norms_stay_below_bounds(bump, damped_rotating, p):
    spec = GridSpec.parse("-6:6:25").with_dimension(2)
    rows = boundedness_check(damped_rotating, bump, make_weight("unit"), p, [0.1, 1.0], grid=spec)
    assert [row["t"] for row in rows] == [0.1, 1.0]
    for row in rows:
        for key in ("ratio_C4", "ratio_C5", "ratio_C6"):
            assert row[key] <= 1.0 + 1e-6
