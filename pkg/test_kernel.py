import cmath
import csv
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.numerics.bounds import bound_C
from app.numerics.errors import SystemNotScalar
from app.numerics.kernel import (
    KernelQuery,
    chapman_kolmogorov_residual,
    dirac_limit_probe,
    heat_kernel,
    heat_kernel_batch,
    kernel_csv_header,
    kernel_K,
    kernel_Ki,
    kernel_Kji,
    kernel_moments,
    kernel_slice_rows,
    observed_orders,
    riccati_residual,
    riccati_solution,
    weighted_kernel_l1,
    write_kernel_csv,
)
from app.numerics.linalg import rotation, spectral_quantities


def gaussian(alpha, delta, S, x, xi, t):
    gap = rotation(S, t) @ np.asarray(x) - np.asarray(xi)
    d = len(gap)
    return cmath.exp(
        -(d / 2) * cmath.log(4 * math.pi * alpha * t) - delta * t - (gap @ gap) / (4 * alpha * t)
    )


@pytest.mark.parametrize("t", [0.05, 0.7, 3.0])
def test_scalar_kernel_is_rotated_gaussian(rotating, t):
    x, xi = np.array([0.4, -1.2]), np.array([1.0, 0.3])
    H = heat_kernel(KernelQuery(sys=rotating, t=t, x=x, xi=xi))
    assert H.shape == (1, 1)
    expected = gaussian(1.0 + 0.5j, 2.0, rotating.S, x, xi, t)
    assert abs(H[0, 0] - expected) <= 1e-12 * abs(expected)


def test_kernel_of_diagonal_system_is_diagonal(pair):
    x, xi = np.array([0.2, 0.1]), np.array([-0.3, 0.5])
    H = heat_kernel(KernelQuery(sys=pair, t=0.5, x=x, xi=xi))
    zero = np.zeros((2, 2))
    assert abs(H[0, 1]) < 1e-15 and abs(H[1, 0]) < 1e-15
    assert H[0, 0] == pytest.approx(gaussian(1.0, 3.0, zero, x, xi, 0.5), rel=1e-12)
    assert H[1, 1] == pytest.approx(gaussian(1.5 + 0.5j, 5.0, zero, x, xi, 0.5), rel=1e-12)


def test_batch_agrees_with_pointwise(shared):
    rng = np.random.default_rng(7)
    x, xi = rng.normal(size=(5, 2)), rng.normal(size=(5, 2))
    batch = heat_kernel_batch(shared, x, xi, 0.8)
    for k in range(5):
        assert_allclose(batch[k], heat_kernel(KernelQuery(sys=shared, t=0.8, x=x[k], xi=xi[k])), atol=1e-14)


@pytest.mark.parametrize("t", [0.0, -1.0])
def test_kernel_needs_positive_time(heat, t):
    with pytest.raises(ValueError):
        heat_kernel(KernelQuery(sys=heat, t=t, x=[0.0, 0.0], xi=[0.0, 0.0]))


def test_shifted_kernel_is_radial(damped_rotating):
    r = 0.9
    values = [kernel_K(damped_rotating, [r * math.cos(a), r * math.sin(a)], 0.4)[0, 0] for a in (0.0, 1.0, 2.5)]
    assert_allclose(values, values[0], rtol=1e-13)


def test_kernel_derivatives_by_finite_differences(rotating):
    t, h = 0.6, 1e-5
    psi = np.array([0.3, -0.4])
    Q = rotation(rotating.S, t)

    def K_along(direction, step):
        return kernel_K(rotating, psi + step * direction, t)[0, 0]

    # K^i is the derivative along the rotated axis e^{tS} e_i
    for i in range(2):
        direction = Q[:, i]
        numeric = (K_along(direction, h) - K_along(direction, -h)) / (2 * h)
        assert kernel_Ki(rotating, psi, t, i)[0, 0] == pytest.approx(numeric, rel=1e-7)

    direction = Q[:, 0]
    numeric = (K_along(direction, h) - 2 * K_along(direction, 0.0) + K_along(direction, -h)) / h**2
    assert kernel_Kji(rotating, psi, t, 0, 0)[0, 0] == pytest.approx(numeric, rel=1e-4)


def test_riccati_residuals_vanish(rotating):
    for t in (0.1, 1.0, 4.0):
        residual = riccati_residual(rotating, t)
        scale = np.linalg.norm(riccati_solution(rotating, t).N_matrix, 2)
        assert residual.res_N <= 1e-7 * max(1.0, scale)
        assert residual.res_phi <= 1e-7 * max(1.0, abs(riccati_solution(rotating, t).phi))


def test_riccati_needs_scalar_system(pair):
    with pytest.raises(SystemNotScalar):
        riccati_solution(pair, 1.0)


def test_kernel_moments_of_heat_kernel(rotating):
    t = 0.5
    alpha, delta = 1.0 + 0.5j, 2.0
    mass = kernel_moments(rotating, t, 0)
    assert mass[0, 0] == pytest.approx(cmath.exp(-delta * t), rel=1e-7)
    assert abs(kernel_moments(rotating, t, 1, i=1)[0, 0]) < 1e-8
    second = kernel_moments(rotating, t, 2, i=0, j=0)
    assert second[0, 0] == pytest.approx(2 * alpha * t * cmath.exp(-delta * t), rel=1e-6)
    assert abs(kernel_moments(rotating, t, 2, i=0, j=1)[0, 0]) < 1e-8


def test_kernel_moments_reject_order(heat):
    with pytest.raises(ValueError):
        kernel_moments(heat, 1.0, 3)


@pytest.mark.parametrize("t", [0.25, 1.0, 4.0])
def test_weighted_l1_of_heat_kernel(heat, t):
    sq = spectral_quantities(heat)
    assert weighted_kernel_l1(heat, 0, 0.0, t) == pytest.approx(1.0, rel=1e-7)
    first = weighted_kernel_l1(heat, 1, 0.0, t, i=0)
    assert first == pytest.approx(1.0 / math.sqrt(math.pi * t), rel=1e-7)
    assert first <= bound_C(2, sq, t)
    mixed = weighted_kernel_l1(heat, 2, 0.0, t, i=0, j=1)
    assert mixed == pytest.approx(1.0 / (math.pi * t), rel=1e-7)
    assert mixed <= bound_C(3, sq, t)


def test_weighted_l1_respects_bounds_with_weight(damped_rotating):
    t, eta, p = 0.8, 0.4, 2.0
    sq = spectral_quantities(damped_rotating, eta=eta, p=p)
    for level in (0, 1):
        value = weighted_kernel_l1(damped_rotating, level, eta * p, t)
        assert value <= bound_C(level + 1, sq, t) * (1 + 1e-9)
    diagonal = weighted_kernel_l1(damped_rotating, 2, eta * p, t, i=1, j=1)
    assert diagonal <= bound_C(3, sq, t, delta_ij=1) * (1 + 1e-9)


@pytest.mark.slow
def test_chapman_kolmogorov(shared):
    residual = chapman_kolmogorov_residual(shared, [0.3, -0.5], [1.0, 0.2], 0.4, 0.7)
    assert residual <= 1e-7


@pytest.mark.slow
def test_dirac_limit_is_first_order(heat):
    t_sequence = [0.04, 0.02, 0.01]
    errors = dirac_limit_probe(heat, lambda y: np.exp(-np.sum(y * y, axis=-1)), [0.3, -0.2], t_sequence)
    assert errors[0] > errors[1] > errors[2]
    for order in observed_orders(t_sequence, errors):
        assert order == pytest.approx(1.0, abs=0.15)


def test_observed_orders():
    assert observed_orders([1.0, 0.5, 0.25], [4.0, 1.0, 0.25]) == pytest.approx([2.0, 2.0])
    assert observed_orders([1.0, 0.5], [1.0, 0.0]) == [math.inf]


def test_kernel_csv(tmp_path, pair):
    rows = kernel_slice_rows(pair, 0.5, np.linspace(0.0, 2.0, 5), axis=1)
    assert len(rows) == 5
    assert rows[0][:2] == [0.5, 0.0]
    path = tmp_path / "kernel.csv"
    write_kernel_csv(path, pair, rows)

    with open(path, newline="", encoding="utf-8") as handle:
        table = list(csv.reader(handle))
    assert table[0] == kernel_csv_header(pair)
    assert table[0][:4] == ["t", "psi", "K00_re", "K00_im"]
    assert len(table[0]) == 2 + 2 * 4
    assert len(table) == 6
