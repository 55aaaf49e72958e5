import math

import numpy as np
import pytest

from app.numerics.bounds import bound_C78
from app.numerics.errors import HypothesisViolated, NonDecayingB, QuadratureNotConverged, SpectralMarginTooSmall
from app.numerics.fields import constant_field, gaussian_bump
from app.numerics.grid import GridSpec
from app.numerics.linalg import scalar_system, spectral_quantities
from app.numerics.resolvent import (
    ResolventQuery,
    TimeQuadratureSettings,
    apply_resolvent,
    greens_function_probe,
    growth_bound,
    growth_rate,
    resolvent_estimate_check,
    resolvent_residual,
    time_nodes,
)
from app.numerics.weights import make_weight


def test_growth_rate_modes(damped_rotating):
    unit = make_weight("unit")
    assert growth_rate(damped_rotating, unit, None)["omega"] == pytest.approx(-0.5)
    flat = growth_rate(damped_rotating, unit, 2.0)
    assert flat["omega"] == pytest.approx(-0.5)
    assert flat["M"] == pytest.approx(1.0)

    weighted = growth_rate(damped_rotating, make_weight("cosh_abs", mu=0.3), 2.0, epsilon=0.1)
    # nu = a_max^2 eta^2 p^2 / a0 = 0.36
    assert weighted["omega"] == pytest.approx(-0.5 + 1.1 * 0.36 / 2.0)
    assert weighted["M"] >= 1.0


def test_weighted_sup_norm_uses_unweighted_growth(damped_rotating):
    for w in (make_weight("exp_abs", mu=0.3), make_weight("cosh_abs", mu=0.3)):
        growth = growth_rate(damped_rotating, w, None)
        assert growth["omega"] == pytest.approx(-0.5)
        assert growth["M"] == pytest.approx(1.0)


def test_weighted_sup_norm_decay_cap(damped_rotating):
    g = gaussian_bump(2)
    w = make_weight("exp_abs", mu=0.3)
    # cap vartheta a0 (Re lambda + b0) / a_max^2 = 0.95 * 0.095 >= 0.09
    bound = growth_bound(ResolventQuery(sys=damped_rotating, lam=-0.405, g=g, theta1=w, theta2=w, vartheta=0.95, p=None))
    assert bound.omega == pytest.approx(-0.5)
    assert bound.margin == pytest.approx(0.095)
    # cap 0.95 * 0.09 < 0.09
    with pytest.raises(HypothesisViolated):
        growth_bound(ResolventQuery(sys=damped_rotating, lam=-0.41, g=g, theta1=w, theta2=w, vartheta=0.95, p=None))


def test_growth_bound_hypotheses(damped_rotating):
    g = gaussian_bump(2)
    with pytest.raises(SpectralMarginTooSmall):
        growth_bound(ResolventQuery(sys=damped_rotating, lam=-0.5, g=g))
    with pytest.raises(SpectralMarginTooSmall):
        growth_bound(ResolventQuery(sys=damped_rotating, lam=-0.5 + 1e-4 + 3.0j, g=g))
    heavy = make_weight("cosh_abs", mu=5.0)
    with pytest.raises(HypothesisViolated):
        growth_bound(ResolventQuery(sys=damped_rotating, lam=0.5, g=g, theta2=heavy))

    bound = growth_bound(ResolventQuery(sys=damped_rotating, lam=0.5 + 2.0j, g=g))
    assert bound.omega == pytest.approx(-0.5)
    assert bound.margin == pytest.approx(1.0)


def test_time_nodes_cover_the_horizon():
    ts, ws, tail = time_nodes(margin=1.0, M=1.0)
    horizon = math.log(1e10)
    assert ts.min() > 0.0
    assert ts.max() < horizon
    assert ws.sum() == pytest.approx(horizon)
    assert tail == pytest.approx(1e-10)
    # integral of e^{-t} over the horizon
    assert np.dot(ws, np.exp(-ts)) == pytest.approx(1.0 - 1e-10, rel=1e-9)


def test_time_nodes_resolve_oscillation():
    horizon = math.log(1e10)
    ts, ws, _ = time_nodes(margin=1.0, M=1.0, frequency=20.0)
    assert ts.size % 24 == 0
    assert ts.size // 24 >= math.ceil(20.0 * horizon / (2.0 * math.pi))
    assert ws.sum() == pytest.approx(horizon)
    lam = 1.0 + 20.0j
    assert complex(np.dot(ws, np.exp(-lam * ts))) == pytest.approx((1.0 - math.exp(-horizon) * np.exp(-20.0j * horizon)) / lam, rel=1e-9)


def test_time_nodes_panel_limit():
    with pytest.raises(QuadratureNotConverged):
        time_nodes(margin=1.0, M=1.0, settings=TimeQuadratureSettings(max_panels=10), frequency=20.0)


def test_unresolved_time_rule_is_reported(damped_rotating):
    coarse = TimeQuadratureSettings(order=2, refined_order=3, max_phase=1e9)
    q = ResolventQuery(
        sys=damped_rotating, lam=1.5 + 20.0j, g=constant_field(2, [1.0], half_width=40.0), time_settings=coarse
    )
    with pytest.raises(QuadratureNotConverged):
        apply_resolvent(q, points=[[0.0, 0.0]])


@pytest.mark.slow
@pytest.mark.parametrize("lam", [1.5 + 0.5j, 1.5 + 20.0j, 1.5 - 60.0j])
def test_resolvent_of_constant(damped_rotating, lam):
    c = 1.0 - 2.0j
    q = ResolventQuery(sys=damped_rotating, lam=lam, g=constant_field(2, [c], half_width=40.0))
    values = apply_resolvent(q, points=[[0.0, 0.0], [1.0, -2.0]])
    for value in values[:, 0]:
        assert complex(value) == pytest.approx(c / (lam + 0.5), rel=1e-6)


@pytest.mark.slow
def test_resolvent_estimate_uses_constant_of_theta2(damped_rotating):
    theta1 = make_weight("custom", func=lambda points: np.full(points.shape[:-1], 3.0), eta=0.0, C_theta=3.0)
    grid = GridSpec.parse("-3:3:7").with_dimension(2)
    q = ResolventQuery(sys=damped_rotating, lam=1.0, g=gaussian_bump(2, width=1.0), theta1=theta1, grid=grid)
    record = resolvent_estimate_check(q)
    expected = bound_C78(spectral_quantities(damped_rotating, eta=0.0, p=2.0), 2.0, 1.0, 0.5)
    assert record.detail["C7"] == pytest.approx(expected["C7"])
    assert record.detail["C8"] == pytest.approx(expected["C8"])
    assert record.detail["M"] == pytest.approx(3.0)


@pytest.mark.slow
def test_resolvent_solves_the_equation(rotating):
    q = ResolventQuery(sys=rotating, lam=0.5 + 1.0j, g=gaussian_bump(2, width=1.0))
    assert resolvent_residual(q, [[0.0, 0.0], [0.8, -0.4]]) <= 5e-3


@pytest.mark.slow
def test_resolvent_estimate_record(damped_rotating):
    grid = GridSpec.parse("-5:5:21").with_dimension(2)
    q = ResolventQuery(sys=damped_rotating, lam=1.0, g=gaussian_bump(2, width=1.0), p=None, grid=grid)
    record = resolvent_estimate_check(q)
    assert record.passed
    assert record.bound == 1.0
    assert "pointwise" in record.detail["ratios"]
    assert record.detail["p"] == "sup"


def test_resolvent_needs_output_grid(damped_rotating):
    with pytest.raises(ValueError):
        apply_resolvent(ResolventQuery(sys=damped_rotating, lam=1.0, g=gaussian_bump(2)))


def test_greens_function_in_three_dimensions():
    sys = scalar_system(1.0, 1.0, np.zeros((3, 3)), name="screened")
    for r in (0.5, 1.0, 2.0):
        result = greens_function_probe(sys, [r, 0.0, 0.0], [0.0, 0.0, 0.0], T_max=60.0)
        expected = -math.exp(-r) / (4.0 * math.pi * r)
        assert result.value.shape == (1, 1)
        assert result.value[0, 0].real == pytest.approx(expected, rel=1e-8)
        assert abs(result.value[0, 0].imag) < 1e-14
        assert result.est_error < 1e-9


def test_greens_function_preconditions(heat, damped_rotating):
    with pytest.raises(NonDecayingB):
        greens_function_probe(heat, [1.0, 0.0], [0.0, 0.0], T_max=10.0)
    with pytest.raises(ValueError):
        greens_function_probe(damped_rotating, [1.0, 0.0], [1.0, 0.0], T_max=10.0)
