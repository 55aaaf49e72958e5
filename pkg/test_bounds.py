import math

import pytest

from app.numerics.bounds import (
    BoundConstants,
    admissible_eta_squared,
    bound_C,
    bound_C78,
    bound_table,
    bracket,
    improper_integral_check,
    omega_bound,
)
from app.numerics.errors import HypothesisViolated
from app.numerics.linalg import spectral_quantities


def test_brackets_at_zero():
    assert bracket(1, 2, 0.0) == pytest.approx(1.0)
    assert bracket(2, 2, 0.0) == pytest.approx(math.sqrt(math.pi) / 2)
    assert bracket(3, 2, 0.0) == pytest.approx(1.0)
    assert bracket(3, 3, 0.0, a1=2.0, delta_ij=1) == pytest.approx(1.5 + 0.25)
    with pytest.raises(ValueError):
        bracket(4, 2, 0.0)


def test_brackets_grow_with_weight():
    values = [bracket(1, 3, s) for s in (0.0, 0.5, 2.0, 8.0)]
    assert values == sorted(values)


@pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
def test_unweighted_heat_constants(heat, t):
    sq = spectral_quantities(heat)
    assert bound_C(1, sq, t) == pytest.approx(1.0)
    assert bound_C(2, sq, t) == pytest.approx(math.sqrt(math.pi) / 2 / math.sqrt(t))
    assert bound_C(3, sq, t) == pytest.approx(1.0 / t)
    assert bound_C(4, sq, t, p=2.0, C_theta=3.0) == pytest.approx(3.0)


def test_damping_enters_exponentially(pair):
    sq = spectral_quantities(pair)
    assert bound_C(1, sq, 2.0) / bound_C(1, sq, 1.0) == pytest.approx(math.exp(-3.0))


def test_sup_norm_uses_exponent_one(damped_rotating):
    sq = spectral_quantities(damped_rotating, eta=0.3, p=2.0)
    assert bound_C(5, sq, 0.5, p=math.inf) == pytest.approx(bound_C(2, sq, 0.5))


def test_bound_arguments_are_checked(heat):
    sq = spectral_quantities(heat)
    with pytest.raises(ValueError):
        bound_C(1, sq, 0.0)
    with pytest.raises(ValueError):
        bound_C(7, sq, 1.0)
    for vartheta in (0.0, 1.0, 1.5):
        with pytest.raises(ValueError):
            bound_C78(sq, 2.0, 1.0, vartheta)


def test_constants_rows_and_table(damped_rotating):
    sq = spectral_quantities(damped_rotating, eta=0.2, p=2.0)
    constants = BoundConstants(sq=sq, C_theta=2.0, vartheta=0.4)
    row = constants.row(0.3)
    assert len(row) == 7
    assert row[0] == 0.3
    assert row[4] == pytest.approx(constants(4, 0.3))
    assert constants.C7 > 0.0 and constants.C8 > 0.0

    table = bound_table(sq, [0.1, 1.0], C_theta=2.0)
    assert [r[0] for r in table] == [0.1, 1.0]
    assert table[1] == pytest.approx(constants.row(1.0))


def test_improper_integrals_below_closed_forms(damped_rotating):
    sq = spectral_quantities(damped_rotating, eta=0.1, p=2.0)
    omega = omega_bound(sq, "lp_weighted", p=2.0)["omega"]
    check = improper_integral_check(sq, C_theta=1.0, vartheta=0.5, re_lambda=omega + 1.0, omega=omega)
    assert check["integral_C4"] <= check["bound_C7"]
    assert check["integral_C5"] <= check["bound_C8"]


def test_improper_integral_hypotheses(damped_rotating):
    sq = spectral_quantities(damped_rotating, eta=0.1, p=2.0)
    with pytest.raises(HypothesisViolated):
        improper_integral_check(sq, 1.0, 0.5, re_lambda=0.0, omega=0.0)
    with pytest.raises(HypothesisViolated):
        improper_integral_check(sq, 1.0, 0.5, re_lambda=1.0, omega=-5.0)

    heavy = spectral_quantities(damped_rotating, eta=3.0, p=2.0)
    with pytest.raises(HypothesisViolated):
        improper_integral_check(heavy, 1.0, 0.5, re_lambda=0.5, omega=0.0)


def test_admissible_eta(pair):
    sq = spectral_quantities(pair, p=2.0)
    assert admissible_eta_squared(sq, 1.0, -1.0, 0.5) == pytest.approx(0.5 * 1.0 * 2.0 / (2.5 * 4.0))


def test_omega_modes(pair, damped_rotating):
    sq = spectral_quantities(pair)
    unweighted = omega_bound(sq, "cb_unweighted")
    assert unweighted == {"omega": -3.0, "M": pytest.approx(2.5), "C_star": 1.0}
    flat = omega_bound(sq, "lp_weighted", p=2.0, C_theta=2.0)
    assert flat["omega"] == pytest.approx(-3.0)
    assert flat["M"] == pytest.approx(5.0)

    weighted_sq = spectral_quantities(damped_rotating, eta=0.3, p=2.0)
    weighted = omega_bound(weighted_sq, "lp_weighted", p=2.0, epsilon=0.1)
    assert weighted["omega"] == pytest.approx(-0.5 + 1.1 * weighted_sq.nu / 2.0)
    assert weighted["C_star"] >= 1.05

    with pytest.raises(ValueError):
        omega_bound(sq, "sup")
    with pytest.raises(ValueError):
        omega_bound(weighted_sq, epsilon=0.0)
