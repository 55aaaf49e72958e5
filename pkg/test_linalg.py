import math

import numpy as np
import pytest
import scipy.linalg
from numpy.testing import assert_allclose

from app.numerics.errors import (
    BranchCutHit,
    NonEllipticA,
    NotDiagonalizable,
    NotSimultaneous,
    NotSkew,
    SystemShapeError,
)
from app.numerics.linalg import (
    condition_number,
    matrix_function,
    matrix_power,
    principal_power,
    rotation,
    spectral_norm,
    spectral_quantities,
    validate_system,
)

ZERO_S = np.zeros((2, 2))


def test_scalar_system_spectrum(heat):
    assert heat.d == 2
    assert heat.N == 1
    assert heat.is_scalar
    assert_allclose(heat.lambdaA, [1.0])
    assert_allclose(heat.lambdaB, [0.0])


def test_shared_eigenvectors_reconstruct_both_matrices(shared):
    assert_allclose(shared.Y @ np.diag(shared.lambdaA) @ shared.Y_inv, shared.A, atol=1e-12)
    assert_allclose(shared.Y @ np.diag(shared.lambdaB) @ shared.Y_inv, shared.B, atol=1e-12)
    assert sorted(shared.lambdaA.real) == pytest.approx([1.0, 2.0])
    assert sorted(shared.lambdaB.real) == pytest.approx([3.0, 5.0])


def test_user_transformation_is_verified():
    A = [[1.0, 1.0], [0.0, 2.0]]
    Y = [[1.0, 1.0], [0.0, 1.0]]
    sys = validate_system(A, [[3.0, 2.0], [0.0, 5.0]], ZERO_S, Y=Y)
    assert_allclose(sys.Y, Y)

    with pytest.raises(NotSimultaneous):
        validate_system(A, np.diag([1.0, 2.0]), ZERO_S, Y=Y)


@pytest.mark.parametrize(
    "A, B, S, error",
    [
        ([[-1.0]], [[0.0]], ZERO_S, NonEllipticA),
        ([[1j]], [[0.0]], ZERO_S, NonEllipticA),
        ([[1.0]], [[0.0]], [[0.0, 1.0], [1.0, 0.0]], NotSkew),
        ([[1.0, 1.0], [0.0, 1.0]], [[0.0, 0.0], [0.0, 0.0]], ZERO_S, NotDiagonalizable),
        ([[1.0]], [[0.0, 0.0], [0.0, 0.0]], ZERO_S, SystemShapeError),
        ([[1.0]], [[0.0]], [[0.0]], SystemShapeError),
    ],
)
def test_invalid_systems_are_rejected(A, B, S, error):
    with pytest.raises(error):
        validate_system(A, B, S)


def test_validation_errors_are_value_errors():
    with pytest.raises(ValueError):
        validate_system([[-1.0]], [[0.0]], ZERO_S)


def test_spectral_quantities_of_diagonal_pair(pair):
    sq = spectral_quantities(pair, eta=0.3, p=2.0)
    a_max = abs(1.5 + 0.5j)
    assert sq.a_min == pytest.approx(1.0)
    assert sq.a_max == pytest.approx(a_max)
    assert sq.a0 == pytest.approx(1.0)
    assert sq.b0 == pytest.approx(3.0)
    assert sq.kappa == pytest.approx(1.0)
    assert sq.a1 == pytest.approx(a_max**2)
    assert sq.nu == pytest.approx(a_max**2 * 0.09 * 4.0)


def test_spectral_quantities_reject_bad_parameters(heat):
    with pytest.raises(ValueError):
        spectral_quantities(heat, eta=-0.1)
    with pytest.raises(ValueError):
        spectral_quantities(heat, p=0.5)


def test_kappa_is_condition_of_eigenvectors(shared):
    assert spectral_quantities(shared).kappa == pytest.approx(max(1.0, condition_number(shared)))


def test_principal_power():
    assert complex(principal_power(4.0, 0.5)) == pytest.approx(2.0)
    assert complex(principal_power(-2.0, 3)) == pytest.approx(-8.0)
    assert complex(principal_power(1j, 0.5)) == pytest.approx(np.exp(0.25j * math.pi))
    with pytest.raises(BranchCutHit):
        principal_power(-1.0, 0.5)
    with pytest.raises(BranchCutHit):
        principal_power(0.0, -1)


def test_matrix_square_root(shared):
    root = matrix_power(shared, 0.5)
    assert_allclose(root @ root, shared.A, atol=1e-12)


def test_matrix_exponential_matches_scipy(shared):
    t = 0.7
    decay = matrix_function(shared, lambda lam: np.exp(-lam * t), "B")
    assert_allclose(decay, scipy.linalg.expm(-t * shared.B), atol=1e-12)


def test_rotation_is_orthogonal_exponential():
    S = np.array([[0.0, 1.0, -0.5], [-1.0, 0.0, 0.3], [0.5, -0.3, 0.0]])
    for t in (0.0, 0.4, 3.0, -2.0):
        Q = rotation(S, t)
        assert_allclose(Q, scipy.linalg.expm(t * S), atol=1e-12)
        assert_allclose(Q @ Q.T, np.eye(3), atol=1e-12)


def test_spectral_norm_of_stack():
    stack = np.array([np.diag([3.0, -4.0]), [[0.0, 2.0], [0.0, 0.0]]])
    assert_allclose(spectral_norm(stack), [4.0, 2.0])
