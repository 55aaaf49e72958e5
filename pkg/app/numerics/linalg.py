"""
Complex dense matrix core for Ornstein-Uhlenbeck systems.

Validates the (A, B, S) triple, computes a simultaneous diagonalization of
A and B, applies scalar functions through that diagonalization and derives
the scalar spectral constants that feed every bound of the toolkit.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

import numpy as np
import scipy.linalg

from app.numerics.errors import (
    BranchCutHit,
    NonEllipticA,
    NotDiagonalizable,
    NotSimultaneous,
    NotSkew,
    SystemShapeError,
)

logger = logging.getLogger(__name__)

MAX_CONDITION = 1e8
SIMULTANEITY_TOL = 1e-9
RECONSTRUCTION_TOL = 1e-10
SKEW_TOL = 1e-12

# Generic complex mixing constant for the joint eigenproblem of A + gamma*B
_MIXING = 0.5772156649015329 + 0.3183098861837907j

Which = Literal["A", "B"]


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class OUSystem:
    """
    Validated Ornstein-Uhlenbeck system L v = A Lap v + <Sx, grad v> - B v.

    Attributes:
        A: Complex N x N diffusion matrix
        B: Complex N x N reaction matrix
        S: Real skew-symmetric d x d drift matrix
        Y: Transformation matrix with A = Y diag(lambdaA) Y^-1
        Y_inv: Inverse of Y
        lambdaA: Eigenvalues of A in the order of the columns of Y
        lambdaB: Eigenvalues of B in the same order
        name: Optional label used in logs and reports
    """
    A: np.ndarray
    B: np.ndarray
    S: np.ndarray
    Y: np.ndarray
    Y_inv: np.ndarray
    lambdaA: np.ndarray
    lambdaB: np.ndarray
    name: str = field(default="system")

    @property
    def d(self) -> int:
        return int(self.S.shape[0])

    @property
    def N(self) -> int:
        return int(self.A.shape[0])

    @property
    def is_scalar(self) -> bool:
        return self.N == 1

    def eigenvalues(self, which: Which = "A") -> np.ndarray:
        if which == "A":
            return self.lambdaA
        if which == "B":
            return self.lambdaB
        raise ValueError(f"Unknown matrix selector: {which}")

    def from_diagonal(self, diagonal: np.ndarray) -> np.ndarray:
        """
        Map diagonal entries (..., N) to matrices Y diag(.) Y^-1 of shape (..., N, N).
        """
        diagonal = np.asarray(diagonal, dtype=complex)
        return np.einsum("ik,...k,kj->...ij", self.Y, diagonal, self.Y_inv)


@dataclass(frozen=True)
class SpectralQuantities:
    """Scalar constants of a system for a weight growth rate eta and exponent p."""
    a_min: float
    a_max: float
    a0: float
    b0: float
    kappa: float
    a1: float
    nu: float
    d: int
    eta: float = 0.0
    p: float = 1.0


def _off_diagonal_norm(matrix: np.ndarray) -> float:
    return float(np.linalg.norm(matrix - np.diag(np.diag(matrix))))


def _joint_eigenvectors(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    norm_b = np.linalg.norm(B)
    if norm_b == 0.0:
        mixed = A
    else:
        mixed = A + _MIXING * (np.linalg.norm(A) / norm_b) * B
    _, vectors = np.linalg.eig(mixed)
    return vectors / np.linalg.norm(vectors, axis=0, keepdims=True)


def validate_system(
    A,
    B,
    S,
    Y=None,
    name: str = "system",
) -> OUSystem:
    """
    Validate (A, B, S) and build the cached simultaneous diagonalization.

    Args:
        A: Complex N x N diffusion matrix (nested lists or array)
        B: Complex N x N reaction matrix
        S: Real d x d drift matrix
        Y: Optional transformation matrix; verified, never trusted
        name: Label for logs and reports

    Returns:
        Validated OUSystem

    Raises:
        SystemShapeError: Shapes are inconsistent or d < 2
        NotSkew: S + S^T is not zero within tolerance
        NonEllipticA: Some eigenvalue of A has non-positive real part
        NotDiagonalizable: The eigenvector matrix is numerically singular
        NotSimultaneous: Y^-1 B Y is not diagonal within tolerance
    """
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    B = np.atleast_2d(np.asarray(B, dtype=complex))
    S = np.atleast_2d(np.asarray(S, dtype=float))

    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise SystemShapeError(f"A must be square, got shape {A.shape}")
    if B.shape != A.shape:
        raise SystemShapeError(f"B must have the shape of A {A.shape}, got {B.shape}")
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise SystemShapeError(f"S must be square, got shape {S.shape}")
    if S.shape[0] < 2:
        raise SystemShapeError(f"Spatial dimension must be at least 2, got {S.shape[0]}")

    skew_residual = np.linalg.norm(S + S.T)
    if skew_residual > SKEW_TOL * max(1.0, float(np.linalg.norm(S))):
        raise NotSkew(f"||S + S^T|| = {skew_residual:.3e} exceeds tolerance")

    eigenvalues_a = np.linalg.eigvals(A)
    if np.any(eigenvalues_a.real <= 0.0):
        raise NonEllipticA(
            f"A has eigenvalues with non-positive real part: {eigenvalues_a.tolist()}"
        )

    if Y is None:
        Y = _joint_eigenvectors(A, B)
    else:
        Y = np.atleast_2d(np.asarray(Y, dtype=complex))
        if Y.shape != A.shape:
            raise SystemShapeError(f"Y must have the shape of A {A.shape}, got {Y.shape}")

    condition = np.linalg.cond(Y)
    if not np.isfinite(condition) or condition > MAX_CONDITION:
        raise NotDiagonalizable(f"Eigenvector matrix condition number {condition:.3e} exceeds {MAX_CONDITION:.0e}")

    Y_inv = np.linalg.inv(Y)
    diag_a = Y_inv @ A @ Y
    diag_b = Y_inv @ B @ Y

    norm_a = float(np.linalg.norm(A))
    if _off_diagonal_norm(diag_a) > SIMULTANEITY_TOL * norm_a:
        raise NotDiagonalizable("Y^-1 A Y is not diagonal; A is not diagonalizable by Y")

    norm_b = float(np.linalg.norm(B))
    if _off_diagonal_norm(diag_b) >= SIMULTANEITY_TOL * (norm_b if norm_b > 0.0 else 1.0):
        raise NotSimultaneous("Y^-1 B Y is not diagonal; A and B are not simultaneously diagonalizable")

    lambda_a = np.diag(diag_a).copy()
    lambda_b = np.diag(diag_b).copy()

    for label, matrix, eigenvalues, norm in (("A", A, lambda_a, norm_a), ("B", B, lambda_b, norm_b)):
        residual = np.linalg.norm(Y @ np.diag(eigenvalues) @ Y_inv - matrix)
        if residual > RECONSTRUCTION_TOL * (norm if norm > 0.0 else 1.0):
            raise NotDiagonalizable(f"Reconstruction of {label} failed with residual {residual:.3e}")

    logger.debug(f"Validated system {name}: d={S.shape[0]}, N={A.shape[0]}, cond(Y)={condition:.3e}")

    return OUSystem(
        A=_frozen(A),
        B=_frozen(B),
        S=_frozen(S),
        Y=_frozen(Y),
        Y_inv=_frozen(Y_inv),
        lambdaA=_frozen(lambda_a),
        lambdaB=_frozen(lambda_b),
        name=name,
    )


def spectral_quantities(sys: OUSystem, eta: float = 0.0, p: float = 1.0) -> SpectralQuantities:
    """
    Compute a_min, a_max, a0, b0, kappa, a1 and nu for growth rate eta and exponent p.
    """
    if eta < 0.0:
        raise ValueError(f"eta must be non-negative, got {eta}")
    if not (1.0 <= p < math.inf):
        raise ValueError(f"p must lie in [1, inf), got {p}")

    moduli = np.abs(sys.lambdaA)
    a_min = float(moduli.min())
    a_max = float(moduli.max())
    a0 = float(sys.lambdaA.real.min())
    b0 = float(sys.lambdaB.real.min())
    kappa = max(1.0, float(np.linalg.cond(sys.Y, 2)))
    a1 = max(1.0, a_max**2 / (a_min * a0))
    nu = a_max**2 * eta**2 * p**2 / a0

    return SpectralQuantities(
        a_min=a_min,
        a_max=a_max,
        a0=a0,
        b0=b0,
        kappa=kappa,
        a1=a1,
        nu=nu,
        d=sys.d,
        eta=float(eta),
        p=float(p),
    )


def principal_power(z, exponent: float):
    """
    Principal branch z**exponent with arg z in (-pi, pi].

    Raises:
        BranchCutHit: exponent is not an integer and z lies on (-inf, 0]
    """
    z = np.asarray(z, dtype=complex)
    if not float(exponent).is_integer():
        on_cut = (z.imag == 0.0) & (z.real <= 0.0)
        if np.any(on_cut):
            raise BranchCutHit(f"Fractional power {exponent} evaluated on the branch cut at {z[on_cut].tolist()}")
    elif exponent < 0 and np.any(z == 0):
        raise BranchCutHit(f"Negative power {exponent} evaluated at zero")
    if float(exponent).is_integer():
        return z ** int(exponent)
    return np.exp(exponent * np.log(z))


def matrix_function(sys: OUSystem, f: Callable[[np.ndarray], np.ndarray], which: Which = "A") -> np.ndarray:
    """
    Apply a scalar function through the diagonalization: Y diag(f(lambda)) Y^-1.

    Args:
        sys: Validated system
        f: Scalar complex function, called on the eigenvalue array
        which: "A" or "B"

    Returns:
        Complex N x N matrix
    """
    values = np.asarray(f(sys.eigenvalues(which)), dtype=complex)
    if values.shape != (sys.N,):
        values = np.broadcast_to(values, (sys.N,))
    if not np.all(np.isfinite(values)):
        raise BranchCutHit(f"f is not finite on the spectrum of {which}: {values.tolist()}")
    return sys.from_diagonal(values)


def matrix_power(sys: OUSystem, exponent: float, which: Which = "A", scale: float = 1.0) -> np.ndarray:
    """(scale * M)**exponent on the principal branch, M in {A, B}."""
    return matrix_function(sys, lambda lam: principal_power(scale * lam, exponent), which)


def rotation(S, t: float) -> np.ndarray:
    """
    e^{tS} for a real skew-symmetric S.

    Uses the Hermitian eigendecomposition of iS, so the result is orthogonal up
    to rounding for every t.
    """
    S = np.atleast_2d(np.asarray(S, dtype=float))
    if t == 0.0 or not np.any(S):
        return np.eye(S.shape[0])
    frequencies, vectors = scipy.linalg.eigh(1j * S)
    phases = np.exp(-1j * t * frequencies)
    return ((vectors * phases) @ vectors.conj().T).real


def spectral_norm(matrices: np.ndarray) -> np.ndarray:
    """Largest singular value over the trailing two axes."""
    matrices = np.asarray(matrices)
    if matrices.shape[-1] == 1 and matrices.shape[-2] == 1:
        return np.abs(matrices[..., 0, 0])
    return np.linalg.norm(matrices, ord=2, axis=(-2, -1))


def condition_number(sys: OUSystem) -> float:
    return float(np.linalg.cond(sys.Y, 2))


def scalar_system(alpha: complex, delta: complex, S, name: Optional[str] = None) -> OUSystem:
    """Shorthand for N = 1 systems A = alpha, B = delta."""
    return validate_system([[alpha]], [[delta]], S, name=name or f"scalar(alpha={alpha}, delta={delta})")
