"""
qlikelihood.linalg

Dense complex linear algebra at dimensions 2 and 4.

Conventions:
  - Matrices are numpy arrays (complex128 unless stated otherwise).
  - Tensor products put the FIRST argument in the most significant position,
    so basis label |q0 q1> has index 2*q0 + q1.
  - Structural invariants (unitarity, Hermiticity, trace) are checked at
    STRUCT_TOL; algebraic identities in tests use ALGEBRA_TOL.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.linalg

from qlikelihood.errors import DimensionError, DomainError

STRUCT_TOL = 1e-10
ALGEBRA_TOL = 1e-12

_ALLOWED_DIMS = (1, 2, 4)

Subsystem = Literal["first", "second"]


# ---------------------------------------------------------------------------
# Validation helpers
# ---------------------------------------------------------------------------

def as_matrix(a: np.ndarray | list, dtype=complex) -> np.ndarray:
    """Return ``a`` as a finite 2-D array with dimensions in {1, 2, 4}."""
    m = np.asarray(a, dtype=dtype)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {m.shape}")
    if m.shape[0] not in _ALLOWED_DIMS or m.shape[1] not in _ALLOWED_DIMS:
        raise DimensionError(f"matrix dimensions must be in {_ALLOWED_DIMS}, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError("matrix has NaN or infinite entries")
    return m


def _require_square(m: np.ndarray) -> None:
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")


def _frozen(m: np.ndarray) -> np.ndarray:
    m = np.array(m, copy=True)
    m.setflags(write=False)
    return m


def unitarity_error(m: np.ndarray) -> float:
    """Max absolute entry of U^dagger U - I."""
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def is_unitary(m: np.ndarray, tol: float = STRUCT_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and unitarity_error(m) <= tol


def is_hermitian(m: np.ndarray, tol: float = STRUCT_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - m.conj().T)) <= tol)


def hermitian_eigvalsh(h: np.ndarray) -> np.ndarray:
    """
    Ascending eigenvalues of a small Hermitian matrix.

    Closed form at 2x2; LAPACK ``eigvalsh`` otherwise (the matrices here are
    at most 4x4, so there is no performance concern either way).
    """
    h = np.asarray(h, dtype=complex)
    if h.shape == (2, 2):
        a, d = h[0, 0].real, h[1, 1].real
        mean = 0.5 * (a + d)
        radius = np.hypot(0.5 * (a - d), abs(h[0, 1]))
        return np.array([mean - radius, mean + radius])
    return np.linalg.eigvalsh(h)


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UnitaryMatrix:
    """Square matrix with U^dagger U = I within STRUCT_TOL."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = as_matrix(self.matrix)
        _require_square(m)
        err = unitarity_error(m)
        if err > STRUCT_TOL:
            raise DomainError(f"matrix is not unitary (max |U^dag U - I| = {err:.3g})")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> "UnitaryMatrix":
        return UnitaryMatrix(self.matrix.conj().T)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite operator."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = as_matrix(self.matrix)
        _require_square(m)
        if not is_hermitian(m):
            raise DomainError("density matrix is not Hermitian")
        tr = np.trace(m)
        if abs(tr - 1.0) > STRUCT_TOL:
            raise DomainError(f"density matrix trace is {tr.real:.12g}, expected 1")
        if hermitian_eigvalsh(m)[0] < -STRUCT_TOL:
            raise DomainError("density matrix has a negative eigenvalue")
        # symmetrize away round-off so downstream code sees an exact Hermitian matrix
        object.__setattr__(self, "matrix", _frozen(0.5 * (m + m.conj().T)))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        if self.norm() ** 2 > 1.0 + STRUCT_TOL:
            raise DomainError(f"Bloch vector length {self.norm():.12g} exceeds 1")

    def norm(self) -> float:
        return float(np.sqrt(self.x ** 2 + self.y ** 2 + self.z ** 2))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def rotate_xz(self, angle: float) -> "BlochVector":
        """Rotate about the y axis by ``angle`` (z moves toward +x)."""
        c, s = np.cos(angle), np.sin(angle)
        return BlochVector(c * self.x + s * self.z, self.y, -s * self.x + c * self.z)


# ---------------------------------------------------------------------------
# Standard matrices
# ---------------------------------------------------------------------------

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# control = first (most significant) qubit
CNOT = np.array(
    [[1, 0, 0, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1],
     [0, 0, 1, 0]],
    dtype=complex,
)


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex)


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def u3(theta: float, phi: float, lam: float) -> np.ndarray:
    """The standard three-angle single-qubit gate (OpenQASM ``u3``)."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [[c, -np.exp(1j * lam) * s],
         [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c]],
        dtype=complex,
    )


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; ``a`` is the most significant subsystem."""
    a, b = np.asarray(a), np.asarray(b)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise DomainError("tensor_product operands must be finite")
    return np.kron(a, b)


def partial_trace(m: np.ndarray, keep: Subsystem = "first") -> np.ndarray:
    """Reduce a 4x4 two-qubit operator to the 2x2 operator on ``keep``."""
    m = np.asarray(m)
    if m.shape != (4, 4):
        raise DimensionError(f"partial_trace expects a 4x4 matrix, got {m.shape}")
    t = m.reshape(2, 2, 2, 2)  # (row_first, row_second, col_first, col_second)
    if keep == "first":
        return np.einsum("ijkj->ik", t)
    if keep == "second":
        return np.einsum("jijk->ik", t)
    raise DomainError(f"keep must be 'first' or 'second', got {keep!r}")


def bloch_to_density(b: BlochVector) -> DensityMatrix:
    """rho = (I + x X + y Y + z Z) / 2."""
    m = 0.5 * (I2 + b.x * PAULI_X + b.y * PAULI_Y + b.z * PAULI_Z)
    return DensityMatrix(m)


def density_to_bloch(rho: DensityMatrix) -> BlochVector:
    if rho.dim != 2:
        raise DimensionError("Bloch vectors exist only for single-qubit states")
    m = rho.matrix
    return BlochVector(
        float(2 * m[0, 1].real),
        float(-2 * m[0, 1].imag),
        float((m[0, 0] - m[1, 1]).real),
    )


def expm_antisymmetric(a: np.ndarray) -> UnitaryMatrix:
    """exp(a) for a real antisymmetric matrix; the result lies in SO(n)."""
    a = np.asarray(a)
    if np.iscomplexobj(a):
        if np.max(np.abs(a.imag)) > ALGEBRA_TOL:
            raise DomainError("generator must be real")
        a = a.real
    a = as_matrix(a, dtype=float)
    _require_square(a)
    if np.max(np.abs(a + a.T)) > ALGEBRA_TOL:
        raise DomainError("generator is not antisymmetric")
    r = scipy.linalg.expm(a)
    if unitarity_error(r) > STRUCT_TOL:
        raise DomainError("matrix exponential lost orthogonality")
    return UnitaryMatrix(r)


def expm_antihermitian(a: np.ndarray) -> UnitaryMatrix:
    """exp(a) for an anti-Hermitian generator (used when exploring SU(4))."""
    a = as_matrix(a)
    _require_square(a)
    if np.max(np.abs(a + a.conj().T)) > ALGEBRA_TOL:
        raise DomainError("generator is not anti-Hermitian")
    return UnitaryMatrix(scipy.linalg.expm(a))


# ---------------------------------------------------------------------------
# Random constructions
# ---------------------------------------------------------------------------

def random_antisymmetric(rng: np.random.Generator, dim: int = 4, scale: float = 1.0) -> np.ndarray:
    """Real antisymmetric matrix with Frobenius norm ``scale``."""
    g = rng.standard_normal((dim, dim))
    a = g - g.T
    return scale * a / np.linalg.norm(a)


def random_antihermitian(rng: np.random.Generator, dim: int = 4, scale: float = 1.0) -> np.ndarray:
    """Traceless anti-Hermitian matrix with Frobenius norm ``scale``."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    a = g - g.conj().T
    a -= np.trace(a) / dim * np.eye(dim)
    return scale * a / np.linalg.norm(a)


def random_density_matrix(rng: np.random.Generator, dim: int = 4) -> DensityMatrix:
    """Normalized complex Wishart matrix G G^dagger / tr(G G^dagger)."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    w = g @ g.conj().T
    return DensityMatrix(w / np.trace(w).real)


def random_unitary(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
