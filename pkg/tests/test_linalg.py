"""
Tests for qlikelihood.linalg: validated matrix types and small-dimension kernels.
"""

import numpy as np
import pytest

from qlikelihood.errors import DimensionError, DomainError
from qlikelihood.linalg import (
    ALGEBRA_TOL,
    CNOT,
    I2,
    PAULI_X,
    BlochVector,
    DensityMatrix,
    UnitaryMatrix,
    as_matrix,
    bloch_to_density,
    density_to_bloch,
    expm_antihermitian,
    expm_antisymmetric,
    hermitian_eigvalsh,
    partial_trace,
    random_antihermitian,
    random_antisymmetric,
    random_density_matrix,
    random_unitary,
    rx,
    ry,
    rz,
    tensor_product,
    u3,
)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

class TestAsMatrix:
    def test_accepts_lists(self):
        assert as_matrix([[1, 0], [0, 1]]).dtype == complex

    def test_rejects_dimension_three(self):
        with pytest.raises(DimensionError):
            as_matrix(np.eye(3))

    def test_rejects_vectors(self):
        with pytest.raises(DimensionError):
            as_matrix([1, 0])

    def test_rejects_nan(self):
        with pytest.raises(DomainError):
            as_matrix([[np.nan, 0], [0, 1]])


class TestUnitaryMatrix:
    def test_accepts_rotation(self):
        u = UnitaryMatrix(ry(0.3))
        assert u.dim == 2

    def test_rejects_non_unitary(self):
        with pytest.raises(DomainError):
            UnitaryMatrix(np.array([[1, 1], [0, 1]]))

    def test_matrix_is_read_only(self):
        u = UnitaryMatrix(I2)
        with pytest.raises(ValueError):
            u.matrix[0, 0] = 2

    def test_dagger_inverts(self):
        u = UnitaryMatrix(u3(0.4, 1.1, -0.7))
        assert np.allclose(u.matrix @ u.dagger().matrix, I2, atol=ALGEBRA_TOL)


class TestDensityMatrix:
    def test_rejects_non_hermitian(self):
        with pytest.raises(DomainError):
            DensityMatrix(np.array([[0.5, 0.1], [0.2, 0.5]]))

    def test_rejects_wrong_trace(self):
        with pytest.raises(DomainError):
            DensityMatrix(np.diag([0.5, 0.6]))

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(DomainError):
            DensityMatrix(np.diag([1.2, -0.2]))

    def test_purity_of_pure_state(self):
        assert DensityMatrix(np.diag([1.0, 0.0])).purity() == pytest.approx(1.0)

    def test_random_density_matrix_is_valid(self, rng):
        rho = random_density_matrix(rng, 4)
        assert rho.dim == 4
        assert hermitian_eigvalsh(rho.matrix)[0] >= -1e-12


class TestBloch:
    def test_rejects_long_vector(self):
        with pytest.raises(DomainError):
            BlochVector(1.0, 0.5, 0.0)

    def test_round_trip(self):
        b = BlochVector(0.3, -0.2, 0.5)
        back = density_to_bloch(bloch_to_density(b))
        assert np.allclose(back.as_array(), b.as_array(), atol=ALGEBRA_TOL)

    def test_rotate_xz_matches_ry_conjugation(self):
        b = BlochVector(0.1, 0.0, 0.9)
        rho = bloch_to_density(b).matrix
        r = ry(0.7)
        rotated = density_to_bloch(DensityMatrix(r @ rho @ r.conj().T))
        assert np.allclose(rotated.as_array(), b.rotate_xz(0.7).as_array(), atol=1e-12)

    def test_bloch_requires_single_qubit(self):
        with pytest.raises(DimensionError):
            density_to_bloch(DensityMatrix(np.eye(4) / 4))


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------

class TestHermitianEigvalsh:
    def test_closed_form_matches_lapack(self, rng):
        for _ in range(20):
            g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            h = g + g.conj().T
            assert np.allclose(hermitian_eigvalsh(h), np.linalg.eigvalsh(h), atol=1e-12)

    def test_four_by_four_ascending(self, rng):
        vals = hermitian_eigvalsh(random_density_matrix(rng, 4).matrix)
        assert np.all(np.diff(vals) >= 0)


class TestTensorAndTrace:
    def test_first_factor_is_most_significant(self):
        state = np.zeros(4)
        state[0] = 1.0
        flipped = tensor_product(PAULI_X, I2) @ state
        assert flipped[2] == 1.0

    def test_cnot_control_is_first_qubit(self):
        ket_10 = np.array([0, 0, 1, 0])
        assert np.array_equal(CNOT @ ket_10, np.array([0, 0, 0, 1]))

    @pytest.mark.parametrize("keep", ["first", "second"])
    def test_partial_trace_of_product(self, rng, keep):
        a = random_density_matrix(rng, 2).matrix
        b = random_density_matrix(rng, 2).matrix
        expected = a if keep == "first" else b
        assert np.allclose(partial_trace(np.kron(a, b), keep), expected, atol=ALGEBRA_TOL)

    def test_partial_trace_rejects_bad_keep(self):
        with pytest.raises(DomainError):
            partial_trace(np.eye(4), "third")

    def test_partial_trace_rejects_2x2(self):
        with pytest.raises(DimensionError):
            partial_trace(I2)

    def test_tensor_product_is_associative(self, rng):
        a, b, c = (random_unitary(rng, 2) for _ in range(3))
        left = tensor_product(tensor_product(a, b), c)
        right = tensor_product(a, tensor_product(b, c))
        assert np.allclose(left, right, atol=ALGEBRA_TOL)

    @pytest.mark.parametrize("keep", ["first", "second"])
    def test_partial_trace_of_wishart_is_a_density_matrix(self, rng, keep):
        for _ in range(200):
            rho = random_density_matrix(rng, 4).matrix
            reduced = partial_trace(rho, keep)
            assert np.trace(reduced).real == pytest.approx(np.trace(rho).real, abs=ALGEBRA_TOL)
            DensityMatrix(reduced)


class TestGates:
    def test_u3_reduces_to_ry(self):
        assert np.allclose(u3(0.9, 0.0, 0.0), ry(0.9), atol=ALGEBRA_TOL)

    def test_u3_phase_gate(self):
        assert np.allclose(u3(0.0, 0.0, 0.5), np.diag([1, np.exp(0.5j)]), atol=ALGEBRA_TOL)

    def test_rx_rz_are_unitary(self):
        for m in (rx(1.3), rz(-2.1)):
            assert np.allclose(m.conj().T @ m, I2, atol=ALGEBRA_TOL)


class TestExponentials:
    def test_antisymmetric_gives_so4(self, rng):
        a = random_antisymmetric(rng, 4, scale=0.8)
        assert np.linalg.norm(a) == pytest.approx(0.8)
        r = expm_antisymmetric(a).matrix
        assert np.allclose(r.imag, 0.0, atol=ALGEBRA_TOL)
        assert np.linalg.det(r).real == pytest.approx(1.0)

    def test_antisymmetric_determinant_is_one(self, rng):
        for _ in range(1000):
            a = random_antisymmetric(rng, 4, scale=rng.uniform(0.1, 5.0))
            assert abs(np.linalg.det(expm_antisymmetric(a).matrix) - 1.0) < 1e-10

    def test_rejects_symmetric_generator(self):
        with pytest.raises(DomainError):
            expm_antisymmetric(np.eye(4))

    def test_rejects_complex_generator(self):
        with pytest.raises(DomainError):
            expm_antisymmetric(1j * np.eye(2))

    def test_antihermitian_gives_su4(self, rng):
        a = random_antihermitian(rng, 4, scale=1.0)
        assert abs(np.trace(a)) < 1e-12
        u = expm_antihermitian(a).matrix
        assert abs(np.linalg.det(u) - 1.0) < 1e-10

    def test_random_unitary_is_unitary(self, rng):
        u = random_unitary(rng, 4)
        assert np.allclose(u.conj().T @ u, np.eye(4), atol=1e-12)

