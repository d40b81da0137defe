"""
Tests for qlikelihood.circuit: gate model and the discrimination circuit builder.
"""

import math

import numpy as np
import pytest

from qlikelihood.circuit import MEASURED, Circuit, GateOp, basis_change_ops, build_circuit
from qlikelihood.discrimination import PreparationParams, basis_from_angle
from qlikelihood.errors import ConfigurationError, DomainError
from qlikelihood.simulator import born_probabilities


class TestGateOp:
    def test_rotation_matrix(self):
        op = GateOp.rotation(2, 0.3, 0.0, 0.0)
        assert op.qubits == (2,)
        assert op.params == (0.3, 0.0, 0.0)

    @pytest.mark.parametrize("kind, qubits, params", [
        ("u3", (0, 1), (0.1, 0.2, 0.3)),
        ("u3", (0,), (0.1,)),
        ("u3", (0,), (math.inf, 0.0, 0.0)),
        ("cx", (1, 1), ()),
        ("cx", (0, 1), (0.5,)),
        ("h", (0,), ()),
        ("cx", (-1, 0), ()),
    ])
    def test_rejects_invalid(self, kind, qubits, params):
        with pytest.raises(DomainError):
            GateOp(kind, qubits, params)


class TestCircuit:
    def test_rejects_qubit_outside_register(self):
        with pytest.raises(DomainError):
            Circuit(num_qubits=2, ops=(GateOp.cnot(0, 2),), measured_qubits=(0,))

    def test_requires_measurement(self):
        with pytest.raises(DomainError):
            Circuit(num_qubits=1)

    def test_rejects_duplicate_measurement(self):
        with pytest.raises(DomainError):
            Circuit(num_qubits=2, measured_qubits=(1, 1))

    def test_rejects_multiline_comment(self):
        with pytest.raises(DomainError):
            Circuit(num_qubits=1, measured_qubits=(0,), comments=("a\nb",))

    def test_comments_do_not_affect_equality(self):
        c = Circuit(num_qubits=1, measured_qubits=(0,))
        assert c.with_comments(["seed: 1"]) == c
        assert c.with_comments(["seed: 1"]).comments == ("seed: 1",)


class TestBuildCircuit:
    def test_zero_angles_give_all_zero_outcome(self):
        c = build_circuit(PreparationParams(0.0, 0.0), "direct", basis_from_angle(0.0), "A")
        assert born_probabilities(c).probs[0] == pytest.approx(1.0, abs=1e-12)

    def test_measured_marginal_is_rho_a_diagonal(self, reference_params):
        c = build_circuit(reference_params, "direct", basis_from_angle(0.0), "A")
        p = born_probabilities(c).as_array()
        assert p[0] + p[1] == pytest.approx(math.cos(0.1) ** 2, abs=1e-12)
        assert p[2] + p[3] == pytest.approx(math.sin(0.1) ** 2, abs=1e-12)

    def test_register_layout(self, reference_params):
        c = build_circuit(reference_params, "direct", basis_from_angle(0.4), "B")
        assert c.num_qubits == 4
        assert c.measured_qubits == MEASURED == (1, 2)
        assert c.ops[2] == GateOp.cnot(1, 0)
        assert c.ops[3] == GateOp.cnot(2, 3)

    def test_state_b_adds_delta_rotations(self, reference_params):
        basis = basis_from_angle(0.4)
        a = build_circuit(reference_params, "direct", basis, "A")
        b = build_circuit(reference_params, "direct", basis, "B")
        assert len(b.ops) == len(a.ops) + 2
        assert b.ops[4] == GateOp.rotation(1, 1.8, 0.0, 0.0)

    def test_direct_uses_two_cnots(self, reference_params, direct_report):
        c = build_circuit(reference_params, "direct", direct_report.basis, "A")
        assert c.count("cx") == 2

    def test_entangled_uses_four_cnots(self, reference_params, entangled_report):
        c = build_circuit(reference_params, "entangled", entangled_report.basis, "B")
        assert c.count("cx") == 4
        assert all(set(op.qubits) == {1, 2} for op in c.ops[6:] if op.kind == "cx")

    def test_dimension_mismatch(self, reference_params):
        with pytest.raises(ConfigurationError):
            build_circuit(reference_params, "entangled", basis_from_angle(0.3), "A")

    def test_unknown_strategy(self, reference_params):
        with pytest.raises(ConfigurationError):
            build_circuit(reference_params, "joint", basis_from_angle(0.3), "A")

    def test_unknown_state(self, reference_params):
        with pytest.raises(ConfigurationError):
            build_circuit(reference_params, "direct", basis_from_angle(0.3), "C")


def test_direct_basis_change_applies_inverse(direct_report):
    ops = basis_change_ops("direct", direct_report.basis)
    assert [op.qubits for op in ops] == [(1,), (2,)]
    m = ops[0].matrix()
    inverse = direct_report.basis.matrix.conj().T
    phase = np.vdot(m, inverse) / 2
    assert abs(abs(phase) - 1.0) < 1e-12
    assert np.allclose(phase * m, inverse, atol=1e-12)
