"""
qlikelihood.circuit

Gate-level circuit model and the builder for the four-qubit discrimination
experiments.

Register layout (most significant first):

    q[0] = a   ancilla entangled with b
    q[1] = b   measured coin
    q[2] = c   measured coin
    q[3] = d   ancilla entangled with c

Tracing out the ancillas leaves b and c each in rho_A (or rho_B after the
extra R_y(delta)). Measuring in basis M is done by applying M^dagger and
reading out in the computational basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from qlikelihood.discrimination import MeasurementBasis, PreparationParams, Strategy
from qlikelihood.errors import ConfigurationError, DomainError
from qlikelihood.linalg import CNOT, u3
from qlikelihood.synthesis import decompose_two_qubit, zyz_decompose

GateKind = Literal["u3", "cx"]
WhichState = Literal["A", "B"]

QUBIT_A, QUBIT_B, QUBIT_C, QUBIT_D = 0, 1, 2, 3
MEASURED = (QUBIT_B, QUBIT_C)


@dataclass(frozen=True)
class GateOp:
    kind: GateKind
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.kind == "u3":
            if len(self.qubits) != 1 or len(self.params) != 3:
                raise DomainError("u3 takes one qubit and three angles")
            if not all(math.isfinite(p) for p in self.params):
                raise DomainError("u3 angles must be finite")
        elif self.kind == "cx":
            if len(self.qubits) != 2 or self.params:
                raise DomainError("cx takes two qubits and no angles")
            if self.qubits[0] == self.qubits[1]:
                raise DomainError("cx control and target must differ")
        else:
            raise DomainError(f"unknown gate kind {self.kind!r}")
        if any(q < 0 for q in self.qubits):
            raise DomainError("qubit indices must be >= 0")

    @classmethod
    def rotation(cls, qubit: int, theta: float, phi: float, lam: float) -> "GateOp":
        return cls("u3", (qubit,), (theta, phi, lam))

    @classmethod
    def cnot(cls, control: int, target: int) -> "GateOp":
        return cls("cx", (control, target))

    def matrix(self) -> np.ndarray:
        if self.kind == "u3":
            return u3(*self.params)
        return CNOT


@dataclass(frozen=True)
class Circuit:
    """
    Gates in application order followed by a final measurement of
    ``measured_qubits`` (the first one is the leftmost outcome bit).
    ``comments`` are free-text lines carried into emitted QASM.
    """

    num_qubits: int
    ops: tuple[GateOp, ...] = ()
    measured_qubits: tuple[int, ...] = ()
    comments: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "ops", tuple(self.ops))
        object.__setattr__(self, "measured_qubits", tuple(int(q) for q in self.measured_qubits))
        object.__setattr__(self, "comments", tuple(self.comments))
        if self.num_qubits < 1:
            raise DomainError("a circuit needs at least one qubit")
        for op in self.ops:
            if max(op.qubits) >= self.num_qubits:
                raise DomainError(f"{op.kind} on qubit {max(op.qubits)} outside a {self.num_qubits}-qubit register")
        if not self.measured_qubits:
            raise DomainError("a circuit must measure at least one qubit")
        if len(set(self.measured_qubits)) != len(self.measured_qubits):
            raise DomainError("measured qubits must be distinct")
        if any(not 0 <= q < self.num_qubits for q in self.measured_qubits):
            raise DomainError("measured qubit outside the register")
        for line in self.comments:
            if "\n" in line:
                raise DomainError("comment lines cannot contain newlines")

    def count(self, kind: GateKind) -> int:
        return sum(1 for op in self.ops if op.kind == kind)

    def with_comments(self, comments: list[str] | tuple[str, ...]) -> "Circuit":
        return replace(self, comments=tuple(comments))


# ---------------------------------------------------------------------------
# Builder
# ---------------------------------------------------------------------------

def _ry_op(qubit: int, angle: float) -> GateOp:
    # u3(theta, 0, 0) is exactly R_y(theta)
    return GateOp.rotation(qubit, angle, 0.0, 0.0)


def _single_qubit_ops(u: np.ndarray, qubit: int) -> list[GateOp]:
    gate, _ = zyz_decompose(u)
    return [GateOp.rotation(qubit, gate.theta, gate.phi, gate.lam)]


def basis_change_ops(strategy: Strategy, basis: MeasurementBasis) -> list[GateOp]:
    """Gates applying M^dagger to (b, c); the global phase is dropped."""
    inverse = basis.matrix.conj().T
    if strategy == "direct":
        return _single_qubit_ops(inverse, QUBIT_B) + _single_qubit_ops(inverse, QUBIT_C)
    pair = (QUBIT_B, QUBIT_C)
    result = decompose_two_qubit(inverse)
    ops: list[GateOp] = []
    for layer in range(3):
        for gate in result.locals[2 * layer: 2 * layer + 2]:
            ops.append(GateOp.rotation(pair[gate.target], gate.theta, gate.phi, gate.lam))
        if layer < 2:
            control, target = result.cnots[layer]
            ops.append(GateOp.cnot(pair[control], pair[target]))
    return ops


def build_circuit(
    params: PreparationParams,
    strategy: Strategy,
    basis: MeasurementBasis,
    which_state: WhichState,
) -> Circuit:
    if strategy not in ("direct", "entangled"):
        raise ConfigurationError(f"unknown strategy {strategy!r}")
    if which_state not in ("A", "B"):
        raise ConfigurationError(f"which_state must be 'A' or 'B', got {which_state!r}")
    expected = 2 if strategy == "direct" else 4
    if basis.dimension != expected:
        raise ConfigurationError(
            f"{strategy} strategy needs a {expected}-dimensional basis, got {basis.dimension}"
        )
    ops = [
        _ry_op(QUBIT_B, params.beta),
        _ry_op(QUBIT_C, params.beta),
        GateOp.cnot(QUBIT_B, QUBIT_A),
        GateOp.cnot(QUBIT_C, QUBIT_D),
    ]
    if which_state == "B":
        ops += [_ry_op(QUBIT_B, params.delta), _ry_op(QUBIT_C, params.delta)]
    ops += basis_change_ops(strategy, basis)
    return Circuit(num_qubits=4, ops=tuple(ops), measured_qubits=MEASURED)
