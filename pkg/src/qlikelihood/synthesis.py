"""
qlikelihood.synthesis

Two-qubit gate synthesis in the two-CNOT class:

    U = e^{i g} (l5 (x) l6) CNOT (l3 (x) l4) CNOT (l1 (x) l2)

Both CNOTs have the first qubit as control. The construction works in the
magic basis Q, where local gates SU(2) (x) SU(2) become SO(4):

  1. normalize U to SU(4) and form u = Q^dag U Q, gamma = u u^T
  2. U fits two CNOTs iff tr(gamma) is real; the spectrum of gamma is then
     {e^{+-i alpha}, e^{+-i beta}}
  3. V = CNOT (Rx(a) (x) Rz(b)) CNOT = exp(-i a/2 XX) exp(-i b/2 ZZ) has the
     same spectrum for a = (alpha+beta)/2, b = (alpha-beta)/2
  4. simultaneous real diagonalization of gamma(U) and gamma(V) gives
     G, H in SO(4) with u = G v H, which map back to the outer local layers
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from qlikelihood.errors import DomainError, RequiresThreeCnotsError, SynthesisError
from qlikelihood.linalg import CNOT, STRUCT_TOL, as_matrix, rx, rz, u3, unitarity_error

logger = logging.getLogger(__name__)

# columns: |Phi+>, i|Psi+>, |Psi->, i|Phi->
MAGIC = np.array(
    [[1, 0, 0, 1j],
     [0, 1j, 1, 0],
     [0, 1j, -1, 0],
     [1, 0, 0, -1j]],
    dtype=complex,
) / math.sqrt(2)
MAGIC_DAG = MAGIC.conj().T

MAX_RESIDUAL = 1e-8
CLASS_TOL = 1e-8
SNAP_THRESHOLD = 1e-10

# mixing weights for simultaneous diagonalization of Re/Im parts
_MIX_WEIGHTS = (1.0, 0.5772156649, 2.7182818285, -1.4142135624, 0.3183098862)


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SingleQubitGate:
    theta: float
    phi: float
    lam: float
    target: int

    def __post_init__(self) -> None:
        if not all(math.isfinite(x) for x in (self.theta, self.phi, self.lam)):
            raise DomainError("single-qubit gate angles must be finite")
        if self.target not in (0, 1):
            raise DomainError(f"gate target must be 0 or 1, got {self.target}")

    def matrix(self) -> np.ndarray:
        return u3(self.theta, self.phi, self.lam)

    def to_dict(self) -> dict:
        return {
            "theta": _sig15(self.theta),
            "phi": _sig15(self.phi),
            "lambda": _sig15(self.lam),
            "target": self.target,
        }


@dataclass(frozen=True)
class MakhlinInvariants:
    g1: complex
    g2: float

    def close_to(self, other: "MakhlinInvariants", tol: float = 1e-9) -> bool:
        return abs(self.g1 - other.g1) <= tol and abs(self.g2 - other.g2) <= tol


@dataclass(frozen=True)
class DecompositionResult:
    """
    ``locals`` = (l1, l2, l3, l4, l5, l6): pre-layer (l1, l2), mid-layer
    (l3, l4), post-layer (l5, l6); odd entries act on qubit 0, even on qubit 1.
    """

    locals: tuple[SingleQubitGate, ...]
    cnots: tuple[tuple[int, int], ...]
    global_phase: float
    residual: float

    def __post_init__(self) -> None:
        if len(self.locals) != 6 or len(self.cnots) != 2:
            raise SynthesisError("a decomposition has exactly 6 local gates and 2 CNOTs")

    def layer(self, k: int) -> np.ndarray:
        a, b = self.locals[2 * k], self.locals[2 * k + 1]
        return np.kron(a.matrix(), b.matrix())

    def reconstruct(self) -> np.ndarray:
        m = self.layer(0)
        for k, (control, target) in enumerate(self.cnots, start=1):
            m = self.layer(k) @ _cnot(control, target) @ m
        return cmath.exp(1j * self.global_phase) * m

    def to_dict(self) -> dict:
        return {
            "locals": [g.to_dict() for g in self.locals],
            "cnots": [{"control": c, "target": t} for c, t in self.cnots],
            "global_phase": _sig15(self.global_phase),
            "residual": self.residual,
        }


def _sig15(x: float) -> float:
    return float(f"{x:.15g}")


def _cnot(control: int, target: int) -> np.ndarray:
    if (control, target) == (0, 1):
        return CNOT
    if (control, target) == (1, 0):
        swap = np.eye(4)[[0, 2, 1, 3]]
        return swap @ CNOT @ swap
    raise SynthesisError(f"invalid CNOT placement {(control, target)}")


# ---------------------------------------------------------------------------
# Single-qubit Euler angles
# ---------------------------------------------------------------------------

def _wrap(angle: float) -> float:
    """Map to (-pi, pi]."""
    w = math.remainder(angle, 2.0 * math.pi)
    return math.pi if w == -math.pi else w


def zyz_decompose(u: np.ndarray, target: int = 0) -> tuple[SingleQubitGate, float]:
    """
    Euler angles with u = e^{i phase} u3(theta, phi, lam).

    u3(theta, phi, lam) = e^{i(phi+lam)/2} Rz(phi) Ry(theta) Rz(lam).
    """
    u = as_matrix(u)
    if u.shape != (2, 2) or unitarity_error(u) > STRUCT_TOL:
        raise DomainError("zyz_decompose expects a 2x2 unitary")
    v = u / cmath.sqrt(np.linalg.det(u))  # SU(2): [[a, -b*], [b, a*]]
    abs_a, abs_b = abs(v[1, 1]), abs(v[1, 0])
    theta = 2.0 * math.atan2(abs_b, abs_a)
    if abs_b < 1e-14:
        plus, minus = 2.0 * cmath.phase(v[1, 1]), 0.0
    elif abs_a < 1e-14:
        plus, minus = 0.0, 2.0 * cmath.phase(v[1, 0])
    else:
        plus, minus = 2.0 * cmath.phase(v[1, 1]), 2.0 * cmath.phase(v[1, 0])
    phi, lam = _wrap(0.5 * (plus + minus)), _wrap(0.5 * (plus - minus))
    if abs(theta) < 1e-14 and abs(phi + lam) < 1e-14:
        phi = lam = 0.0
    gate = SingleQubitGate(theta, phi, lam, target)
    phase = cmath.phase(np.vdot(gate.matrix(), u))  # tr(u3^dag u) = 2 e^{i phase}
    if abs(phase) < 1e-14:
        phase = 0.0
    return gate, phase


# ---------------------------------------------------------------------------
# Invariants
# ---------------------------------------------------------------------------

def _to_su4(u: np.ndarray) -> tuple[np.ndarray, float]:
    alpha = cmath.phase(np.linalg.det(u)) / 4.0
    return u * cmath.exp(-1j * alpha), alpha


def _gamma(u_su4: np.ndarray) -> np.ndarray:
    m = MAGIC_DAG @ u_su4 @ MAGIC
    return m @ m.T


def makhlin_invariants(u: np.ndarray) -> MakhlinInvariants:
    """G1 = tr^2(m) / (16 det U), G2 = (tr^2(m) - tr(m^2)) / (4 det U), m = u_B^T u_B."""
    u = _require_two_qubit_unitary(u)
    ub = MAGIC_DAG @ u @ MAGIC
    m = ub.T @ ub
    det = np.linalg.det(u)
    tr = np.trace(m)
    g1 = complex(tr * tr / (16.0 * det))
    g2 = complex((tr * tr - np.trace(m @ m)) / (4.0 * det))
    if abs(g1.imag) < 1e-15:
        g1 = complex(g1.real, 0.0)
    return MakhlinInvariants(g1=g1, g2=float(g2.real))


def cnot_count(u: np.ndarray) -> int:
    """Minimal number of CNOTs (0-3) from the spectrum of gamma(U)."""
    u = _require_two_qubit_unitary(u)
    gamma = _gamma(_to_su4(u)[0])
    tr = np.trace(gamma)
    if abs(tr - 4) < 1e-7 or abs(tr + 4) < 1e-7:
        return 0
    evs = np.sort(np.linalg.eigvals(gamma).imag)
    if abs(tr) < 1e-7 and np.allclose(evs, [-1, -1, 1, 1], atol=1e-7):
        return 1
    if abs(tr.imag) < CLASS_TOL:
        return 2
    return 3


def _require_two_qubit_unitary(u: np.ndarray) -> np.ndarray:
    u = as_matrix(u)
    if u.shape != (4, 4):
        raise DomainError(f"expected a 4x4 unitary, got shape {u.shape}")
    err = unitarity_error(u)
    if err > STRUCT_TOL:
        raise DomainError(f"matrix is not unitary (max |U^dag U - I| = {err:.3g})")
    return u


# ---------------------------------------------------------------------------
# Decomposition
# ---------------------------------------------------------------------------

def _real_diagonalizer(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    SO(4) matrix p and eigenvalues d with p^T m p = diag(d), for a complex
    symmetric unitary m (its real and imaginary parts commute).
    """
    for w in _MIX_WEIGHTS:
        _, p = np.linalg.eigh(m.real + w * m.imag)
        d = p.T @ m @ p
        if np.max(np.abs(d - np.diag(np.diag(d)))) < 1e-11:
            if np.linalg.det(p) < 0:
                p[:, -1] = -p[:, -1]
            return p, np.diag(d).copy()
        logger.debug("mixing weight %.4f failed to diagonalize, retrying", w)
    raise SynthesisError("could not find a real simultaneous eigenbasis")


def _factor_kron(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a 4x4 product operator into (a, b) with a (x) b = m."""
    r = m.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    uu, s, vh = np.linalg.svd(r)
    scale = math.sqrt(s[0])
    return scale * uu[:, 0].reshape(2, 2), scale * vh[0].reshape(2, 2)


def _mid_angles(gamma_u: np.ndarray) -> tuple[float, float]:
    mags = np.sort(np.abs(np.angle(np.linalg.eigvals(gamma_u))))
    beta = 0.5 * (mags[0] + mags[1])
    alpha = 0.5 * (mags[2] + mags[3])
    a, b = 0.5 * (alpha + beta), 0.5 * (alpha - beta)
    if abs(a) < SNAP_THRESHOLD:
        a = 0.0
    if abs(b) < SNAP_THRESHOLD:
        b = 0.0
    return a, b


def decompose_two_qubit(u: np.ndarray) -> DecompositionResult:
    u = _require_two_qubit_unitary(u)
    us = _to_su4(u)[0]
    gamma_u = _gamma(us)
    tr = np.trace(gamma_u)
    if abs(tr.imag) >= CLASS_TOL:
        inv = makhlin_invariants(u)
        raise RequiresThreeCnotsError(inv.g1, inv.g2, complex(tr))

    a, b = _mid_angles(gamma_u)
    mid = np.kron(rx(a), rz(b))
    v = CNOT @ mid @ CNOT

    um = MAGIC_DAG @ us @ MAGIC
    vm = MAGIC_DAG @ v @ MAGIC
    p, du = _real_diagonalizer(um @ um.T)
    q, dv = _real_diagonalizer(vm @ vm.T)
    _, order = linear_sum_assignment(np.abs(du[:, None] - dv[None, :]))
    q = q[:, order]
    if np.linalg.det(q) < 0:
        q[:, -1] = -q[:, -1]

    g = p @ q.T
    h = vm.conj().T @ g.T @ um
    post = MAGIC @ g @ MAGIC_DAG
    pre = MAGIC @ h @ MAGIC_DAG
    l5, l6 = _factor_kron(post)
    l1, l2 = _factor_kron(pre)

    gates = []
    for k, m in enumerate((l1, l2, rx(a), rz(b), l5, l6)):
        # SVD factors carry an arbitrary scale; rescale onto U(2)
        m = m / math.sqrt(abs(np.linalg.det(m)))
        gate, _ = zyz_decompose(m, target=k % 2)
        gates.append(gate)

    # the local phases and the determinant phase collapse into one phase, fitted directly
    bare = DecompositionResult(
        locals=tuple(gates), cnots=((0, 1), (0, 1)), global_phase=0.0, residual=0.0,
    ).reconstruct()
    global_phase = _wrap(cmath.phase(np.vdot(bare, u)))
    recon = cmath.exp(1j * global_phase) * bare
    residual = float(np.max(np.abs(recon - u)))
    logger.debug("decomposition: mid angles (%.6g, %.6g), residual %.3g", a, b, residual)
    if residual > MAX_RESIDUAL:
        raise SynthesisError(f"reconstruction residual {residual:.3g} exceeds {MAX_RESIDUAL:g}")
    return DecompositionResult(
        locals=tuple(gates), cnots=((0, 1), (0, 1)), global_phase=global_phase, residual=residual,
    )
