"""
qlikelihood.simulator

Small-register circuit simulation.

  born_probabilities       exact statevector evolution, marginal over the measured qubits
  noisy_probabilities      density-matrix evolution with depolarizing gates and readout flips
  sample_shots             seeded multinomial shot counts, split across workers
  sample_outcomes          seeded ordered single-shot record
  estimate_srel_from_counts plug-in relative entropy of two count tables

States are kept as tensors with one axis of length 2 per qubit (density
matrices: row axes then column axes), so gates act by ``tensordot`` on the
axes they touch. Outcome index k over the measured qubits reads as a
bitstring with the first measured qubit leftmost.
"""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from qlikelihood.circuit import Circuit, GateOp
from qlikelihood.coin import kl_divergence
from qlikelihood.discrimination import ProbDist
from qlikelihood.errors import DimensionError, DomainError, SimulationError
from qlikelihood.linalg import ALGEBRA_TOL, I2, PAULI_X, PAULI_Y, PAULI_Z

logger = logging.getLogger(__name__)

MAX_QUBITS = 10
SMOOTHING = 0.5

_PAULIS = (I2, PAULI_X, PAULI_Y, PAULI_Z)


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NoiseModel:
    """
    Synthetic hardware noise. ``readout_overrides`` holds (qubit, flip)
    pairs replacing ``readout_flip`` on individual measured qubits.
    """

    depolarizing_1q: float = 0.0
    depolarizing_2q: float = 0.0
    readout_flip: float = 0.0
    readout_overrides: tuple[tuple[int, float], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "readout_overrides",
            tuple(sorted((int(q), float(p)) for q, p in self.readout_overrides)),
        )
        for name in ("depolarizing_1q", "depolarizing_2q", "readout_flip"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v}")
        for q, p in self.readout_overrides:
            if not 0.0 <= p <= 1.0:
                raise DomainError(f"readout flip for qubit {q} must lie in [0, 1], got {p}")

    @property
    def has_gate_noise(self) -> bool:
        return self.depolarizing_1q > 0 or self.depolarizing_2q > 0

    @property
    def is_trivial(self) -> bool:
        return (
            not self.has_gate_noise
            and self.readout_flip == 0
            and all(p == 0 for _, p in self.readout_overrides)
        )

    def flip_for(self, qubit: int) -> float:
        return dict(self.readout_overrides).get(qubit, self.readout_flip)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["readout_overrides"] = {str(q): p for q, p in self.readout_overrides}
        return d


NOISELESS = NoiseModel()


@dataclass(frozen=True)
class ShotCounts:
    """Counts per measured bitstring; every bitstring is present, zeros included."""

    counts: dict[str, int]
    shots: int
    seed: int
    workers: int = 1
    noise: NoiseModel = field(default=NOISELESS)

    def __post_init__(self) -> None:
        if self.shots < 1:
            raise DomainError("shots must be >= 1")
        if sum(self.counts.values()) != self.shots:
            raise SimulationError(
                f"counts sum to {sum(self.counts.values())}, expected {self.shots} shots"
            )

    @property
    def bitstrings(self) -> list[str]:
        return sorted(self.counts)

    def as_array(self) -> np.ndarray:
        return np.array([self.counts[b] for b in self.bitstrings], dtype=float)

    def frequencies(self) -> np.ndarray:
        return self.as_array() / self.shots

    def to_dict(self) -> dict:
        return {
            "shots": self.shots,
            "seed": self.seed,
            "workers": self.workers,
            "noise": self.noise.to_dict(),
            "counts": {b: self.counts[b] for b in self.bitstrings},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ShotCounts":
        noise = d.get("noise") or {}
        overrides = tuple((int(q), float(p)) for q, p in (noise.get("readout_overrides") or {}).items())
        return cls(
            counts={str(k): int(v) for k, v in d["counts"].items()},
            shots=int(d["shots"]),
            seed=int(d["seed"]),
            workers=int(d.get("workers", 1)),
            noise=NoiseModel(
                depolarizing_1q=float(noise.get("depolarizing_1q", 0.0)),
                depolarizing_2q=float(noise.get("depolarizing_2q", 0.0)),
                readout_flip=float(noise.get("readout_flip", 0.0)),
                readout_overrides=overrides,
            ),
        )


@dataclass(frozen=True)
class SrelEstimate:
    smoothed: float   # add-1/2 per cell
    raw: float        # may be a FlaggedInfinity
    cells: int

    def __float__(self) -> float:
        return self.smoothed


def bitstrings(width: int) -> list[str]:
    return ["".join(bits) for bits in itertools.product("01", repeat=width)]


# ---------------------------------------------------------------------------
# Tensor kernels
# ---------------------------------------------------------------------------

def _apply(tensor: np.ndarray, u: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
    k = len(axes)
    gate = u.reshape((2,) * (2 * k))
    out = np.tensordot(gate, tensor, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def _apply_density(rho: np.ndarray, u: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    rho = _apply(rho, u, qubits)
    return _apply(rho, u.conj(), tuple(q + n for q in qubits))


def _depolarize(rho: np.ndarray, qubits: tuple[int, ...], p: float, n: int) -> np.ndarray:
    """(1-p) rho + p (I/2^k (x) Tr_qubits rho), written as a Pauli twirl."""
    if p == 0.0:
        return rho
    twirl = np.zeros_like(rho)
    for paulis in itertools.product(_PAULIS, repeat=len(qubits)):
        op = paulis[0]
        for extra in paulis[1:]:
            op = np.kron(op, extra)
        twirl += _apply_density(rho, op, qubits, n)
    twirl /= 4 ** len(qubits)
    return (1.0 - p) * rho + p * twirl


def _check_register(c: Circuit) -> None:
    if c.num_qubits > MAX_QUBITS:
        raise DimensionError(f"simulation is limited to {MAX_QUBITS} qubits, got {c.num_qubits}")


def _marginal(full: np.ndarray, measured: tuple[int, ...]) -> np.ndarray:
    """Sum a per-qubit probability tensor down to ``measured`` in that order."""
    n = full.ndim
    rest = tuple(q for q in range(n) if q not in measured)
    marg = full.sum(axis=rest) if rest else full
    kept = sorted(measured)
    order = [kept.index(q) for q in measured]
    return np.transpose(marg, order)


def _apply_readout(probs: np.ndarray, c: Circuit, noise: NoiseModel) -> np.ndarray:
    for axis, q in enumerate(c.measured_qubits):
        f = noise.flip_for(q)
        if f == 0.0:
            continue
        confusion = np.array([[1.0 - f, f], [f, 1.0 - f]])
        probs = np.moveaxis(np.tensordot(confusion, probs, axes=([1], [axis])), 0, axis)
    return probs


def _to_dist(probs: np.ndarray) -> ProbDist:
    flat = np.clip(probs.reshape(-1), 0.0, None)
    return ProbDist(tuple(flat / flat.sum()))


# ---------------------------------------------------------------------------
# Evolution
# ---------------------------------------------------------------------------

def statevector(c: Circuit) -> np.ndarray:
    """Final state from |0...0> as a (2,)*n tensor; norm checked after every gate."""
    _check_register(c)
    psi = np.zeros((2,) * c.num_qubits, dtype=complex)
    psi[(0,) * c.num_qubits] = 1.0
    for step, op in enumerate(c.ops):
        psi = _apply(psi, op.matrix(), op.qubits)
        drift = abs(np.vdot(psi, psi).real - 1.0)
        if drift > ALGEBRA_TOL:
            raise SimulationError(f"norm drift {drift:.3g} after gate {step} ({op.kind})")
    return psi


def density_matrix(c: Circuit, noise: NoiseModel = NOISELESS) -> np.ndarray:
    """Final density matrix as a (2,)*2n tensor, depolarizing after each gate."""
    _check_register(c)
    n = c.num_qubits
    rho = np.zeros((2,) * (2 * n), dtype=complex)
    rho[(0,) * (2 * n)] = 1.0
    for op in c.ops:
        rho = _apply_density(rho, op.matrix(), op.qubits, n)
        p = noise.depolarizing_1q if op.kind == "u3" else noise.depolarizing_2q
        rho = _depolarize(rho, op.qubits, p, n)
    return rho


def born_probabilities(c: Circuit) -> ProbDist:
    psi = statevector(c)
    return _to_dist(_marginal(np.abs(psi) ** 2, c.measured_qubits))


def noisy_probabilities(c: Circuit, noise: NoiseModel = NOISELESS) -> ProbDist:
    if noise.is_trivial:
        return born_probabilities(c)
    if noise.has_gate_noise:
        n = c.num_qubits
        rho = density_matrix(c, noise).reshape(2 ** n, 2 ** n)
        diag = np.real(np.diag(rho)).reshape((2,) * n)
    else:
        diag = np.abs(statevector(c)) ** 2
    probs = _marginal(diag, c.measured_qubits)
    return _to_dist(_apply_readout(probs, c, noise))


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def _split(shots: int, workers: int) -> list[int]:
    base, extra = divmod(shots, workers)
    return [base + (1 if k < extra else 0) for k in range(workers)]


def sample_shots(
    c: Circuit,
    shots: int,
    noise: NoiseModel = NOISELESS,
    seed: int = 0,
    workers: int = 1,
) -> ShotCounts:
    """
    Draw ``shots`` measurement results. Worker k draws its share from
    SeedSequence(seed).spawn(workers)[k]; the merged counts depend only on
    (seed, workers).
    """
    if shots < 1:
        raise DomainError("shots must be >= 1")
    if workers < 1:
        raise DomainError("workers must be >= 1")
    p = noisy_probabilities(c, noise).as_array()
    streams = np.random.SeedSequence(seed).spawn(workers)

    def draw(job: tuple[int, np.random.SeedSequence]) -> np.ndarray:
        n, stream = job
        return np.random.default_rng(stream).multinomial(n, p)

    jobs = list(zip(_split(shots, workers), streams))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(draw, jobs))
    else:
        parts = [draw(jobs[0])]
    total = np.sum(parts, axis=0)
    labels = bitstrings(len(c.measured_qubits))
    logger.debug("sampled %d shots over %d worker(s), seed %d", shots, workers, seed)
    return ShotCounts(
        counts={b: int(k) for b, k in zip(labels, total)},
        shots=shots,
        seed=seed,
        workers=workers,
        noise=noise,
    )


def sample_outcomes(c: Circuit, n: int, noise: NoiseModel = NOISELESS, seed: int = 0) -> np.ndarray:
    """Ordered record of ``n`` outcome indices (bitstring order of ``bitstrings``)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    p = noisy_probabilities(c, noise).as_array()
    return np.random.default_rng(seed).choice(p.size, size=n, p=p)


# ---------------------------------------------------------------------------
# Estimation
# ---------------------------------------------------------------------------

def estimate_srel_from_counts(
    counts_a: ShotCounts,
    counts_b: ShotCounts,
    smoothing: float = SMOOTHING,
) -> SrelEstimate:
    """Plug-in D_KL(A||B) of empirical frequencies, smoothed and raw, in nats."""
    if counts_a.bitstrings != counts_b.bitstrings:
        raise DimensionError("count tables cover different outcome spaces")
    a, b = counts_a.as_array(), counts_b.as_array()
    raw = kl_divergence(a / a.sum(), b / b.sum())
    pa = (a + smoothing) / (a.sum() + smoothing * a.size)
    pb = (b + smoothing) / (b.sum() + smoothing * b.size)
    smoothed = kl_divergence(pa, pb)
    if math.isinf(raw):
        logger.warning("raw estimate is infinite: B has empty cells where A does not")
    return SrelEstimate(smoothed=smoothed, raw=raw, cells=a.size)
