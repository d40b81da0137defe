"""
qlikelihood.study

End-to-end studies that tie the engine, the synthesized circuits and the
simulator together. The CLI is a thin layer over these functions.

Normalization: every strategy value is reported per measured qubit. Both
circuit families measure two qubits per shot, so a KL divergence between
2-bit outcome distributions is halved.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from qlikelihood import __version__
from qlikelihood.circuit import Circuit, build_circuit
from qlikelihood.coin import (
    SlopeFit,
    cumulative_log_likelihood,
    fit_slope,
    kl_divergence,
    nats_to_bits,
)
from qlikelihood.discrimination import (
    OptimizerConfig,
    PreparationParams,
    Strategy,
    StrategyReport,
    optimize_direct,
    optimize_entangled,
    prepare_states,
    reference_convention_matches,
)
from qlikelihood.errors import DomainError
from qlikelihood.simulator import (
    NOISELESS,
    NoiseModel,
    ShotCounts,
    SrelEstimate,
    estimate_srel_from_counts,
    noisy_probabilities,
    sample_outcomes,
    sample_shots,
)

logger = logging.getLogger(__name__)

STRATEGIES: tuple[Strategy, ...] = ("direct", "entangled")
NOISE_SWEEP_2Q = (0.0, 0.01, 0.02, 0.05, 0.1)


def run_metadata(command: str, params: dict, seed: int | None) -> dict:
    """Provenance block embedded in every output file (no timestamps)."""
    return {
        "tool": "qlikelihood",
        "version": __version__,
        "command": command,
        "params": params,
        "seed": seed,
    }


def optimize_strategy(params: PreparationParams, strategy: Strategy, cfg: OptimizerConfig) -> StrategyReport:
    rho_a, rho_b = prepare_states(params)
    if strategy == "direct":
        return optimize_direct(rho_a, rho_b, cfg)
    if strategy == "entangled":
        return optimize_entangled(rho_a, rho_b, cfg)
    raise DomainError(f"unknown strategy {strategy!r}")


# ---------------------------------------------------------------------------
# Strategy comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Comparison:
    direct: StrategyReport
    entangled: StrategyReport

    @property
    def diff(self) -> float:
        """ent - dir, nats per qubit."""
        return self.entangled.s_rel - self.direct.s_rel

    def table(self) -> dict[str, dict[str, float]]:
        rows = {}
        for unit, conv in (("nats", float), ("bits", nats_to_bits)):
            for norm, factor in (("per_qubit", 1.0), ("per_pair", 2.0)):
                rows[f"{unit}_{norm}"] = {
                    "direct": conv(self.direct.s_rel * factor),
                    "entangled": conv(self.entangled.s_rel * factor),
                    "diff": conv(self.diff * factor),
                }
        return rows

    def to_dict(self) -> dict:
        return {
            "direct": self.direct.to_dict(),
            "entangled": self.entangled.to_dict(),
            "diff_nats_per_qubit": self.diff,
            "table": self.table(),
            "reference_convention_matches": reference_convention_matches(self.direct, self.entangled),
        }


def compare_strategies(params: PreparationParams, cfg: OptimizerConfig | None = None) -> Comparison:
    cfg = cfg or OptimizerConfig()
    rho_a, rho_b = prepare_states(params)
    direct = optimize_direct(rho_a, rho_b, cfg)
    entangled = optimize_entangled(rho_a, rho_b, cfg)
    logger.info("S_rel dir %.6f, ent %.6f nats/qubit", direct.s_rel, entangled.s_rel)
    return Comparison(direct, entangled)


# ---------------------------------------------------------------------------
# Circuits and simulation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StrategyCircuits:
    report: StrategyReport
    circuit_a: Circuit
    circuit_b: Circuit


def strategy_circuits(
    params: PreparationParams,
    strategy: Strategy,
    cfg: OptimizerConfig | None = None,
    report: StrategyReport | None = None,
) -> StrategyCircuits:
    """Optimize ``strategy`` (unless a report is given) and build the A/B circuits."""
    cfg = cfg or OptimizerConfig()
    report = report or optimize_strategy(params, strategy, cfg)
    return StrategyCircuits(
        report=report,
        circuit_a=build_circuit(params, strategy, report.basis, "A"),
        circuit_b=build_circuit(params, strategy, report.basis, "B"),
    )


@dataclass(frozen=True)
class SimulationResult:
    strategy: Strategy
    counts_a: ShotCounts
    counts_b: ShotCounts
    estimate_per_pair: SrelEstimate
    exact_per_qubit: float
    analytic_per_qubit: float

    @property
    def estimate_per_qubit(self) -> float:
        return self.estimate_per_pair.smoothed / 2

    def to_dict(self) -> dict:
        raw = self.estimate_per_pair.raw
        return {
            "strategy": self.strategy,
            "s_rel_estimate_nats_per_qubit": self.estimate_per_qubit,
            "s_rel_raw_nats_per_qubit": raw / 2 if math.isfinite(raw) else None,
            "raw_infinite": not math.isfinite(raw),
            "s_rel_exact_nats_per_qubit": self.exact_per_qubit,
            "s_rel_analytic_nats_per_qubit": self.analytic_per_qubit,
            "counts_a": self.counts_a.to_dict(),
            "counts_b": self.counts_b.to_dict(),
        }


def _child_seeds(seed: int, n: int) -> list[int]:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(n)]


def exact_circuit_srel(circuits: StrategyCircuits, noise: NoiseModel = NOISELESS) -> float:
    """Per-qubit D_KL between the A and B circuit distributions under ``noise``."""
    p = noisy_probabilities(circuits.circuit_a, noise).as_array()
    q = noisy_probabilities(circuits.circuit_b, noise).as_array()
    return kl_divergence(p, q) / 2


def simulate_strategy(
    circuits: StrategyCircuits,
    shots: int,
    noise: NoiseModel = NOISELESS,
    seed: int = 0,
    workers: int = 1,
) -> SimulationResult:
    seed_a, seed_b = _child_seeds(seed, 2)
    counts_a = sample_shots(circuits.circuit_a, shots, noise, seed_a, workers)
    counts_b = sample_shots(circuits.circuit_b, shots, noise, seed_b, workers)
    return SimulationResult(
        strategy=circuits.report.strategy,
        counts_a=counts_a,
        counts_b=counts_b,
        estimate_per_pair=estimate_srel_from_counts(counts_a, counts_b),
        exact_per_qubit=exact_circuit_srel(circuits, noise),
        analytic_per_qubit=circuits.report.s_rel,
    )


# ---------------------------------------------------------------------------
# Likelihood decay curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayCurves:
    ns: np.ndarray
    columns: dict[str, np.ndarray]
    slopes: dict[str, SlopeFit]
    seed: int
    shots_per_point: int
    reports: dict[str, StrategyReport] = field(default_factory=dict)

    def csv_columns(self) -> dict[str, np.ndarray]:
        return {"N": self.ns, **{f"log_likelihood_{s}": v for s, v in self.columns.items()}}


def _direct_record_ll(circuits: StrategyCircuits, n_max: int, noise: NoiseModel, seed: int) -> np.ndarray:
    # two qubit outcomes per shot; flatten (b, c) bits into one per-qubit record
    shots = math.ceil(n_max / 2)
    outcomes = sample_outcomes(circuits.circuit_a, shots, noise, seed)
    bits = np.stack([outcomes >> 1, outcomes & 1], axis=1).reshape(-1)[:n_max]
    q = noisy_probabilities(circuits.circuit_b, noise).as_array()
    model = np.array([q[0] + q[1], q[2] + q[3]])  # marginal of bit b
    return cumulative_log_likelihood(bits, model)


def _entangled_record_ll(circuits: StrategyCircuits, n_max: int, noise: NoiseModel, seed: int) -> np.ndarray:
    # one 4-outcome result per pair; row N scores floor(N/2) pairs
    pairs = max(n_max // 2, 1)
    outcomes = sample_outcomes(circuits.circuit_a, pairs, noise, seed)
    q = noisy_probabilities(circuits.circuit_b, noise).as_array()
    per_pair = np.concatenate([[0.0], cumulative_log_likelihood(outcomes, q)])
    return per_pair[np.arange(1, n_max + 1) // 2]


_RECORD_SCORERS = {"direct": _direct_record_ll, "entangled": _entangled_record_ll}
# rows per independent record
_RECORD_STEP = {"direct": 1, "entangled": 2}


def likelihood_decay(
    params: PreparationParams,
    strategies: Sequence[Strategy] = STRATEGIES,
    n_max: int = 2000,
    shots_per_point: int = 1,
    noise: NoiseModel = NOISELESS,
    seed: int = 0,
    cfg: OptimizerConfig | None = None,
) -> DecayCurves:
    """
    Log-likelihood that the measured qubits were in rho_B, as a function of
    the number N of qubits measured. Records are drawn from the A circuit and
    scored against the B circuit distribution; each column averages
    ``shots_per_point`` independent records.
    """
    if n_max < 2:
        raise DomainError("n_max must be >= 2")
    if shots_per_point < 1:
        raise DomainError("shots_per_point must be >= 1")
    cfg = cfg or OptimizerConfig()
    ns = np.arange(1, n_max + 1)
    columns, slopes, reports = {}, {}, {}
    record_seeds = _child_seeds(seed, shots_per_point)
    for strategy in strategies:
        circuits = strategy_circuits(params, strategy, cfg)
        runs = [_RECORD_SCORERS[strategy](circuits, n_max, noise, s) for s in record_seeds]
        values = np.mean(runs, axis=0)
        columns[strategy] = values
        reports[strategy] = circuits.report
        try:
            slopes[strategy] = fit_slope(ns, values, _RECORD_STEP[strategy])
        except DomainError:
            logger.warning("%s: too few finite records to fit a slope", strategy)
            continue
        logger.debug("%s slope %.6f +/- %.6f", strategy, slopes[strategy].slope, slopes[strategy].stderr)
    return DecayCurves(ns, columns, slopes, seed, shots_per_point, reports)


# ---------------------------------------------------------------------------
# Noise sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NoisePoint:
    depolarizing_2q: float
    estimate: SrelEstimate     # per pair
    exact_per_qubit: float

    @property
    def estimate_per_qubit(self) -> float:
        return self.estimate.smoothed / 2


def noise_sweep(
    params: PreparationParams,
    values: Iterable[float] = NOISE_SWEEP_2Q,
    shots: int = 1_000_000,
    base_noise: NoiseModel = NOISELESS,
    seed: int = 0,
    workers: int = 1,
    strategy: Strategy = "entangled",
    cfg: OptimizerConfig | None = None,
) -> list[NoisePoint]:
    """Estimated S_rel of the fixed optimal circuits as CNOT depolarizing grows."""
    circuits = strategy_circuits(params, strategy, cfg)
    points = []
    for p2 in values:
        noise = NoiseModel(
            depolarizing_1q=base_noise.depolarizing_1q,
            depolarizing_2q=p2,
            readout_flip=base_noise.readout_flip,
            readout_overrides=base_noise.readout_overrides,
        )
        sim = simulate_strategy(circuits, shots, noise, seed, workers)
        points.append(NoisePoint(p2, sim.estimate_per_pair, sim.exact_per_qubit))
    return points
