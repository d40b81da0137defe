"""
qlikelihood: relative-entropy discrimination of quantum coins, with
two-CNOT circuit synthesis, simulation and OpenQASM export.
"""

__version__ = "0.1.0"

from qlikelihood.coin import (
    BinaryDist, TossRecord,
    approx_log_likelihood, exact_log_likelihood, kl_divergence,
)
from qlikelihood.discrimination import (
    MeasurementBasis, OptimizerConfig, PreparationParams, StrategyReport,
    optimize_direct, optimize_entangled, prepare_states,
)
from qlikelihood.synthesis import decompose_two_qubit, makhlin_invariants
from qlikelihood.circuit import Circuit, GateOp, build_circuit
from qlikelihood.simulator import (
    NoiseModel, ShotCounts,
    born_probabilities, estimate_srel_from_counts, sample_shots,
)
from qlikelihood.qasm import emit_qasm, parse_qasm
from qlikelihood.study import compare_strategies, likelihood_decay, noise_sweep

__all__ = [
    "BinaryDist", "TossRecord",
    "approx_log_likelihood", "exact_log_likelihood", "kl_divergence",
    "MeasurementBasis", "OptimizerConfig", "PreparationParams", "StrategyReport",
    "optimize_direct", "optimize_entangled", "prepare_states",
    "decompose_two_qubit", "makhlin_invariants",
    "Circuit", "GateOp", "build_circuit",
    "NoiseModel", "ShotCounts",
    "born_probabilities", "estimate_srel_from_counts", "sample_shots",
    "emit_qasm", "parse_qasm",
    "compare_strategies", "likelihood_decay", "noise_sweep",
]
