"""
Tests for qlikelihood.discrimination: basis optimization for the direct and
entangled measurement strategies.
"""

import math

import numpy as np
import pytest

from qlikelihood.coin import kl_divergence
from qlikelihood.discrimination import (
    REFERENCE_THEORY,
    MeasurementBasis,
    OptimizerConfig,
    PreparationParams,
    ProbDist,
    StrategyReport,
    basis_from_angle,
    confidence_decay,
    measurement_distribution,
    optimize_direct,
    optimize_direct_full_sphere,
    optimize_entangled,
    prepare_states,
    reference_convention_matches,
    relative_entropy_of_basis,
    unitary_from_pairs,
)
from qlikelihood.errors import DimensionError, DomainError, is_flagged_infinity
from qlikelihood.linalg import DensityMatrix, expm_antisymmetric, random_antisymmetric, ry, tensor_product


def _grid_oracle(beta, delta, n):
    """Brute-force direct S_rel from Bloch vectors, independent of the engine."""
    r = math.cos(beta)
    phi = np.linspace(0.0, math.pi, n, endpoint=False)
    p0 = 0.5 * (1 + r * np.cos(phi))
    q0 = 0.5 * (1 + r * np.cos(phi - delta))
    with np.errstate(divide="ignore", invalid="ignore"):
        d = p0 * np.log(p0 / q0) + (1 - p0) * np.log((1 - p0) / (1 - q0))
    return float(np.nanmax(d))


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

class TestPreparationParams:
    @pytest.mark.parametrize("beta, delta", [(-0.1, 1.0), (0.2, 4.0)])
    def test_rejects_out_of_range(self, beta, delta):
        with pytest.raises(DomainError):
            PreparationParams(beta, delta)


class TestProbDist:
    def test_clamps_tiny_negatives(self):
        assert ProbDist((1.0 + 1e-13, -1e-13)).probs[1] == 0.0

    def test_rejects_bad_sum(self):
        with pytest.raises(DomainError):
            ProbDist((0.5, 0.6))


class TestOptimizerConfig:
    @pytest.mark.parametrize("kwargs", [
        {"step_size": 0.0}, {"cooling": 1.5}, {"restarts": 0},
        {"grid_points": 2}, {"search_group": "SO3"},
    ])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(DomainError):
            OptimizerConfig(**kwargs)


class TestMeasurementBasis:
    def test_rejects_dimension_one(self):
        with pytest.raises(DimensionError):
            MeasurementBasis.from_matrix(np.eye(1))

    def test_tensor(self):
        b = basis_from_angle(0.3).tensor(basis_from_angle(0.3))
        assert b.dimension == 4

    def test_negative_angle_reduces_into_zero_pi(self):
        assert np.allclose(basis_from_angle(-0.3).matrix, ry(math.pi - 0.3), atol=1e-12)

    def test_angle_has_period_pi(self):
        assert np.allclose(basis_from_angle(0.4 + math.pi).matrix, ry(0.4), atol=1e-12)


# ---------------------------------------------------------------------------
# States and distributions
# ---------------------------------------------------------------------------

class TestPrepareStates:
    def test_rho_a_is_diagonal(self, reference_params):
        rho_a, _ = prepare_states(reference_params)
        assert np.allclose(rho_a.matrix, np.diag([math.cos(0.1) ** 2, math.sin(0.1) ** 2]))

    def test_rho_b_has_same_purity(self, reference_states):
        rho_a, rho_b = reference_states
        assert rho_b.purity() == pytest.approx(rho_a.purity())


class TestMeasurementDistribution:
    def test_computational_basis_reads_diagonal(self, reference_states):
        rho_a, _ = reference_states
        p = measurement_distribution(rho_a, basis_from_angle(0.0))
        assert p.probs == pytest.approx((math.cos(0.1) ** 2, math.sin(0.1) ** 2))

    def test_dimension_mismatch(self, reference_states):
        rho_a, _ = reference_states
        four = basis_from_angle(0.0).tensor(basis_from_angle(0.0))
        with pytest.raises(DimensionError):
            measurement_distribution(rho_a, four)

    def test_identical_states_have_zero_entropy(self, reference_states):
        rho_a, _ = reference_states
        assert relative_entropy_of_basis(rho_a, rho_a, basis_from_angle(0.7)) == 0.0


class TestConfidenceDecay:
    def test_formula(self):
        expected = math.exp(-10 * 0.2) / math.sqrt(2 * math.pi * 10 * 0.25)
        assert confidence_decay(10, 0.2, 0.5) == pytest.approx(expected)

    @pytest.mark.parametrize("n, s, p", [(0, 0.1, 0.5), (5, 0.1, 1.0), (5, -1.0, 0.5)])
    def test_rejects_invalid(self, n, s, p):
        with pytest.raises(DomainError):
            confidence_decay(n, s, p)


# ---------------------------------------------------------------------------
# Direct strategy
# ---------------------------------------------------------------------------

class TestOptimizeDirect:
    def test_matches_brute_force_grid(self, direct_report):
        oracle = _grid_oracle(0.2, 1.8, 200_001)
        assert direct_report.s_rel == pytest.approx(oracle, abs=1e-8)
        assert direct_report.s_rel >= oracle - 1e-12

    def test_phi_star_reproduces_value(self, direct_report, reference_states):
        value = relative_entropy_of_basis(*reference_states, basis_from_angle(direct_report.phi_star))
        assert value == pytest.approx(direct_report.s_rel, abs=1e-12)
        assert 0.0 <= direct_report.phi_star < math.pi

    def test_equal_states_are_degenerate(self):
        rho_a, rho_b = prepare_states(PreparationParams(0.2, 0.0))
        report = optimize_direct(rho_a, rho_b)
        assert report.degenerate
        assert report.s_rel == 0.0
        assert report.phi_star == 0.0

    def test_rejects_two_qubit_states(self):
        rho = DensityMatrix(np.eye(4) / 4)
        with pytest.raises(DimensionError):
            optimize_direct(rho, rho)

    @pytest.mark.parametrize("beta, delta", [(0.0, math.pi / 2), (math.pi, 1.0), (0.0, math.pi)])
    def test_pure_model_state_is_unbounded(self, beta, delta):
        rho_a, rho_b = prepare_states(PreparationParams(beta, delta))
        report = optimize_direct(rho_a, rho_b)
        assert report.unbounded and is_flagged_infinity(report.s_rel)
        assert not report.degenerate
        q = measurement_distribution(rho_b, report.basis).as_array()
        p = measurement_distribution(rho_a, report.basis).as_array()
        k = int(np.argmin(q))
        assert q[k] < 1e-12
        assert p[k] > 1e-3

    def test_equal_pure_states_stay_degenerate(self):
        report = optimize_direct(*prepare_states(PreparationParams(0.0, 0.0)))
        assert report.degenerate and not report.unbounded

    def test_per_pair_nats_reproduce_reference(self, direct_report):
        assert 2 * direct_report.s_rel == pytest.approx(REFERENCE_THEORY["direct"], rel=0.005)

    @pytest.mark.slow
    def test_random_pairs_match_million_point_grid(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            beta, delta = rng.uniform(0.05, math.pi - 0.05, size=2)
            report = optimize_direct(*prepare_states(PreparationParams(beta, delta)))
            assert report.s_rel == pytest.approx(_grid_oracle(beta, delta, 1_000_000), abs=1e-8)


class TestFullSphere:
    def test_xz_plane_is_optimal(self, direct_report, reference_states):
        value, axis = optimize_direct_full_sphere(*reference_states)
        assert value == pytest.approx(direct_report.s_rel, abs=1e-6)
        assert abs(axis[1]) < 1e-3

    @pytest.mark.slow
    def test_random_xz_pairs(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            beta, delta = rng.uniform(0.05, math.pi - 0.05, size=2)
            states = prepare_states(PreparationParams(beta, delta))
            value, _ = optimize_direct_full_sphere(*states)
            assert value == pytest.approx(optimize_direct(*states).s_rel, abs=1e-6)


# ---------------------------------------------------------------------------
# Entangled strategy
# ---------------------------------------------------------------------------

class TestOptimizeEntangled:
    def test_beats_direct(self, entangled_report, direct_report):
        assert entangled_report.s_rel > direct_report.s_rel
        assert entangled_report.improved_over_separable

    def test_separable_start_is_twice_direct(self, entangled_report, direct_report):
        assert entangled_report.separable_pair_value == pytest.approx(2 * direct_report.s_rel, abs=1e-9)

    def test_per_qubit_is_half_pair(self, entangled_report):
        assert entangled_report.s_rel == entangled_report.raw_pair_value / 2

    def test_basis_is_real_orthogonal(self, entangled_report):
        v = entangled_report.basis.matrix
        assert np.allclose(v.imag, 0.0, atol=1e-12)
        assert np.linalg.det(v).real == pytest.approx(1.0)

    def test_reported_value_matches_basis(self, entangled_report, reference_states):
        rho_a, rho_b = reference_states
        pair_a = DensityMatrix(tensor_product(rho_a.matrix, rho_a.matrix))
        pair_b = DensityMatrix(tensor_product(rho_b.matrix, rho_b.matrix))
        value = relative_entropy_of_basis(pair_a, pair_b, entangled_report.basis)
        assert value == pytest.approx(entangled_report.raw_pair_value, abs=1e-10)

    def test_deterministic_per_seed(self, reference_states):
        cfg = OptimizerConfig(iterations=300, restarts=2, seed=9, polish=False)
        a = optimize_entangled(*reference_states, cfg)
        b = optimize_entangled(*reference_states, cfg)
        assert a.restart_values == b.restart_values
        assert np.array_equal(a.basis.matrix, b.basis.matrix)

    def test_worker_count_does_not_change_result(self, reference_states):
        serial = optimize_entangled(*reference_states, OptimizerConfig(iterations=200, restarts=3, seed=4, polish=False))
        threaded = optimize_entangled(
            *reference_states, OptimizerConfig(iterations=200, restarts=3, seed=4, polish=False, workers=3),
        )
        assert serial.restart_values == threaded.restart_values

    def test_equal_states_are_degenerate(self):
        report = optimize_entangled(*prepare_states(PreparationParams(0.2, 0.0)))
        assert report.degenerate
        assert report.s_rel == 0.0

    def test_pure_states_are_unbounded(self):
        states = prepare_states(PreparationParams(0.0, math.pi / 2))
        report = optimize_entangled(*states, OptimizerConfig(iterations=50, restarts=1))
        assert report.unbounded
        assert math.isinf(report.raw_pair_value) and math.isinf(report.separable_pair_value)
        assert report.basis.dimension == 4
        assert report.to_dict()["unbounded"] is True

    def test_su4_search_runs(self, reference_states):
        cfg = OptimizerConfig(iterations=200, restarts=1, seed=1, search_group="SU4")
        report = optimize_entangled(*reference_states, cfg)
        assert report.raw_pair_value >= report.separable_pair_value

    def test_to_dict_round_trips_unitary(self, entangled_report):
        d = entangled_report.to_dict()
        assert d["s_rel_bits"] == pytest.approx(d["s_rel_nats"] / math.log(2))
        assert np.allclose(unitary_from_pairs(d["unitary"]), entangled_report.basis.matrix)

    @pytest.mark.slow
    def test_advantage_is_stable_across_seeds(self, reference_states, direct_report):
        diffs = []
        for seed in range(10):
            report = optimize_entangled(*reference_states, OptimizerConfig(seed=seed))
            diffs.append(report.s_rel - direct_report.s_rel)
        assert min(diffs) > 0
        assert max(diffs) - min(diffs) <= 1e-4

    @pytest.mark.slow
    def test_never_worse_than_direct(self):
        rng = np.random.default_rng(23)
        cfg = OptimizerConfig(iterations=200, restarts=1, seed=0)
        for beta, delta in rng.uniform(0.0, math.pi, size=(100, 2)):
            states = prepare_states(PreparationParams(beta, delta))
            entangled = optimize_entangled(*states, cfg)
            assert entangled.s_rel >= optimize_direct(*states, cfg).s_rel - 1e-9


class TestStrategyReport:
    def test_rejects_negative(self):
        with pytest.raises(DomainError):
            StrategyReport("direct", -1.0, basis_from_angle(0.0), 0, OptimizerConfig())

    def test_rejects_inconsistent_pair_value(self):
        basis = basis_from_angle(0.0).tensor(basis_from_angle(0.0))
        with pytest.raises(DomainError):
            StrategyReport("entangled", 1.0, basis, 0, OptimizerConfig(), raw_pair_value=3.0)


class TestReferenceConvention:
    def test_reports_every_convention(self, direct_report, entangled_report):
        matches = reference_convention_matches(direct_report, entangled_report)
        assert set(matches) == {"nats_per_qubit", "nats_per_pair", "bits_per_qubit", "bits_per_pair"}
        assert matches["nats_per_qubit"] is False
        assert matches["bits_per_qubit"] is False


def test_random_so4_basis_kl_is_finite(reference_states, rng):
    rho_a, rho_b = reference_states
    v = expm_antisymmetric(random_antisymmetric(rng, 4, 1.0)).matrix
    p = measurement_distribution(DensityMatrix(np.kron(rho_a.matrix, rho_a.matrix)), MeasurementBasis.from_matrix(v))
    q = measurement_distribution(DensityMatrix(np.kron(rho_b.matrix, rho_b.matrix)), MeasurementBasis.from_matrix(v))
    assert math.isfinite(kl_divergence(p.as_array(), q.as_array()))
