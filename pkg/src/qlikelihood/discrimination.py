"""
qlikelihood.discrimination

Relative-entropy discrimination of two qubit states rho_A (truth) and
rho_B (model).

  prepare_states            rho_A = diag(cos^2 b/2, sin^2 b/2), rho_B = Ry(d) rho_A Ry(d)^dag
  measurement_distribution  p_i = <m_i|rho|m_i>
  relative_entropy_of_basis D_KL(m) = sum p_i log(p_i/q_i)
  optimize_direct           best single-qubit x-z basis (grid + golden section)
  optimize_entangled        best two-qubit SO(4) basis (seeded hill climb)
  confidence_decay          C = exp(-N S) / sqrt(2 pi N p (1-p))
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np
from scipy import optimize
from scipy.special import rel_entr

from qlikelihood.coin import kl_divergence, nats_to_bits
from qlikelihood.errors import DimensionError, DomainError, FlaggedInfinity, is_flagged_infinity
from qlikelihood.linalg import (
    STRUCT_TOL,
    DensityMatrix,
    UnitaryMatrix,
    density_to_bloch,
    expm_antisymmetric,
    expm_antihermitian,
    hermitian_eigvalsh,
    random_antihermitian,
    random_antisymmetric,
    ry,
    tensor_product,
)

logger = logging.getLogger(__name__)

Strategy = Literal["direct", "entangled"]

# Theory row of the reference results table (direct, entangled); the unit
# convention behind it is resolved by reference_convention_matches().
REFERENCE_THEORY = {"direct": 4.506, "entangled": 4.723}

_DEGENERATE_TOL = 1e-14

UNBOUNDED_REASON = "rho_B is pure: a basis vector on its kernel gives q_i = 0 with p_i > 0"


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PreparationParams:
    beta: float   # purity angle
    delta: float  # x-z separation of rho_B from rho_A

    def __post_init__(self) -> None:
        for name in ("beta", "delta"):
            v = getattr(self, name)
            if not 0.0 <= v <= math.pi:
                raise DomainError(f"{name} must lie in [0, pi], got {v}")


@dataclass(frozen=True)
class MeasurementBasis:
    """Orthonormal basis {|m_i>} stored as the columns of a unitary."""

    unitary: UnitaryMatrix

    def __post_init__(self) -> None:
        if self.unitary.dim not in (2, 4):
            raise DimensionError(f"measurement bases have dimension 2 or 4, got {self.unitary.dim}")

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "MeasurementBasis":
        return cls(UnitaryMatrix(m))

    @property
    def dimension(self) -> int:
        return self.unitary.dim

    @property
    def matrix(self) -> np.ndarray:
        return self.unitary.matrix

    def tensor(self, other: "MeasurementBasis") -> "MeasurementBasis":
        return MeasurementBasis.from_matrix(tensor_product(self.matrix, other.matrix))


@dataclass(frozen=True)
class ProbDist:
    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise DimensionError("a distribution needs at least one outcome")
        if np.any(p < -1e-12):
            raise DomainError(f"negative probability {p.min():.3g}")
        p = np.clip(p, 0.0, None)
        if abs(p.sum() - 1.0) > STRUCT_TOL:
            raise DomainError(f"probabilities sum to {p.sum():.12g}, expected 1")
        object.__setattr__(self, "probs", tuple(float(x) for x in p))

    def as_array(self) -> np.ndarray:
        return np.array(self.probs)

    def __len__(self) -> int:
        return len(self.probs)


@dataclass(frozen=True)
class OptimizerConfig:
    step_size: float = 0.3
    cooling: float = 0.95
    iterations: int = 5000
    restarts: int = 8
    seed: int = 0
    tolerance: float = 1e-10
    grid_points: int = 10_000
    stall_window: int = 20
    workers: int = 1
    polish: bool = True
    search_group: Literal["SO4", "SU4"] = "SO4"
    allow_infinite: bool = False

    def __post_init__(self) -> None:
        if self.step_size <= 0:
            raise DomainError("step_size must be > 0")
        if not 0 < self.cooling <= 1:
            raise DomainError("cooling must lie in (0, 1]")
        if self.iterations < 1 or self.restarts < 1:
            raise DomainError("iterations and restarts must be >= 1")
        if self.tolerance <= 0:
            raise DomainError("tolerance must be > 0")
        if self.grid_points < 3:
            raise DomainError("grid_points must be >= 3")
        if self.stall_window < 1 or self.workers < 1:
            raise DomainError("stall_window and workers must be >= 1")
        if self.search_group not in ("SO4", "SU4"):
            raise DomainError(f"search_group must be 'SO4' or 'SU4', got {self.search_group!r}")


@dataclass(frozen=True)
class StrategyReport:
    strategy: Strategy
    s_rel: float                          # nats per qubit
    basis: MeasurementBasis
    seed: int
    config: OptimizerConfig
    phi_star: float | None = None         # direct only
    raw_pair_value: float | None = None   # entangled only, nats per pair
    separable_pair_value: float | None = None
    degenerate: bool = False
    restart_values: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.s_rel < 0:
            raise DomainError("s_rel must be >= 0")
        if self.strategy == "entangled" and self.raw_pair_value is not None:
            if abs(self.s_rel - self.raw_pair_value / 2) > 1e-15 * max(1.0, self.raw_pair_value):
                raise DomainError("entangled s_rel must equal raw_pair_value / 2")

    @property
    def unbounded(self) -> bool:
        return is_flagged_infinity(self.s_rel)

    @property
    def improved_over_separable(self) -> bool | None:
        if self.strategy != "entangled" or self.separable_pair_value is None:
            return None
        return self.raw_pair_value > self.separable_pair_value

    def to_dict(self) -> dict:
        u = self.basis.matrix
        return {
            "strategy": self.strategy,
            "s_rel_nats": self.s_rel,
            "s_rel_bits": nats_to_bits(self.s_rel),
            "phi_star": self.phi_star,
            "raw_pair_value_nats": self.raw_pair_value,
            "separable_pair_value_nats": self.separable_pair_value,
            "improved_over_separable": self.improved_over_separable,
            "degenerate": self.degenerate,
            "unbounded": self.unbounded,
            "unitary": [[[float(z.real), float(z.imag)] for z in row] for row in u],
            "seed": self.seed,
            "config": asdict(self.config),
        }


def unitary_from_pairs(rows: list) -> np.ndarray:
    """Inverse of the row-major ``[re, im]`` encoding used in reports."""
    return np.array([[complex(re, im) for re, im in row] for row in rows])


# ---------------------------------------------------------------------------
# States and distributions
# ---------------------------------------------------------------------------

def prepare_states(params: PreparationParams) -> tuple[DensityMatrix, DensityMatrix]:
    c2 = math.cos(params.beta / 2) ** 2
    rho_a = np.diag([c2, 1.0 - c2]).astype(complex)
    r = ry(params.delta)
    return DensityMatrix(rho_a), DensityMatrix(r @ rho_a @ r.conj().T)


def measurement_distribution(rho: DensityMatrix, basis: MeasurementBasis) -> ProbDist:
    if rho.dim != basis.dimension:
        raise DimensionError(f"state dimension {rho.dim} does not match basis dimension {basis.dimension}")
    u = basis.matrix
    probs = np.real(np.einsum("ji,jk,ki->i", u.conj(), rho.matrix, u))
    probs = np.clip(probs, 0.0, None)
    return ProbDist(tuple(probs / probs.sum()))


def relative_entropy_of_basis(rho_a: DensityMatrix, rho_b: DensityMatrix, basis: MeasurementBasis) -> float:
    p = measurement_distribution(rho_a, basis)
    q = measurement_distribution(rho_b, basis)
    return kl_divergence(p.as_array(), q.as_array())


def basis_from_angle(phi: float) -> MeasurementBasis:
    """Basis along the +/-(sin phi, 0, cos phi) Bloch directions; an SO(2) element."""
    return MeasurementBasis.from_matrix(ry(phi % math.pi))


def confidence_decay(n: int, s_rel: float, p: float) -> float:
    if n < 1:
        raise DomainError("n must be >= 1")
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie strictly inside (0, 1), got {p}")
    if s_rel < 0:
        raise DomainError("s_rel must be >= 0")
    return math.exp(-n * s_rel) / math.sqrt(2.0 * math.pi * n * p * (1.0 - p))


# ---------------------------------------------------------------------------
# Direct strategy
# ---------------------------------------------------------------------------

def _direct_objective(rho_a: DensityMatrix, rho_b: DensityMatrix, allow_infinite: bool):
    """Vectorized D_KL(phi) for bases along (sin phi, 0, cos phi)."""
    ba = density_to_bloch(rho_a).as_array()
    bb = density_to_bloch(rho_b).as_array()

    def f(phi: np.ndarray | float) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        s, c = np.sin(phi), np.cos(phi)
        p0 = np.clip(0.5 * (1.0 + ba[0] * s + ba[2] * c), 0.0, 1.0)
        q0 = np.clip(0.5 * (1.0 + bb[0] * s + bb[2] * c), 0.0, 1.0)
        d = rel_entr(p0, q0) + rel_entr(1.0 - p0, 1.0 - q0)
        if not allow_infinite:
            d = np.where(np.isinf(d), -np.inf, d)
        return d

    return f


def _unbounded_direction(rho_a: DensityMatrix, rho_b: DensityMatrix) -> float | None:
    """
    x-z angle of a basis containing the kernel of a rank-deficient rho_B, if
    rho_A has weight on that kernel. The direct supremum is then unbounded.
    """
    if hermitian_eigvalsh(rho_b.matrix)[0] > STRUCT_TOL:
        return None
    bb = density_to_bloch(rho_b).as_array()
    if abs(bb[1]) > STRUCT_TOL:
        return None
    phi = math.atan2(bb[0], bb[2]) % math.pi
    basis = basis_from_angle(phi)
    q = measurement_distribution(rho_b, basis).as_array()
    p = measurement_distribution(rho_a, basis).as_array()
    if p[int(np.argmin(q))] <= STRUCT_TOL:
        return None
    return phi


def optimize_direct(rho_a: DensityMatrix, rho_b: DensityMatrix, cfg: OptimizerConfig | None = None) -> StrategyReport:
    cfg = cfg or OptimizerConfig()
    if rho_a.dim != 2 or rho_b.dim != 2:
        raise DimensionError("the direct strategy acts on single-qubit states")
    phi = _unbounded_direction(rho_a, rho_b)
    if phi is not None:
        logger.warning("direct strategy: rho_B is pure, S_rel is unbounded (kernel at phi=%.6f)", phi)
        return StrategyReport(
            strategy="direct",
            s_rel=FlaggedInfinity(UNBOUNDED_REASON),
            basis=basis_from_angle(phi),
            seed=cfg.seed,
            config=cfg,
            phi_star=phi,
        )
    f = _direct_objective(rho_a, rho_b, cfg.allow_infinite)
    grid = np.linspace(0.0, math.pi, cfg.grid_points, endpoint=False)
    values = f(grid)
    k = int(np.argmax(values))
    best_phi, best_val = float(grid[k]), float(values[k])

    if math.isfinite(best_val) and best_val > _DEGENERATE_TOL:
        h = math.pi / cfg.grid_points
        bracket = (best_phi - h, best_phi, best_phi + h)
        try:
            res = optimize.minimize_scalar(
                lambda x: -float(f(x)), bracket=bracket, method="golden",
                options={"xtol": cfg.tolerance},
            )
            if getattr(res, "success", True) and -res.fun >= best_val:
                best_phi, best_val = float(res.x), float(-res.fun)
        except ValueError:
            # grid neighbours tie with the centre; the grid point stands
            logger.debug("golden-section bracket rejected at phi=%.6f", best_phi)

    best_phi = best_phi % math.pi
    degenerate = not best_val > _DEGENERATE_TOL
    if degenerate:
        best_phi, best_val = 0.0, 0.0
        logger.warning("direct strategy: states are indistinguishable, S_rel = 0")
    if math.isinf(best_val):
        best_val = FlaggedInfinity("measurement direction with q_i = 0")
    return StrategyReport(
        strategy="direct",
        s_rel=best_val,
        basis=basis_from_angle(best_phi),
        seed=cfg.seed,
        config=cfg,
        phi_star=best_phi,
        degenerate=degenerate,
    )


def optimize_direct_full_sphere(
    rho_a: DensityMatrix,
    rho_b: DensityMatrix,
    n_theta: int = 181,
    n_azimuth: int = 360,
) -> tuple[float, np.ndarray]:
    """
    Optimize the single-qubit basis over the whole Bloch sphere.

    Brute-force grid over the measurement axis (polar, azimuth) followed by a
    Nelder-Mead polish. Returns (S_rel, unit axis). Used to check that the
    best axis for x-z states lies in the x-z plane.
    """
    ba = density_to_bloch(rho_a).as_array()
    bb = density_to_bloch(rho_b).as_array()

    def axis(theta, az):
        return np.stack([np.sin(theta) * np.cos(az), np.sin(theta) * np.sin(az), np.cos(theta)], axis=-1)

    def d(n):
        p0 = np.clip(0.5 * (1.0 + n @ ba), 0.0, 1.0)
        q0 = np.clip(0.5 * (1.0 + n @ bb), 0.0, 1.0)
        v = rel_entr(p0, q0) + rel_entr(1.0 - p0, 1.0 - q0)
        return np.where(np.isinf(v), -np.inf, v)

    th, az = np.meshgrid(
        np.linspace(0.0, math.pi, n_theta),
        np.linspace(0.0, 2.0 * math.pi, n_azimuth, endpoint=False),
        indexing="ij",
    )
    values = d(axis(th, az))
    i, j = np.unravel_index(np.argmax(values), values.shape)
    x0 = np.array([th[i, j], az[i, j]])
    res = optimize.minimize(
        lambda x: -float(d(axis(x[0], x[1]))), x0, method="Nelder-Mead",
        options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20_000},
    )
    best = max(float(values[i, j]), float(-res.fun))
    n_best = axis(*res.x) if -res.fun >= values[i, j] else axis(*x0)
    return best, n_best


# ---------------------------------------------------------------------------
# Entangled strategy
# ---------------------------------------------------------------------------

def _pair_kl(rho2_a: np.ndarray, rho2_b: np.ndarray, v: np.ndarray, allow_infinite: bool) -> float:
    p = np.clip(np.real(np.einsum("ji,jk,ki->i", v.conj(), rho2_a, v)), 0.0, None)
    q = np.clip(np.real(np.einsum("ji,jk,ki->i", v.conj(), rho2_b, v)), 0.0, None)
    d = kl_divergence(p / p.sum(), q / q.sum())
    if isinstance(d, FlaggedInfinity) and not allow_infinite:
        return -math.inf
    return d


def _generator(rng: np.random.Generator, group: str, scale: float) -> np.ndarray:
    if group == "SU4":
        return random_antihermitian(rng, 4, scale)
    return random_antisymmetric(rng, 4, scale)


def _step(v: np.ndarray, a: np.ndarray, group: str) -> np.ndarray:
    if group == "SU4":
        return v @ expm_antihermitian(a).matrix
    return v @ expm_antisymmetric(a).matrix


def _so4_basis() -> list[np.ndarray]:
    gens = []
    for i in range(4):
        for j in range(i + 1, 4):
            g = np.zeros((4, 4))
            g[i, j], g[j, i] = 1.0, -1.0
            gens.append(g)
    return gens


_SO4_GENERATORS = _so4_basis()


def _polish(rho2_a, rho2_b, v: np.ndarray, value: float, cfg: OptimizerConfig) -> tuple[np.ndarray, float]:
    """Local refinement of an SO(4) walk result along the six rotation planes."""
    if cfg.search_group != "SO4":
        return v, value

    def neg(x):
        a = sum(xi * g for xi, g in zip(x, _SO4_GENERATORS))
        val = _pair_kl(rho2_a, rho2_b, v @ expm_antisymmetric(a).matrix, cfg.allow_infinite)
        return -val if math.isfinite(val) else 1e300

    res = optimize.minimize(neg, np.zeros(6), method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000})
    if -res.fun > value:
        a = sum(xi * g for xi, g in zip(res.x, _SO4_GENERATORS))
        return v @ expm_antisymmetric(a).matrix, float(-res.fun)
    return v, value


def _walk(
    restart: int,
    start: np.ndarray,
    rho2_a: np.ndarray,
    rho2_b: np.ndarray,
    cfg: OptimizerConfig,
    seed_seq: np.random.SeedSequence,
) -> tuple[np.ndarray, float]:
    rng = np.random.default_rng(seed_seq)
    v = start
    if restart > 0:
        v = _step(v, _generator(rng, cfg.search_group, cfg.step_size), cfg.search_group)
    best = _pair_kl(rho2_a, rho2_b, v, cfg.allow_infinite)
    eps = cfg.step_size
    stalled = 0
    for _ in range(cfg.iterations):
        cand = _step(v, _generator(rng, cfg.search_group, eps), cfg.search_group)
        val = _pair_kl(rho2_a, rho2_b, cand, cfg.allow_infinite)
        if val > best:
            v, best, stalled = cand, val, 0
            continue
        stalled += 1
        if stalled >= cfg.stall_window:
            eps *= cfg.cooling
            stalled = 0
            if eps < cfg.tolerance:
                break
    if cfg.polish and math.isfinite(best):
        v, best = _polish(rho2_a, rho2_b, v, best, cfg)
    logger.debug("restart %d finished: D = %.12g, final step %.3g", restart, best, eps)
    return v, best


def optimize_entangled(rho_a: DensityMatrix, rho_b: DensityMatrix, cfg: OptimizerConfig | None = None) -> StrategyReport:
    """
    Hill climb over two-qubit bases for the pair state rho^(x)2.

    Every restart begins at the best separable basis R(phi*) (x) R(phi*)
    (restarts after the first are kicked by one random step) and proposes
    V <- V exp(eps A); a proposal is kept only if D_KL strictly increases.
    eps is multiplied by ``cooling`` after ``stall_window`` consecutive
    rejections. Restart k draws from SeedSequence(seed).spawn()[k]; ties
    between restarts go to the lowest index.
    """
    cfg = cfg or OptimizerConfig()
    if rho_a.dim != 2 or rho_b.dim != 2:
        raise DimensionError("the entangled strategy pairs single-qubit states")
    direct = optimize_direct(rho_a, rho_b, cfg)
    rho2_a = tensor_product(rho_a.matrix, rho_a.matrix)
    rho2_b = tensor_product(rho_b.matrix, rho_b.matrix)
    start = tensor_product(direct.basis.matrix, direct.basis.matrix)
    if cfg.search_group == "SO4":
        start = start.real
    if direct.unbounded:
        # the separable basis already reaches the kernel of rho_B on both qubits
        unbounded = FlaggedInfinity(UNBOUNDED_REASON)
        return StrategyReport(
            strategy="entangled", s_rel=unbounded, basis=MeasurementBasis.from_matrix(start),
            seed=cfg.seed, config=cfg, raw_pair_value=unbounded, separable_pair_value=unbounded,
        )
    separable = _pair_kl(rho2_a, rho2_b, start, cfg.allow_infinite)

    if direct.degenerate:
        return StrategyReport(
            strategy="entangled", s_rel=0.0, basis=MeasurementBasis.from_matrix(start),
            seed=cfg.seed, config=cfg, raw_pair_value=0.0, separable_pair_value=0.0,
            degenerate=True,
        )

    streams = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    jobs = [(k, start, rho2_a, rho2_b, cfg, streams[k]) for k in range(cfg.restarts)]
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(lambda job: _walk(*job), jobs))
    else:
        results = [_walk(*job) for job in jobs]

    values = [val for _, val in results]
    k_best = int(np.argmax(values))  # first maximum = lowest restart index
    v_best, pair_value = results[k_best]
    if not pair_value > separable:
        logger.warning(
            "entangled search did not improve on the separable basis (%.12g nats/pair)", separable
        )
    if pair_value < separable:
        v_best, pair_value = start, separable
    return StrategyReport(
        strategy="entangled",
        s_rel=pair_value / 2,
        basis=MeasurementBasis.from_matrix(v_best),
        seed=cfg.seed,
        config=cfg,
        raw_pair_value=pair_value,
        separable_pair_value=separable,
        restart_values=tuple(values),
    )


def reference_convention_matches(
    direct: StrategyReport,
    entangled: StrategyReport,
    reference: dict[str, float] = REFERENCE_THEORY,
    rel_tol: float = 0.005,
) -> dict[str, bool]:
    """
    For each unit/normalization convention, whether both strategy values
    reproduce the reference Theory row within ``rel_tol``.
    """
    out = {}
    for unit, conv in (("nats", lambda x: x), ("bits", nats_to_bits)):
        for norm, factor in (("per_qubit", 1.0), ("per_pair", 2.0)):
            d = conv(direct.s_rel * factor)
            e = conv(entangled.s_rel * factor)
            out[f"{unit}_{norm}"] = (
                math.isclose(d, reference["direct"], rel_tol=rel_tol)
                and math.isclose(e, reference["entangled"], rel_tol=rel_tol)
            )
    return out
