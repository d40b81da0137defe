"""
qlikelihood.coin

Classical likelihood theory for coin tossing:
  - exact binomial log-likelihood of a toss record under a model coin
  - its Stirling approximation  -N*D_KL - 1/2*log(2*pi*N*p*(1-p))
  - KL divergence (binary and finite-outcome)
  - likelihood-decay curves for simulated toss strings

All logarithms are natural (nats); use ``nats_to_bits`` for reporting.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import special, stats

from qlikelihood.errors import (
    DomainError,
    FlaggedInfinity,
    impossible_outcome,
    infinite_divergence,
)

LN2 = math.log(2.0)


def nats_to_bits(value: float) -> float:
    return value / LN2


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TossRecord:
    """N tosses with N_H heads."""

    n_total: int
    n_heads: int

    def __post_init__(self) -> None:
        if self.n_total < 1:
            raise DomainError(f"n_total must be >= 1, got {self.n_total}")
        if not 0 <= self.n_heads <= self.n_total:
            raise DomainError(f"n_heads must lie in [0, {self.n_total}], got {self.n_heads}")

    @property
    def n_tails(self) -> int:
        return self.n_total - self.n_heads

    def frequencies(self) -> "BinaryDist":
        """Observed distribution P_A = {N_H/N, N_T/N}."""
        return BinaryDist(self.n_heads / self.n_total)


@dataclass(frozen=True)
class BinaryDist:
    p_head: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_head <= 1.0:
            raise DomainError(f"p_head must lie in [0, 1], got {self.p_head}")

    @property
    def p_tail(self) -> float:
        return 1.0 - self.p_head

    def as_array(self) -> np.ndarray:
        return np.array([self.p_head, self.p_tail])


# ---------------------------------------------------------------------------
# Divergences
# ---------------------------------------------------------------------------

def kl_divergence(p: Sequence[float] | np.ndarray, q: Sequence[float] | np.ndarray) -> float:
    """
    D_KL(p || q) = sum_i p_i log(p_i / q_i) in nats, with 0 log(0/q) = 0.

    Returns a FlaggedInfinity when some q_i = 0 while p_i > 0.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DomainError(f"distributions differ in length: {p.shape} vs {q.shape}")
    terms = special.rel_entr(p, q)
    if np.any(np.isinf(terms)):
        return infinite_divergence("q_i = 0 where p_i > 0")
    return max(float(np.sum(terms)), 0.0)


def kl_binary(pa: BinaryDist, pb: BinaryDist) -> float:
    return kl_divergence(pa.as_array(), pb.as_array())


# ---------------------------------------------------------------------------
# Likelihoods
# ---------------------------------------------------------------------------

def exact_log_likelihood(t: TossRecord, model: BinaryDist) -> float:
    """log[ N!/(N_H! N_T!) q^N_H (1-q)^N_T ] via log-gamma."""
    q = model.p_head
    if (q == 0.0 and t.n_heads > 0) or (q == 1.0 and t.n_tails > 0):
        return impossible_outcome()
    log_binom = special.gammaln(t.n_total + 1) - special.gammaln(t.n_heads + 1) - special.gammaln(t.n_tails + 1)
    return float(log_binom + special.xlogy(t.n_heads, q) + special.xlogy(t.n_tails, 1.0 - q))


def approx_log_likelihood(t: TossRecord, model: BinaryDist) -> float:
    """Stirling form N*[-D_KL(P_A||P_B)] - 1/2 log(2 pi N p (1-p))."""
    if t.n_heads in (0, t.n_total):
        raise DomainError(
            "Stirling approximation undefined for N_H in {0, N}; use exact_log_likelihood"
        )
    pa = t.frequencies()
    d = kl_binary(pa, model)
    if isinstance(d, FlaggedInfinity):
        return impossible_outcome()
    p = pa.p_head
    n = t.n_total
    return -n * d - 0.5 * math.log(2.0 * math.pi * n * p * (1.0 - p))


def multinomial_log_likelihood(counts: Sequence[int] | np.ndarray, model: Sequence[float] | np.ndarray) -> float:
    """log[ N!/prod(n_i!) prod(q_i^n_i) ] for a k-outcome record."""
    counts = np.asarray(counts, dtype=float)
    q = np.asarray(model, dtype=float)
    if counts.shape != q.shape:
        raise DomainError(f"counts and model differ in length: {counts.shape} vs {q.shape}")
    if np.any((q == 0) & (counts > 0)):
        return impossible_outcome()
    n = counts.sum()
    log_coef = special.gammaln(n + 1) - np.sum(special.gammaln(counts + 1))
    return float(log_coef + np.sum(special.xlogy(counts, q)))


def cumulative_log_likelihood(outcomes: np.ndarray, model: Sequence[float] | np.ndarray) -> np.ndarray:
    """
    Exact multinomial log-likelihood of every prefix of an outcome record.

    ``outcomes`` holds integer outcome labels in [0, k); element N-1 of the
    result scores the first N outcomes under ``model``.
    """
    q = np.asarray(model, dtype=float)
    outcomes = np.asarray(outcomes, dtype=int)
    onehot = np.zeros((outcomes.size, q.size))
    onehot[np.arange(outcomes.size), outcomes] = 1.0
    counts = np.cumsum(onehot, axis=0)
    n = np.arange(1, outcomes.size + 1, dtype=float)
    with np.errstate(divide="ignore"):
        log_coef = special.gammaln(n + 1) - np.sum(special.gammaln(counts + 1), axis=1)
        return log_coef + np.sum(special.xlogy(counts, q), axis=1)


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurveSeries:
    ns: np.ndarray
    log_likelihood: np.ndarray
    seed: int


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    stderr: float
    records: int    # independent increments behind the estimate


def likelihood_curve(p_true: BinaryDist, model: BinaryDist, n_max: int, seed: int) -> CurveSeries:
    """Toss one seeded string from ``p_true``; score each prefix under ``model``."""
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    rng = np.random.default_rng(seed)
    heads = rng.random(n_max) < p_true.p_head
    # outcome 0 = heads, 1 = tails, matching BinaryDist.as_array()
    values = cumulative_log_likelihood(np.where(heads, 0, 1), model.as_array())
    return CurveSeries(np.arange(1, n_max + 1), values, seed)


def fit_slope(ns: np.ndarray, values: np.ndarray, step: int = 1) -> SlopeFit:
    """
    Decay rate of a cumulative log-likelihood series, per unit of N.

    The series starts from log L = 0 at N = 0. Rows whose N is a multiple of
    ``step`` close one independent record each (``step=2`` for records of
    qubit pairs), so the slope is the mean increment per unit N and its
    error is the standard error of that mean.

    Rows from the first non-finite value on (an impossible observation) are
    dropped.
    """
    if step < 1:
        raise DomainError(f"step must be >= 1, got {step}")
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    bad = np.flatnonzero(~np.isfinite(values))
    end = int(bad[0]) if bad.size else values.size
    keep = ns[:end] % step == 0
    ns, values = ns[:end][keep], values[:end][keep]
    if ns.size < 2:
        raise DomainError("at least two finite records are needed to fit a slope")
    rates = np.diff(values, prepend=0.0) / np.diff(ns, prepend=0.0)
    return SlopeFit(float(np.mean(rates)), float(stats.sem(rates)), int(rates.size))


def write_curve_csv(
    path: str | Path,
    columns: dict[str, np.ndarray],
    metadata: dict | None = None,
) -> None:
    """
    Write a curve table. ``columns`` maps header names to equal-length
    arrays; the first column is written as integers. A ``metadata`` dict is
    embedded as a single leading ``# {json}`` line.
    """
    names = list(columns)
    rows = zip(*(columns[name] for name in names))
    with open(path, "w", newline="", encoding="utf-8") as f:
        if metadata is not None:
            f.write("# " + json.dumps(metadata, sort_keys=True) + "\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(names)
        for row in rows:
            first, *rest = row
            writer.writerow([int(first), *(_csv_value(v) for v in rest)])


def _csv_value(v: float) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return repr(float(v))
