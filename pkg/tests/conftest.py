"""Shared fixtures for all test modules."""

import numpy as np
import pytest

from qlikelihood.discrimination import (
    OptimizerConfig,
    PreparationParams,
    optimize_direct,
    optimize_entangled,
    prepare_states,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def reference_params():
    """The beta/delta pair of the reference results table."""
    return PreparationParams(beta=0.2, delta=1.8)


@pytest.fixture(scope="session")
def reference_states(reference_params):
    return prepare_states(reference_params)


@pytest.fixture(scope="session")
def fast_cfg():
    """Small optimizer budget for unit tests."""
    return OptimizerConfig(iterations=1500, restarts=2, seed=0)


@pytest.fixture(scope="session")
def direct_report(reference_states, fast_cfg):
    return optimize_direct(*reference_states, fast_cfg)


@pytest.fixture(scope="session")
def entangled_report(reference_states, fast_cfg):
    return optimize_entangled(*reference_states, fast_cfg)
