"""
qlikelihood.config

Run configuration for the ``qlik`` command.

Value priority (highest -> lowest):
  1. CLI flags
  2. Config file   qlikelihood.toml  (flat TOML, keys = long flag names with '-' -> '_')
  3. Built-in defaults

Config file search order (first found wins):
  1. --config FILE
  2. $QLIK_CONFIG
  3. ./qlikelihood.toml
  4. ~/.config/qlikelihood/config.toml

Example:
    beta = 0.2
    delta = 1.8
    restarts = 8
    depolarizing_2q = 0.01
"""

from __future__ import annotations

import argparse
import os
from pathlib import Path
from types import ModuleType

from qlikelihood.discrimination import OptimizerConfig, PreparationParams
from qlikelihood.errors import ConfigurationError
from qlikelihood.simulator import NoiseModel


# ---------------------------------------------------------------------------
# TOML loader: stdlib tomllib (3.11+) with tomli fallback
# ---------------------------------------------------------------------------

def _load_toml_module() -> ModuleType | None:
    try:
        import tomllib
        return tomllib
    except ImportError:
        pass
    try:
        import tomli as tomllib
        return tomllib
    except ImportError:
        return None


TOMLLIB = _load_toml_module()

CONFIG_ENV_VAR = "QLIK_CONFIG"

CONFIG_SEARCH_PATHS = [
    Path("qlikelihood.toml"),
    Path.home() / ".config" / "qlikelihood" / "config.toml",
]

_OPT = OptimizerConfig()

DEFAULTS: dict[str, object] = {
    # preparation
    "beta": 0.2,
    "delta": 1.8,
    "strategy": "direct",
    # optimizer
    "step_size": _OPT.step_size,
    "cooling": _OPT.cooling,
    "iterations": _OPT.iterations,
    "restarts": _OPT.restarts,
    "tolerance": _OPT.tolerance,
    "grid_points": _OPT.grid_points,
    "stall_window": _OPT.stall_window,
    "workers": _OPT.workers,
    "polish": _OPT.polish,
    "search_group": _OPT.search_group,
    "allow_infinite": _OPT.allow_infinite,
    # simulation / curves
    "shots": 100_000,
    "n_max": 2000,
    "shots_per_point": 1,
    "depolarizing_1q": 0.0,
    "depolarizing_2q": 0.0,
    "readout_flip": 0.0,
    # run
    "seed": None,
    "strict": False,
}


def load_toml(path: Path) -> dict:
    """Read a flat config file; unknown keys and nested tables are rejected."""
    if TOMLLIB is None:
        raise ConfigurationError(
            "TOML support requires Python 3.11+ or the 'tomli' package (pip install tomli)"
        )
    try:
        with open(path, "rb") as f:
            data = TOMLLIB.load(f)
    except OSError as e:
        raise ConfigurationError(f"cannot read config file {path}: {e}") from e
    except TOMLLIB.TOMLDecodeError as e:
        raise ConfigurationError(f"invalid TOML in {path}: {e}") from e

    unknown = sorted(set(data) - set(DEFAULTS))
    if unknown:
        raise ConfigurationError(f"unknown key(s) in {path}: {', '.join(unknown)}")
    for key, value in data.items():
        _check_type(key, value, path)
    return data


def _check_type(key: str, value: object, path: Path) -> None:
    default = DEFAULTS[key]
    if key == "seed":
        ok = isinstance(value, int) and not isinstance(value, bool) and value >= 0
    elif isinstance(default, bool):
        ok = isinstance(value, bool)
    elif isinstance(default, int):
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif isinstance(default, float):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    else:
        ok = isinstance(value, str)
    if not ok:
        raise ConfigurationError(f"{path}: bad value for {key!r}: {value!r}")


def find_config_file(explicit: str | None) -> Path | None:
    """Return the first config file found, or None."""
    if explicit:
        p = Path(explicit)
        if not p.exists():
            raise ConfigurationError(f"Config file not found: {explicit}")
        return p

    env_path = os.environ.get(CONFIG_ENV_VAR)
    if env_path:
        p = Path(env_path)
        if not p.exists():
            raise ConfigurationError(f"Config file from {CONFIG_ENV_VAR} not found: {env_path}")
        return p

    for candidate in CONFIG_SEARCH_PATHS:
        if candidate.exists():
            return candidate

    return None


def resolve_defaults(cli_args: argparse.Namespace, config: dict) -> argparse.Namespace:
    """
    Fill every option the CLI left unset (None) from the config file, then
    from DEFAULTS. CLI flags always win.
    """
    for key, default in DEFAULTS.items():
        if not hasattr(cli_args, key):
            continue
        if getattr(cli_args, key) is None:
            setattr(cli_args, key, config.get(key, default))
    return cli_args


# ---------------------------------------------------------------------------
# Typed views of the merged namespace
# ---------------------------------------------------------------------------

def preparation_params(ns: argparse.Namespace) -> PreparationParams:
    return PreparationParams(beta=float(ns.beta), delta=float(ns.delta))


def optimizer_config(ns: argparse.Namespace, seed: int) -> OptimizerConfig:
    return OptimizerConfig(
        step_size=float(ns.step_size),
        cooling=float(ns.cooling),
        iterations=int(ns.iterations),
        restarts=int(ns.restarts),
        seed=seed,
        tolerance=float(ns.tolerance),
        grid_points=int(ns.grid_points),
        stall_window=int(ns.stall_window),
        workers=int(ns.workers),
        polish=bool(ns.polish),
        search_group=str(ns.search_group),
        allow_infinite=bool(ns.allow_infinite),
    )


def noise_model(ns: argparse.Namespace) -> NoiseModel:
    return NoiseModel(
        depolarizing_1q=float(ns.depolarizing_1q),
        depolarizing_2q=float(ns.depolarizing_2q),
        readout_flip=float(ns.readout_flip),
    )
