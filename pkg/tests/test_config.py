"""
Tests for qlikelihood.config: TOML loading, discovery and value priority.
"""

import argparse
from pathlib import Path

import pytest

from qlikelihood import config
from qlikelihood.config import (
    CONFIG_ENV_VAR,
    DEFAULTS,
    find_config_file,
    load_toml,
    noise_model,
    optimizer_config,
    preparation_params,
    resolve_defaults,
)
from qlikelihood.errors import ConfigurationError


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv(CONFIG_ENV_VAR, raising=False)
    monkeypatch.setattr(config, "CONFIG_SEARCH_PATHS", [Path("qlikelihood.toml")])


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# load_toml
# ---------------------------------------------------------------------------

class TestLoadToml:
    def test_reads_flat_keys(self, tmp_path):
        p = _write(tmp_path / "c.toml", "beta = 0.3\nrestarts = 4\nsearch_group = \"SU4\"\npolish = false\n")
        assert load_toml(p) == {"beta": 0.3, "restarts": 4, "search_group": "SU4", "polish": False}

    def test_integer_allowed_for_float_key(self, tmp_path):
        assert load_toml(_write(tmp_path / "c.toml", "delta = 1\n")) == {"delta": 1}

    def test_unknown_key(self, tmp_path):
        with pytest.raises(ConfigurationError, match="colour"):
            load_toml(_write(tmp_path / "c.toml", "colour = 1\n"))

    @pytest.mark.parametrize("line", [
        'beta = "wide"', "restarts = 1.5", "polish = 1", "seed = -3", "seed = true", "strict = \"yes\"",
    ])
    def test_bad_types(self, tmp_path, line):
        with pytest.raises(ConfigurationError):
            load_toml(_write(tmp_path / "c.toml", line + "\n"))

    def test_invalid_toml(self, tmp_path):
        with pytest.raises(ConfigurationError, match="invalid TOML"):
            load_toml(_write(tmp_path / "c.toml", "beta = \n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_toml(tmp_path / "absent.toml")


# ---------------------------------------------------------------------------
# find_config_file
# ---------------------------------------------------------------------------

class TestFindConfigFile:
    def test_none_found(self):
        assert find_config_file(None) is None

    def test_explicit_path(self, tmp_path):
        p = _write(tmp_path / "mine.toml", "")
        assert find_config_file(str(p)) == p

    def test_explicit_missing(self):
        with pytest.raises(ConfigurationError, match="not found"):
            find_config_file("nope.toml")

    def test_env_var(self, tmp_path, monkeypatch):
        p = _write(tmp_path / "env.toml", "")
        monkeypatch.setenv(CONFIG_ENV_VAR, str(p))
        assert find_config_file(None) == p

    def test_env_var_missing(self, monkeypatch):
        monkeypatch.setenv(CONFIG_ENV_VAR, "gone.toml")
        with pytest.raises(ConfigurationError, match=CONFIG_ENV_VAR):
            find_config_file(None)

    def test_working_directory(self, tmp_path):
        _write(tmp_path / "qlikelihood.toml", "")
        assert find_config_file(None) == Path("qlikelihood.toml")

    def test_explicit_beats_env(self, tmp_path, monkeypatch):
        explicit = _write(tmp_path / "a.toml", "")
        monkeypatch.setenv(CONFIG_ENV_VAR, str(_write(tmp_path / "b.toml", "")))
        assert find_config_file(str(explicit)) == explicit


# ---------------------------------------------------------------------------
# resolve_defaults and typed views
# ---------------------------------------------------------------------------

class TestResolveDefaults:
    def test_priority(self):
        ns = argparse.Namespace(beta=None, delta=0.5, restarts=None)
        resolve_defaults(ns, {"beta": 0.3, "delta": 1.0})
        assert ns.beta == 0.3          # config
        assert ns.delta == 0.5         # CLI
        assert ns.restarts == DEFAULTS["restarts"]

    def test_only_known_attributes_are_filled(self):
        ns = resolve_defaults(argparse.Namespace(beta=None), {})
        assert not hasattr(ns, "shots")


class TestTypedViews:
    def _namespace(self, **overrides):
        ns = argparse.Namespace(**{k: None for k in DEFAULTS})
        for k, v in overrides.items():
            setattr(ns, k, v)
        return resolve_defaults(ns, {})

    def test_preparation_params(self):
        params = preparation_params(self._namespace(beta=0.4))
        assert (params.beta, params.delta) == (0.4, DEFAULTS["delta"])

    def test_optimizer_config_carries_seed(self):
        cfg = optimizer_config(self._namespace(restarts=3), seed=11)
        assert cfg.restarts == 3 and cfg.seed == 11
        assert cfg.search_group == "SO4"

    def test_noise_model(self):
        noise = noise_model(self._namespace(depolarizing_2q=0.05))
        assert noise.depolarizing_2q == 0.05 and noise.readout_flip == 0.0
