"""Tests for run-config loading, overrides, echo and environment settings."""

import json
from pathlib import Path

import pytest

from emotrust.config import ConfigManager, EngineSettings, RunConfig
from emotrust.core.exceptions import ConfigError
from emotrust.core.types import AttackKind, Axis, FoldScheme, Normalization, Scenario

SAMPLE = """
seed = 11
model_name = "config-test"

[data]
scheme = "speaker-fraction-fold"
val_policy = "fraction"
folds = 4

[data.synth]
layers = 2
frames = 6
dim = 8

[train]
max_epochs = 3

[attack]
kind = "pgd"
pgd_steps = 5
sweep_snr_db = [10.0, 30.0]

[profile]
reference = true
scenario = "edge"

[profile.axes.safety]
normalization = "cohort-minmax"
"""


def _write(tmp_path: Path, text: str, name: str = "run.toml") -> Path:
    path = tmp_path / name
    path.write_text(text)
    return path


def test_defaults_without_file():
    """Test a flag-only run gets the declared defaults."""
    cfg = ConfigManager().load_config()
    assert cfg == RunConfig()
    assert cfg.data.folds == 5
    assert cfg.train.batch_size == 64
    assert cfg.attack.snr_db == 45.0
    assert cfg.manifest_path == Path("run") / "data" / "manifest.jsonl"


def test_toml_sections_are_parsed(tmp_path):
    """Test every section of a TOML run config."""
    cfg = ConfigManager(_write(tmp_path, SAMPLE)).load_config()
    assert cfg.seed == 11
    assert cfg.data.scheme == FoldScheme.SPEAKER_FRACTION
    assert cfg.data.synth.dim == 8
    assert cfg.attack.kind == AttackKind.PGD
    assert cfg.attack.sweep_snr_db == [10.0, 30.0]
    assert cfg.profile.scenario == Scenario.EDGE
    assert cfg.profile.axes[Axis.SAFETY].normalization == Normalization.COHORT_MINMAX


def test_command_line_overrides(tmp_path):
    """Test seed, output and fold overrides win over the file."""
    cfg = ConfigManager(_write(tmp_path, SAMPLE)).load_config(
        seed=2, output_dir=tmp_path / "out", folds=3
    )
    assert cfg.seed == 2
    assert cfg.output_dir == tmp_path / "out"
    assert cfg.data.folds == 3
    assert cfg.train_config().seed == 2
    assert cfg.attack_config().seed == 2
    assert cfg.train_config().max_epochs == 3


def test_json_configs(tmp_path):
    """Test JSON files are accepted by suffix."""
    path = _write(tmp_path, json.dumps({"seed": 4, "train": {"max_epochs": 2}}), "run.json")
    cfg = ConfigManager(path).load_config()
    assert cfg.seed == 4 and cfg.train.max_epochs == 2

    bad = _write(tmp_path, "[1, 2]", "list.json")
    with pytest.raises(ConfigError):
        ConfigManager(bad).load_config()


def test_unknown_keys_are_rejected(tmp_path):
    """Test extra keys at any level name their location."""
    with pytest.raises(ConfigError) as info:
        ConfigManager(_write(tmp_path, "[train]\nmax_epoch = 3\n")).load_config()
    assert info.value.context["config_key"] == "train.max_epoch"

    with pytest.raises(ConfigError):
        ConfigManager(_write(tmp_path, "colour = 'red'\n")).load_config()


def test_cross_field_validation(tmp_path):
    """Test fold policy and backbone constraints."""
    with pytest.raises(ConfigError):
        ConfigManager(
            _write(tmp_path, '[data]\nscheme = "speaker-fraction-fold"\n')
        ).load_config()
    with pytest.raises(ConfigError):
        ConfigManager(
            _write(tmp_path, '[model]\nbackbone = "APC"\nbackbone_flops = 1e9\n')
        ).load_config()
    with pytest.raises(ConfigError):
        ConfigManager().load_config(folds=1)


def test_unreadable_configs(tmp_path):
    """Test missing files and TOML syntax errors."""
    with pytest.raises(ConfigError, match="not found"):
        ConfigManager(tmp_path / "missing.toml").load_config()
    with pytest.raises(ConfigError, match="TOML"):
        ConfigManager(_write(tmp_path, "seed = = 3\n")).load_config()


def test_echo_copies_source_verbatim(tmp_path):
    """Test the original file text is written into the run directory."""
    manager = ConfigManager(_write(tmp_path, SAMPLE))
    manager.load_config(output_dir=tmp_path / "run")
    echoed = manager.echo_config()
    assert echoed == tmp_path / "run" / "config.toml"
    assert echoed.read_text() == SAMPLE


def test_echo_dumps_effective_config(tmp_path):
    """Test flag-only runs echo a TOML dump that reloads to the same config."""
    manager = ConfigManager()
    cfg = manager.load_config(seed=5, output_dir=tmp_path / "run")
    echoed = manager.echo_config()
    assert ConfigManager(echoed).load_config() == cfg

    with pytest.raises(ConfigError):
        ConfigManager().echo_config()


def test_engine_settings_from_environment(monkeypatch):
    """Test EMOTRUST_ variables feed the engine settings."""
    monkeypatch.setenv("EMOTRUST_MAX_WORKERS", "3")
    monkeypatch.setenv("EMOTRUST_LOG_FORMAT", "json")
    settings = ConfigManager.engine_settings()
    assert settings.max_workers == 3
    assert settings.log_format == "json"
    assert EngineSettings().log_level == "INFO"

    monkeypatch.setenv("EMOTRUST_MAX_WORKERS", "0")
    with pytest.raises(ConfigError):
        ConfigManager.engine_settings()
