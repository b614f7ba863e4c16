"""Tests for the emotrust command line."""

import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from emotrust import __version__
from emotrust.cli import app
from emotrust.core.logging import configure_logging
from emotrust.metrics import MetricsReport

runner = CliRunner()

PIPELINE = """
seed = 3
model_name = "toy-head"

[data.synth]
layers = 2
frames = 5
dim = 4
separation = 4.0

[data.synth.counts]
neutral = [6, 6]
happy = [6, 6]
sad = [6, 6]
angry = [6, 6]

[model]
fc_hidden = 8

[train]
max_epochs = 3
batch_size = 8
learning_rate = 0.005
privacy_max_epochs = 2

[attack]
kind = "pgd"
snr_db = 10.0
pgd_steps = 2
sweep_snr_db = [0.0, 30.0]

[profile]
reference = true
scenario = "edge"
"""


@pytest.fixture(autouse=True)
def restore_logging():
    yield
    configure_logging("WARNING", "text")


def _config(tmp_path: Path, text: str = PIPELINE) -> Path:
    path = tmp_path / "run.toml"
    path.write_text(text)
    return path


def _invoke(*args: str):
    return runner.invoke(app, list(args))


def _report(name: str) -> MetricsReport:
    return MetricsReport(
        model_name=name,
        uar_percent=60.0,
        privacy_accuracy_percent=90.0,
        attack_success_rate_percent=50.0,
        equality_of_odds_percent=10.0,
        flops=3e9,
    )


def test_version():
    """Test --version prints the engine version."""
    result = _invoke("--version")
    assert result.exit_code == 0
    assert __version__ in result.output


def test_config_errors_exit_with_code_line(tmp_path):
    """Test invalid configs print one error line and exit 2."""
    config = _config(tmp_path, "[train]\nmax_epoch = 3\n")
    result = _invoke("synth", "-c", str(config), "-o", str(tmp_path / "out"))
    assert result.exit_code == 2
    assert 'error code=CONFIG_ERROR message="Invalid run config: train.max_epoch' in result.output


def test_missing_stage_inputs_are_data_errors(tmp_path):
    """Test commands run out of order report the missing input."""
    result = _invoke("train", "-o", str(tmp_path / "out"))
    assert result.exit_code == 2
    assert "error code=DATA_ERROR" in result.output

    config = _config(tmp_path)
    assert _invoke("synth", "-c", str(config), "-o", str(tmp_path / "out")).exit_code == 0
    result = _invoke("eval", "-c", str(config), "-o", str(tmp_path / "out"))
    assert result.exit_code == 2
    assert "run 'emotrust train' first" in result.output


def test_synth_writes_manifest_and_echo(tmp_path):
    """Test synth output, the config echo and the run metadata."""
    config = _config(tmp_path)
    out = tmp_path / "out"
    result = _invoke("synth", "-c", str(config), "-o", str(out), "--seed", "9")
    assert result.exit_code == 0, result.output

    lines = (out / "data" / "manifest.jsonl").read_text().splitlines()
    assert len([line for line in lines if '"id"' in line]) == 48
    assert (out / "config.toml").read_text() == PIPELINE
    meta = json.loads((out / "run_meta.json").read_text())
    assert meta["command"] == "synth" and meta["seed"] == 9


def test_profile_from_reports(tmp_path):
    """Test profiling explicit reports without the reference cohort."""
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    first.write_text(_report("alpha").dump())
    second.write_text(_report("beta").dump())
    out = tmp_path / "out"

    result = _invoke(
        "profile", str(first), str(second), "-o", str(out), "--no-reference", "--scenario", "cloud"
    )
    assert result.exit_code == 0, result.output
    document = json.loads((out / "profile.json").read_text())
    assert [p["raw"]["model_name"] for p in document["profiles"]] == ["alpha", "beta"]
    assert (out / "radar.svg").read_bytes().startswith(b"<?xml")
    ranking = json.loads((out / "recommendation.json").read_text())["ranking"]
    assert [r["model_name"] for r in ranking] == ["alpha", "beta"]


def test_profile_rejects_duplicate_names(tmp_path):
    """Test two reports for one model name are a profile error."""
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    first.write_text(_report("same").dump())
    second.write_text(_report("same").dump())
    result = _invoke("profile", str(first), str(second), "-o", str(tmp_path / "out"))
    assert result.exit_code == 2
    assert "error code=PROFILE_ERROR" in result.output


def test_profile_requires_complete_reports(tmp_path):
    """Test a report missing an axis is refused."""
    path = tmp_path / "partial.json"
    path.write_text(MetricsReport(model_name="p", uar_percent=50.0).dump())
    result = _invoke("profile", str(path), "-o", str(tmp_path / "out"))
    assert result.exit_code == 2
    assert "missing the privacy axis" in result.output


def _pipeline(config: Path, out: Path) -> None:
    for command in ("synth", "train", "attack", "eval", "profile"):
        result = _invoke(command, "-c", str(config), "-o", str(out))
        assert result.exit_code == 0, f"{command}: {result.output}"


@pytest.mark.slow
@pytest.mark.integration
def test_full_pipeline_is_deterministic(tmp_path):
    """Test the five stages write every artifact and rerun byte-identically."""
    config = _config(tmp_path)
    first, second = tmp_path / "first", tmp_path / "second"
    _pipeline(config, first)
    _pipeline(config, second)

    for name in (
        "folds.json",
        "predictions.jsonl",
        "train_metrics.json",
        "models/fold_0/index.json",
        "models/fold_0/history.jsonl",
        "attack_report.jsonl",
        "attack_summary.json",
        "robustness.json",
        "metrics.json",
        "profile.json",
        "radar.svg",
        "recommendation.json",
    ):
        assert (first / name).read_bytes() == (second / name).read_bytes(), name

    predictions = (first / "predictions.jsonl").read_text().splitlines()
    assert len(predictions) == 48
    metrics = json.loads((first / "metrics.json").read_text())
    assert metrics["model_name"] == "toy-head"
    assert metrics["privacy_epochs"] == 2
    assert metrics["flops_breakdown"]["frames"] == 598
    train_metrics = json.loads((first / "train_metrics.json").read_text())
    for row in train_metrics["folds"]:
        assert len(row["layer_weights"]) == 2
        assert sum(row["layer_weights"]) == pytest.approx(1.0)
    summary = json.loads((first / "attack_summary.json").read_text())
    assert summary["gradient_calls"] == 2 * summary["correct"]
    report_lines = (first / "attack_report.jsonl").read_text().splitlines()
    assert json.loads(report_lines[-1])["summary"] == summary

    document = json.loads((first / "profile.json").read_text())
    assert len(document["profiles"]) == 8
    assert document["profiles"][0]["raw"]["model_name"] == "toy-head"


@pytest.mark.slow
@pytest.mark.integration
def test_clean_attack_has_zero_success(tmp_path):
    """Test --clean attacks flip nothing."""
    config = _config(tmp_path)
    out = tmp_path / "out"
    for command in ("synth", "train"):
        assert _invoke(command, "-c", str(config), "-o", str(out)).exit_code == 0
    result = _invoke("attack", "-c", str(config), "-o", str(out), "--clean")
    assert result.exit_code == 0, result.output
    summary = json.loads((out / "attack_summary.json").read_text())
    assert summary["snr_db"] is None
    assert summary["flipped"] == 0


@pytest.mark.slow
@pytest.mark.integration
def test_single_full_pgd_step_matches_fgsm(tmp_path):
    """Test PGD with one step of the whole budget reports the FGSM success rate."""
    base = PIPELINE.replace("sweep_snr_db = [0.0, 30.0]\n", "")
    out = tmp_path / "out"
    for command in ("synth", "train"):
        assert _invoke(command, "-c", str(_config(tmp_path, base)), "-o", str(out)).exit_code == 0

    summaries = {}
    for kind, text in (
        ("pgd", base.replace("pgd_steps = 2", "pgd_steps = 1\npgd_step_ratio = 1.0")),
        ("fgsm", base.replace('kind = "pgd"', 'kind = "fgsm"')),
    ):
        result = _invoke("attack", "-c", str(_config(tmp_path, text)), "-o", str(out))
        assert result.exit_code == 0, result.output
        summaries[kind] = json.loads((out / "attack_summary.json").read_text())

    assert summaries["pgd"]["kind"] == "pgd"
    assert summaries["pgd"]["correct"] == summaries["fgsm"]["correct"]
    assert summaries["pgd"]["flipped"] == summaries["fgsm"]["flipped"]
    assert summaries["pgd"]["asr"] == summaries["fgsm"]["asr"]
    assert summaries["pgd"]["gradient_calls"] == summaries["fgsm"]["gradient_calls"]


@pytest.mark.slow
@pytest.mark.integration
def test_eval_needs_two_speakers_per_gender(tmp_path):
    """Test eval refuses fairness and privacy metrics with one speaker per gender."""
    text = PIPELINE.replace(
        "[data.synth]\n",
        '[data]\nscheme = "speaker-fraction-fold"\nfolds = 2\nval_policy = "fraction"\n\n'
        "[data.synth]\nspeakers_per_gender = 1\n",
    )
    config = _config(tmp_path, text)
    out = tmp_path / "out"
    for command in ("synth", "train"):
        result = _invoke(command, "-c", str(config), "-o", str(out))
        assert result.exit_code == 0, f"{command}: {result.output}"

    result = _invoke("eval", "-c", str(config), "-o", str(out))
    assert result.exit_code == 2
    assert "error code=DATA_ERROR" in result.output
    assert "Need at least 2 female speakers, found 1" in result.output
    assert not (out / "metrics.json").exists()
