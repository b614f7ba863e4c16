"""
emotrust Command Line Interface
===============================

Typer application running the evaluation pipeline: synthesize data, train
heads by cross-validation, attack them, measure the trust axes and render
profiles. Every command reads the same run config and writes into its
``output_dir``.
"""

import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import structlog
import typer
from rich.console import Console
from rich.progress import Progress, SpinnerColumn, TextColumn
from rich.table import Table

from emotrust.config import ConfigManager, EngineSettings, RunConfig
from emotrust.core.exceptions import DataError, EmotrustError, ProfileError
from emotrust.core.logging import configure_logging
from emotrust.core.types import AttackKind, Scenario, TargetAttribute

app = typer.Typer(
    name="emotrust",
    help="emotrust - trustworthiness profiles for speech emotion recognition heads",
    no_args_is_help=True,
    rich_markup_mode="rich",
)

console = Console()
logger = structlog.get_logger(__name__)

FOLDS_FILE = "folds.json"


def version_callback(value: bool):
    """Print version and exit."""
    if value:
        from emotrust import __version__

        typer.echo(f"emotrust version {__version__}")
        raise typer.Exit()


@app.callback()
def callback(
    ctx: typer.Context,
    version: Optional[bool] = typer.Option(
        None,
        "--version",
        callback=version_callback,
        is_eager=True,
        help="Show version and exit",
    ),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable debug logging"),
):
    """
    emotrust - Trustworthiness Evaluation Engine

    Performance, privacy, safety, fairness and sustainability of emotion
    recognition heads on frozen speech embeddings.
    """
    ctx.ensure_object(dict)["verbose"] = verbose


ConfigOption = typer.Option(None, "--config", "-c", help="Run config (TOML or JSON)")
OutOption = typer.Option(None, "--out", "-o", help="Output directory (overrides config)")
SeedOption = typer.Option(None, "--seed", help="Base seed (overrides config)")
FoldsOption = typer.Option(None, "--folds", help="Number of folds (overrides config)")


def _fail(code: str, message: str, status: int) -> None:
    escaped = " ".join(message.split()).replace('"', '\\"')
    typer.echo(f'error code={code} message="{escaped}"', err=True)
    raise typer.Exit(status)


def _run(ctx: typer.Context, body: Callable[[EngineSettings], None]) -> None:
    """Run a command body with logging set up and errors mapped to exit codes."""
    try:
        settings = ConfigManager.engine_settings()
        verbose = bool((ctx.obj or {}).get("verbose"))
        configure_logging("DEBUG" if verbose else settings.log_level, settings.log_format)
        body(settings)
    except typer.Exit:
        raise
    except EmotrustError as e:
        _fail(e.code, str(e), 2)
    except Exception as e:
        _fail("UNEXPECTED", f"{type(e).__name__}: {e}", 1)


def _load(
    config_file: Optional[Path],
    out: Optional[Path],
    seed: Optional[int],
    folds: Optional[int],
) -> Tuple[ConfigManager, RunConfig]:
    manager = ConfigManager(config_file)
    cfg = manager.load_config(seed=seed, output_dir=out, folds=folds)
    return manager, cfg


def _write_json(path: Path, payload: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_jsonl(path: Path, rows: List[Dict[str, Any]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        "".join(json.dumps(row, sort_keys=True) + "\n" for row in rows), encoding="utf-8"
    )


def _read_jsonl(path: Path) -> List[Dict[str, Any]]:
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise DataError(
            f"Cannot read {path.name}; run the previous stage first", path=str(path), cause=e
        )
    try:
        return [json.loads(line) for line in lines if line.strip()]
    except json.JSONDecodeError as e:
        raise DataError(f"Malformed JSON line: {e.msg}", path=str(path), line=e.lineno, cause=e)


def _start(manager: ConfigManager, cfg: RunConfig, command: str) -> Path:
    """Create the run directory, echo the config and stamp run_meta.json."""
    from emotrust import __version__

    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manager.echo_config(out)
    _write_json(
        out / "run_meta.json",
        {
            "command": command,
            "engine_version": __version__,
            "seed": cfg.seed,
            "started_at": datetime.now(timezone.utc).isoformat(),
        },
    )
    return out


def _progress() -> Progress:
    return Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        console=console,
        transient=True,
    )


def _manifest(cfg: RunConfig):
    from emotrust.dataio import load_manifest

    return load_manifest(cfg.manifest_path)


def _fold_plan(cfg: RunConfig, manifest):
    from emotrust.dataio import FoldPlan

    path = Path(cfg.output_dir) / FOLDS_FILE
    try:
        plan = FoldPlan.model_validate_json(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise DataError("No fold plan found; run 'emotrust train' first", path=str(path), cause=e)
    except ValueError as e:
        raise DataError(f"Malformed fold plan: {e}", path=str(path), cause=e)
    plan.validate_against(manifest)
    return plan


def _fold_models(cfg: RunConfig, count: int):
    from emotrust.model import load_head

    return [load_head(Path(cfg.output_dir) / "models" / f"fold_{i}") for i in range(count)]


@app.command()
def synth(
    ctx: typer.Context,
    config_file: Optional[Path] = ConfigOption,
    out: Optional[Path] = OutOption,
    seed: Optional[int] = SeedOption,
    folds: Optional[int] = FoldsOption,
):
    """
    Generate a synthetic labelled corpus.

    Writes data/manifest.jsonl and one tensor file per utterance.
    """

    def body(settings: EngineSettings) -> None:
        from emotrust.dataio import synth_dataset

        manager, cfg = _load(config_file, out, seed, folds)
        root = _start(manager, cfg, "synth")
        with _progress() as progress:
            progress.add_task("Synthesizing utterances...", total=None)
            manifest = synth_dataset(cfg.data.synth, root / "data", seed=cfg.seed)

        console.print(
            f"[green]Wrote[/green] {len(manifest)} utterances "
            f"({len(manifest.speakers())} speakers) to {root / 'data'}"
        )

    _run(ctx, body)


@app.command()
def train(
    ctx: typer.Context,
    config_file: Optional[Path] = ConfigOption,
    out: Optional[Path] = OutOption,
    seed: Optional[int] = SeedOption,
    folds: Optional[int] = FoldsOption,
):
    """
    Train one emotion head per fold and pool the test predictions.

    Waveform manifests are encoded through the frozen toy encoder on load.
    """

    def body(settings: EngineSettings) -> None:
        from emotrust.dataio import make_folds
        from emotrust.metrics import GroupedPredictions, uar
        from emotrust.model import HeadConfig, count_params, save_head
        from emotrust.model.head import layer_weights
        from emotrust.training import cross_validate, load_examples

        manager, cfg = _load(config_file, out, seed, folds)
        manifest = _manifest(cfg)
        plan = make_folds(
            manifest, cfg.data.scheme, cfg.data.folds, cfg.data.val_policy, seed=cfg.seed
        )
        root = _start(manager, cfg, "train")
        train_cfg = cfg.train_config()

        examples = load_examples(
            manifest, TargetAttribute.EMOTION, train_cfg.max_audio_s, cfg.model.encoder
        )
        first = next(iter(examples.values())).emb
        head_cfg = HeadConfig(
            num_layers=first.shape[0], input_dim=first.shape[2], fc_hidden=cfg.model.fc_hidden
        )
        counts = count_params(head_cfg)
        logger.info("Head configured", trainable=counts.trainable, folds=len(plan))

        with _progress() as progress:
            progress.add_task(f"Training {len(plan)} folds...", total=None)
            result = cross_validate(
                train_cfg,
                head_cfg,
                manifest,
                plan,
                examples=examples,
                max_workers=settings.max_workers,
            )

        (root / FOLDS_FILE).write_text(plan.model_dump_json(indent=2) + "\n", encoding="utf-8")
        fold_rows = []
        warnings: List[str] = []
        for fold in result.folds:
            bundle = root / "models" / f"fold_{fold.index}"
            save_head(fold.model.params, bundle)
            (bundle / "history.jsonl").write_text(
                "".join(line + "\n" for line in fold.model.history_lines()), encoding="utf-8"
            )
            fold_preds = GroupedPredictions.build(
                [p.label for p in fold.predictions],
                [p.predicted for p in fold.predictions],
                head_cfg.num_classes,
            )
            fold_rows.append(
                {
                    "fold": fold.index,
                    "selected_epoch": fold.model.selected_epoch,
                    "test_uar_percent": 100.0 * uar(fold_preds),
                    "layer_weights": layer_weights(fold.model.params),
                    "warnings": fold.model.warnings + fold_preds.warnings,
                }
            )
            warnings.extend(fold.model.warnings)

        _write_jsonl(
            root / "predictions.jsonl", [p.model_dump(mode="json") for p in result.predictions]
        )
        pooled = GroupedPredictions.build(
            [p.label for p in result.predictions],
            [p.predicted for p in result.predictions],
            head_cfg.num_classes,
        )
        pooled_uar = 100.0 * uar(pooled)
        _write_json(
            root / "train_metrics.json",
            {
                "model_name": cfg.model_name,
                "pooled_uar_percent": pooled_uar,
                "trainable_params": counts.trainable,
                "folds": fold_rows,
                "warnings": warnings + pooled.warnings,
            },
        )

        table = Table(title="Cross-validation")
        table.add_column("Fold", style="cyan")
        table.add_column("Epoch")
        table.add_column("Test UAR %", justify="right")
        for row in fold_rows:
            table.add_row(
                str(row["fold"]), str(row["selected_epoch"]), f"{row['test_uar_percent']:.2f}"
            )
        console.print(table)
        console.print(f"[green]Pooled UAR:[/green] {pooled_uar:.2f}%")

    _run(ctx, body)


@app.command()
def attack(
    ctx: typer.Context,
    config_file: Optional[Path] = ConfigOption,
    out: Optional[Path] = OutOption,
    seed: Optional[int] = SeedOption,
    folds: Optional[int] = FoldsOption,
    clean: bool = typer.Option(False, "--clean", help="Infinite SNR: no perturbation"),
):
    """
    Attack each fold's test items against the head trained on that fold.

    Writes attack_report.jsonl (one row per item plus a summary row),
    attack_summary.json and, when a sweep is configured, robustness.json.
    """

    def body(settings: EngineSettings) -> None:
        from emotrust.attacks import (
            build_target,
            items_from_examples,
            pooled_attack_success_rate,
            pooled_robustness_curve,
        )
        from emotrust.training import load_examples

        manager, cfg = _load(config_file, out, seed, folds)
        attack_cfg = cfg.attack_config()
        if clean:
            attack_cfg = attack_cfg.model_copy(update={"clean": True})
        manifest = _manifest(cfg)
        plan = _fold_plan(cfg, manifest)
        heads = _fold_models(cfg, len(plan))
        root = _start(manager, cfg, "attack")

        examples = load_examples(
            manifest, TargetAttribute.EMOTION, cfg.train.max_audio_s, cfg.model.encoder
        )
        per_fold = [
            (
                build_target(params, attack_cfg.surface, cfg.model.encoder),
                items_from_examples([examples[i] for i in fold.test_ids], attack_cfg.surface),
            )
            for params, fold in zip(heads, plan.folds)
        ]

        with _progress() as progress:
            progress.add_task(f"Running {AttackKind(attack_cfg.kind).value}...", total=None)
            report = pooled_attack_success_rate(per_fold, attack_cfg, settings.max_workers)

        summary = report.summary()
        _write_jsonl(
            root / "attack_report.jsonl",
            [row.model_dump(mode="json") for row in report.rows] + [{"summary": summary}],
        )
        _write_json(root / "attack_summary.json", summary)

        if attack_cfg.sweep_snr_db:
            curve = pooled_robustness_curve(
                per_fold, attack_cfg.sweep_snr_db, attack_cfg, settings.max_workers
            )
            _write_json(root / "robustness.json", curve.model_dump(mode="json"))

        asr = "undefined" if report.asr is None else f"{100.0 * report.asr:.2f}%"
        console.print(
            f"[green]ASR:[/green] {asr} ({report.flipped}/{report.correct} flipped, "
            f"{report.gradient_calls} gradient calls)"
        )

    _run(ctx, body)


def _flops_encoder(cfg: RunConfig, manifest):
    """What runs in front of the head: a declared backbone or the toy encoder."""
    from emotrust.dataio import read_tensor

    if cfg.model.backbone is not None:
        return cfg.model.backbone
    if cfg.model.backbone_flops is not None:
        return cfg.model.backbone_flops
    first = manifest.records[0]
    if read_tensor(manifest.resolve(first)).data.ndim == 1:
        return cfg.model.encoder
    return None


@app.command("eval")
def evaluate(
    ctx: typer.Context,
    config_file: Optional[Path] = ConfigOption,
    out: Optional[Path] = OutOption,
    seed: Optional[int] = SeedOption,
    folds: Optional[int] = FoldsOption,
):
    """
    Measure every trust axis into metrics.json.

    Performance and fairness come from the pooled predictions, privacy from a
    gender probe trained on the same folds, safety from attack_summary.json
    when present and sustainability from the FLOPs counter.
    """

    def body(settings: EngineSettings) -> None:
        from emotrust.metrics import (
            GroupedPredictions,
            MetricsReport,
            equal_opportunity,
            equality_of_odds,
            flops_count,
            statistical_parity,
            uar,
        )
        from emotrust.metrics.privacy import privacy_probe

        manager, cfg = _load(config_file, out, seed, folds)
        manifest = _manifest(cfg)
        manifest.require_group_coverage()
        plan = _fold_plan(cfg, manifest)
        head_cfg = _fold_models(cfg, 1)[0].config
        rows = _read_jsonl(Path(cfg.output_dir) / "predictions.jsonl")
        root = _start(manager, cfg, "eval")

        by_id = manifest.by_id()
        unknown = [r["id"] for r in rows if r["id"] not in by_id]
        if unknown:
            raise DataError(f"Prediction for unknown utterance '{unknown[0]}'")
        preds = GroupedPredictions.build(
            [r["label"] for r in rows],
            [r["predicted"] for r in rows],
            head_cfg.num_classes,
            groups=[by_id[r["id"]].gender for r in rows],
        )

        with _progress() as progress:
            progress.add_task("Training gender probe...", total=None)
            privacy = privacy_probe(
                manifest,
                cfg.train_config(),
                head_cfg,
                plan,
                encoder=cfg.model.encoder,
                max_workers=settings.max_workers,
            )

        asr_percent: Optional[float] = None
        summary_path = root / "attack_summary.json"
        if summary_path.is_file():
            asr = json.loads(summary_path.read_text(encoding="utf-8")).get("asr")
            asr_percent = None if asr is None else 100.0 * asr
        else:
            logger.warning("No attack summary; safety axis left empty", path=str(summary_path))

        flops = flops_count(head_cfg, _flops_encoder(cfg, manifest))
        report = MetricsReport(
            model_name=cfg.model_name,
            uar_percent=100.0 * uar(preds),
            privacy_accuracy_percent=privacy.accuracy_percent,
            attack_success_rate_percent=asr_percent,
            equality_of_odds_percent=equality_of_odds(preds),
            statistical_parity_percent=statistical_parity(preds),
            equal_opportunity_percent=equal_opportunity(preds),
            flops=float(flops.total),
            flops_breakdown=flops.as_dict(),
            privacy_epochs=privacy.epochs,
            warnings=list(preds.warnings),
        )
        (root / "metrics.json").write_text(report.dump(), encoding="utf-8")

        table = Table(title=f"Trust metrics: {cfg.model_name}")
        table.add_column("Metric", style="cyan")
        table.add_column("Value", justify="right")
        for name, value in (
            ("UAR %", report.uar_percent),
            ("Gender probe accuracy %", report.privacy_accuracy_percent),
            ("Attack success rate %", report.attack_success_rate_percent),
            ("Equality of odds %", report.equality_of_odds_percent),
            ("Statistical parity %", report.statistical_parity_percent),
            ("Equal opportunity %", report.equal_opportunity_percent),
        ):
            table.add_row(name, "-" if value is None else f"{value:.2f}")
        table.add_row("FLOPs (6 s)", f"{report.flops:.4g}")
        console.print(table)

    _run(ctx, body)


@app.command()
def profile(
    ctx: typer.Context,
    reports: Optional[List[Path]] = typer.Argument(
        None, help="Metrics reports to compare (default: <out>/metrics.json)"
    ),
    config_file: Optional[Path] = ConfigOption,
    out: Optional[Path] = OutOption,
    seed: Optional[int] = SeedOption,
    folds: Optional[int] = FoldsOption,
    reference: Optional[bool] = typer.Option(
        None, "--reference/--no-reference", help="Add the published backbone cohort"
    ),
    scenario: Optional[Scenario] = typer.Option(
        None, "--scenario", help="Rank models for a deployment scenario"
    ),
):
    """
    Build, normalize and render trust profiles.

    Writes profile.json and radar.svg; with a scenario also ranks the models
    into recommendation.json.
    """

    def body(settings: EngineSettings) -> None:
        from emotrust.metrics import load_report
        from emotrust.profile import (
            axis_specs,
            build_profile,
            emit_json,
            emit_radar_svg,
            normalize,
            recommend,
            reference_profiles,
        )

        manager, cfg = _load(config_file, out, seed, folds)
        sources = list(reports or [])
        use_reference = cfg.profile.reference if reference is None else reference
        own = Path(cfg.output_dir) / "metrics.json"
        if not sources and (own.is_file() or not use_reference):
            sources = [own]
        root = _start(manager, cfg, "profile")

        profiles = [build_profile(load_report(path), source=str(path)) for path in sources]
        if use_reference:
            profiles.extend(reference_profiles(cfg.profile.reference_uar_percent))
        names = [p.model_name for p in profiles]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ProfileError(f"Duplicate model name '{duplicates[0]}' in profile cohort")

        specs = axis_specs(cfg.profile.axes)
        normalized = normalize(profiles, specs)
        (root / "profile.json").write_text(emit_json(profiles, normalized, specs), encoding="utf-8")
        (root / "radar.svg").write_bytes(emit_radar_svg(normalized))
        console.print(f"[green]Profiled[/green] {len(profiles)} models into {root}")

        chosen = scenario or cfg.profile.scenario
        if chosen is not None:
            ranking = recommend(normalized, chosen)
            _write_json(
                root / "recommendation.json",
                {
                    "scenario": Scenario(chosen).value,
                    "ranking": [{"model_name": n, "score": s} for n, s in ranking],
                },
            )
            table = Table(title=f"Recommendation: {Scenario(chosen).value}")
            table.add_column("Rank", style="cyan")
            table.add_column("Model")
            table.add_column("Score", justify="right")
            for rank, (name, score) in enumerate(ranking, start=1):
                table.add_row(str(rank), name, f"{score:.3f}")
            console.print(table)

    _run(ctx, body)


def main() -> None:
    """Main entry point for the CLI application."""
    try:
        app()
    except KeyboardInterrupt:
        typer.echo('error code=INTERRUPTED message="Operation cancelled by user"', err=True)
        sys.exit(1)
