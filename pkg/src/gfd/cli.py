"""gfd command line: synth, convert, train, calibrate, score, bench.

Configuration precedence is flags > ``--config`` JSON file > defaults. Every
command logs its fully resolved configuration before doing any work. Exit
codes: 0 success, 2 usage or validation error, 1 failure inside a stage.
"""

from __future__ import annotations

import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator, List, Optional

import click
import orjson
import pydantic
import typer
from pydantic import Field, field_validator

from gfd.capture.interchange import read_dataset, write_dataset
from gfd.common.config import settings
from gfd.common.errors import FaultDetectionError, StageError, ValidationError
from gfd.common.io import atomic_writer
from gfd.common.logging import get_logger, log_event
from gfd.detect.bundle import read_bundle, write_bundle
from gfd.detect.judge import calibrate_bundle, judge, sequence_scores, train_detector
from gfd.detect.threshold import threshold_stability
from gfd.evaluate.bench import (
    STABILITY_FOLDS,
    BenchmarkConfig,
    DatasetKind,
    load_benchmark_data,
    run_benchmark,
    run_seeds,
    stage,
)
from gfd.evaluate.metrics import metrics
from gfd.evaluate.report import (
    render_table,
    report_records,
    seed_summary_record,
    verdict_record,
    write_jsonl,
)
from gfd.evaluate.synth import SynthConfig, generate_synthetic
from gfd.preprocess.windows import pad_to_max

logger = get_logger("gfd.cli")

app = typer.Typer(add_completion=False, help="Generative fault detection for 1 kHz sensor sequences")


class RunConfig(BenchmarkConfig):
    """Benchmark settings plus the run-level choices of the CLI."""

    seed: int = Field(default_factory=lambda: settings.default_seed, ge=0)
    dataset: DatasetKind = "synthetic"
    seeds: List[int] = Field(default_factory=list)
    window_sizes: List[int] = Field(default_factory=list)
    synth: SynthConfig = Field(default_factory=SynthConfig)

    @field_validator("window_sizes")
    @classmethod
    def _check_sizes(cls, sizes: List[int]) -> List[int]:
        if any(s < 2 for s in sizes):
            raise ValueError("every window size must be >= 2")
        return sizes

    @field_validator("seeds")
    @classmethod
    def _check_seeds(cls, seeds: List[int]) -> List[int]:
        if any(s < 0 for s in seeds):
            raise ValueError("seeds must be non-negative")
        return seeds


def _read_config_file(path: Optional[Path]) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        data = orjson.loads(path.read_bytes())
    except (OSError, orjson.JSONDecodeError) as e:
        raise ValidationError(f"cannot read config file {path}: {e}", field="config") from e
    if not isinstance(data, dict):
        raise ValidationError("config file must hold a JSON object", field="config")
    return data


def resolve_config(
    command: str, config_path: Optional[Path], flags: dict[str, Any], synth_flags: Optional[dict[str, Any]] = None
) -> RunConfig:
    """Merge flags over the config file over defaults; stride, feature mode and
    aggregation stay unset here and are resolved per run."""
    data = _read_config_file(config_path)
    data.update({k: v for k, v in flags.items() if v is not None and v != []})
    if synth_flags:
        synth = dict(data.get("synth") or {})
        synth.update({k: v for k, v in synth_flags.items() if v is not None and v != []})
        data["synth"] = synth
    cfg = RunConfig.model_validate(data)
    log_event(logger, "config_resolved", command=command, **cfg.resolved().model_dump(mode="json"))
    return cfg


@contextmanager
def handle_errors() -> Iterator[None]:
    try:
        yield
    except pydantic.ValidationError as e:
        typer.echo(f"error: invalid configuration: {e}", err=True)
        raise typer.Exit(code=2)
    except StageError as e:
        typer.echo(f"error: {e.message}", err=True)
        raise typer.Exit(code=1)
    except FaultDetectionError as e:
        typer.echo(f"error: {e.message}", err=True)
        raise typer.Exit(code=2)


@app.callback(invoke_without_command=True)
def _root(ctx: typer.Context) -> None:
    if ctx.invoked_subcommand is None:
        typer.echo(ctx.get_help())
        raise typer.Exit(code=2)


_CONFIG = typer.Option(None, "--config", exists=True, dir_okay=False, help="JSON file with default settings")


@app.command("synth")
def synth_command(
    out: Path = typer.Option(..., "--out", help="Interchange file to write"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    n_normal: Optional[int] = typer.Option(None, "--n-normal"),
    n_anomalous: Optional[int] = typer.Option(None, "--n-anomalous"),
    min_length: Optional[int] = typer.Option(None, "--min-length"),
    max_length: Optional[int] = typer.Option(None, "--max-length"),
    kind: Optional[List[str]] = typer.Option(None, "--kind", help="step_shift|amplitude_burst|frequency_shift"),
    config: Optional[Path] = _CONFIG,
) -> None:
    """Write a seeded synthetic dataset with change-point anomalies."""
    with handle_errors():
        cfg = resolve_config(
            "synth",
            config,
            {"seed": seed},
            {
                "seed": seed,
                "n_normal": n_normal,
                "n_anomalous": n_anomalous,
                "min_length": min_length,
                "max_length": max_length,
                "kinds": kind,
            },
        )
        with stage("synth"):
            dataset = generate_synthetic(cfg.synth)
            write_dataset(dataset, out)
        typer.echo(f"wrote {len(dataset)} sequences ({len(dataset.anomalous())} anomalous) to {out}")


@app.command("convert")
def convert_command(
    source: Path = typer.Option(..., "--in", exists=True, dir_okay=False, help="Interchange file to read"),
    out: Path = typer.Option(..., "--out"),
    pad: bool = typer.Option(False, "--pad/--no-pad", help="Zero-pad every sequence to the longest one"),
) -> None:
    """Canonicalize an interchange file: grouped by id, time-ordered, validated."""
    with handle_errors():
        log_event(logger, "config_resolved", command="convert", source=str(source), out=str(out), pad=pad)
        with stage("ingest"):
            dataset = read_dataset(source)
        if pad:
            dataset = pad_to_max(dataset)
        with stage("write"):
            write_dataset(dataset, out)
        typer.echo(f"wrote {len(dataset)} sequences to {out}")


def _model_flags(
    model: Optional[str],
    window_size: Optional[int],
    stride: Optional[int],
    feature_mode: Optional[str],
    aggregation: Optional[str],
    epochs: Optional[int],
    batch_size: Optional[int],
    learning_rate: Optional[float],
    seed: Optional[int],
) -> dict[str, Any]:
    return {
        "model": model,
        "window_size": window_size,
        "stride": stride,
        "feature_mode": feature_mode,
        "aggregation": aggregation,
        "epochs": epochs,
        "batch_size": batch_size,
        "learning_rate": learning_rate,
        "seed": seed,
    }


@app.command("train")
def train_command(
    data: Path = typer.Option(..., "--data", exists=True, dir_okay=False, help="Training sequences (normal only)"),
    out: Path = typer.Option(..., "--out", help="Bundle file to write"),
    model: Optional[str] = typer.Option(None, "--model", help="hmm|vae|gan"),
    window_size: Optional[int] = typer.Option(None, "--window-size", help="Samples per window (1 sample = 1 ms)"),
    stride: Optional[int] = typer.Option(None, "--stride"),
    feature_mode: Optional[str] = typer.Option(None, "--feature-mode", help="stats|raw"),
    aggregation: Optional[str] = typer.Option(None, "--aggregation", help="max|mean"),
    epochs: Optional[int] = typer.Option(None, "--epochs"),
    batch_size: Optional[int] = typer.Option(None, "--batch-size"),
    learning_rate: Optional[float] = typer.Option(None, "--learning-rate"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    fpr: Optional[float] = typer.Option(None, "--fpr", help="Also calibrate with this FPR tolerance"),
    config: Optional[Path] = _CONFIG,
) -> None:
    """Fit the preprocessing pipeline and a model; write a bundle."""
    with handle_errors():
        flags = _model_flags(model, window_size, stride, feature_mode, aggregation, epochs, batch_size, learning_rate, seed)
        cfg = resolve_config("train", config, {**flags, "fpr_tolerance": fpr}).resolved()
        train_config = cfg.train_config()
        with stage("ingest"):
            sequences = read_dataset(data).normal()
        with stage("train"):
            bundle = train_detector(
                cfg.model, sequences, cfg.window_size, cfg.stride, cfg.feature_mode, train_config, cfg.aggregation
            ).bundle
        if fpr is not None:
            with stage("calibrate"):
                bundle = calibrate_bundle(bundle, sequences, cfg.fpr_tolerance)
        with stage("write"):
            write_bundle(bundle, out)
        typer.echo(f"wrote {cfg.model} bundle to {out}")


@app.command("calibrate")
def calibrate_command(
    bundle_path: Path = typer.Option(..., "--bundle", exists=True, dir_okay=False),
    data: Path = typer.Option(..., "--data", exists=True, dir_okay=False, help="Normal training sequences"),
    fpr: Optional[float] = typer.Option(None, "--fpr", help="Tolerated false-positive rate (default 0.05)"),
    out: Optional[Path] = typer.Option(None, "--out", help="Defaults to rewriting --bundle"),
    config: Optional[Path] = _CONFIG,
) -> None:
    """Set the bundle's threshold from its scores on normal training data."""
    with handle_errors():
        cfg = resolve_config("calibrate", config, {"fpr_tolerance": fpr})
        bundle = read_bundle(bundle_path)
        with stage("ingest"):
            sequences = read_dataset(data).normal()
        with stage("calibrate"):
            bundle = calibrate_bundle(bundle, sequences, cfg.fpr_tolerance)
            scores = [s for s in sequence_scores(bundle, sequences) if s is not None]
        with stage("write"):
            write_bundle(bundle, out or bundle_path)
        typer.echo(f"threshold {bundle.threshold.value:.6g} at fpr {cfg.fpr_tolerance} over {len(scores)} sequences")
        if len(scores) >= STABILITY_FOLDS:
            st = threshold_stability(scores, cfg.fpr_tolerance, STABILITY_FOLDS, cfg.seed)
            typer.echo(f"{STABILITY_FOLDS}-fold threshold range [{st.low:.6g}, {st.high:.6g}] (spread {st.spread:.3g})")


@app.command("score")
def score_command(
    bundle_path: Path = typer.Option(..., "--bundle", exists=True, dir_okay=False),
    data: Path = typer.Option(..., "--data", exists=True, dir_okay=False),
    out: Path = typer.Option(..., "--out", help="Verdicts as JSON Lines"),
    aggregation: Optional[str] = typer.Option(None, "--aggregation", help="Override the bundle's aggregation"),
    feature_mode: Optional[str] = typer.Option(None, "--feature-mode", help="Must match the bundle if given"),
    window_size: Optional[int] = typer.Option(None, "--window-size", help="Must match the bundle if given"),
) -> None:
    """Judge every sequence of a dataset against a calibrated bundle."""
    with handle_errors():
        bundle = read_bundle(bundle_path)
        pipe = bundle.pipeline
        if feature_mode is not None and feature_mode != pipe.feature_mode:
            raise ValidationError(
                f"bundle was trained on {pipe.feature_mode!r} features, not {feature_mode!r}", field="feature_mode"
            )
        if window_size is not None and window_size != pipe.window_size:
            raise ValidationError(f"bundle uses window_size {pipe.window_size}", field="window_size")
        if aggregation is not None and aggregation not in ("max", "mean"):
            raise ValidationError(f"unknown aggregation {aggregation!r}", field="aggregation")
        if bundle.threshold is None:
            raise ValidationError("bundle has no threshold; run calibrate first", field="threshold")
        log_event(
            logger,
            "config_resolved",
            command="score",
            model=bundle.kind,
            window_size=pipe.window_size,
            stride=pipe.stride,
            feature_mode=pipe.feature_mode,
            aggregation=aggregation or bundle.aggregation,
            threshold=bundle.threshold.value,
        )
        with stage("ingest"):
            dataset = read_dataset(data)
        with stage("judge"):
            verdicts = judge(bundle, dataset, aggregation=aggregation)
        with stage("write"):
            write_jsonl((verdict_record(v) for v in verdicts), out)
        m = metrics(verdicts)
        typer.echo(
            f"flagged {sum(v.flagged for v in verdicts)}/{len(verdicts)}; "
            f"accuracy {m.accuracy:.3f} precision {m.precision:.3f} recall {m.recall:.3f}"
            + (f"; {m.unscorable} unscorable" if m.unscorable else "")
        )


@app.command("bench")
def bench_command(
    model: Optional[str] = typer.Option(None, "--model", help="hmm|vae|gan"),
    dataset: Optional[str] = typer.Option(None, "--dataset", help="airbus|synthetic"),
    train: Optional[Path] = typer.Option(None, "--train", exists=True, dir_okay=False, help="Airbus training file"),
    test: Optional[Path] = typer.Option(None, "--test", exists=True, dir_okay=False, help="Airbus test file"),
    data: Optional[Path] = typer.Option(None, "--data", exists=True, dir_okay=False, help="Synthetic data file"),
    window_size: Optional[List[int]] = typer.Option(None, "--window-size", help="Repeat to sweep sizes"),
    stride: Optional[int] = typer.Option(None, "--stride"),
    feature_mode: Optional[str] = typer.Option(None, "--feature-mode"),
    aggregation: Optional[str] = typer.Option(None, "--aggregation"),
    epochs: Optional[int] = typer.Option(None, "--epochs"),
    batch_size: Optional[int] = typer.Option(None, "--batch-size"),
    learning_rate: Optional[float] = typer.Option(None, "--learning-rate"),
    seed: Optional[List[int]] = typer.Option(None, "--seed", help="Repeat for a multi-seed summary"),
    fpr: Optional[float] = typer.Option(None, "--fpr"),
    out: Optional[Path] = typer.Option(None, "--out", help="Report as JSON Lines"),
    table: Optional[Path] = typer.Option(None, "--table", help="Also write the text table here"),
    config: Optional[Path] = _CONFIG,
) -> None:
    """Train, calibrate, judge and score end to end; emit an evaluation report."""
    with handle_errors():
        flags = _model_flags(model, None, stride, feature_mode, aggregation, epochs, batch_size, learning_rate, None)
        flags.update(
            dataset=dataset,
            fpr_tolerance=fpr,
            seeds=seed or None,
            seed=seed[0] if seed else None,
            window_sizes=window_size or None,
            window_size=window_size[0] if window_size else None,
        )
        cfg = resolve_config("bench", config, flags)
        seeds = cfg.seeds or [cfg.seed]
        sizes = cfg.window_sizes or [cfg.window_size]
        if cfg.dataset == "synthetic" and data is None:
            for size in sizes:
                cfg.synth.check_window(size)
        out = out or settings.output_dir / f"report-{cfg.model}-{cfg.dataset}.jsonl"

        bench_data = load_benchmark_data(
            cfg.dataset,
            train_path=train,
            test_path=test,
            data_path=data,
            synth=cfg.synth,
            split_ratio=cfg.split_ratio,
            split_seed=seeds[0],
        )
        reports, summaries = [], []
        for size in sizes:
            run = cfg.model_copy(update={"window_size": size})
            if len(seeds) == 1:
                reports.append(run_benchmark(bench_data, run.model_copy(update={"seed": seeds[0]})))
            else:
                summary = run_seeds(bench_data, run, seeds)
                summaries.append(summary)
                reports.extend(summary.reports)

        records = [rec for r in reports for rec in report_records(r)]
        records += [seed_summary_record(s) for s in summaries]
        with stage("write"):
            write_jsonl(records, out)
            text = render_table(reports, summaries)
            if table is not None:
                with atomic_writer(table) as fh:
                    fh.write(text.encode())
        typer.echo(text, nl=False)
        typer.echo(f"report written to {out}")


def main(argv: Optional[List[str]] = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    command = typer.main.get_command(app)
    try:
        result = command.main(args=argv, prog_name="gfd", standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.exceptions.Abort:
        return 1
    return result if isinstance(result, int) else 0


def run() -> None:
    sys.exit(main())
