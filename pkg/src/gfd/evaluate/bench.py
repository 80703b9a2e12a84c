"""End-to-end benchmark: split -> preprocess/train -> calibrate -> judge -> metrics."""

from __future__ import annotations

import os
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, Iterator, Literal, Optional, Sequence

from pydantic import BaseModel, Field, model_validator

from gfd.capture.interchange import read_dataset
from gfd.capture.types import Dataset
from gfd.common.errors import FaultDetectionError, StageError, ValidationError
from gfd.common.logging import get_logger, log_event
from gfd.detect.judge import calibrate_bundle, judge, sequence_scores, train_detector
from gfd.detect.threshold import Aggregation, threshold_stability
from gfd.evaluate.metrics import metrics
from gfd.evaluate.report import EvalReport, SeedSummary
from gfd.evaluate.synth import SynthConfig, generate_synthetic
from gfd.models import CONFIG_TYPES, DEFAULT_AGGREGATION, DEFAULT_FEATURE_MODE, ModelKind, TrainConfig
from gfd.preprocess.pipeline import FeatureMode
from gfd.preprocess.windows import DEFAULT_WINDOW_SIZE, split

logger = get_logger(__name__)

DatasetKind = Literal["airbus", "synthetic"]
STABILITY_FOLDS = 5
# applied before model_options; benchmark GANs score by latent inversion
MODEL_OPTION_DEFAULTS: dict[str, dict[str, Any]] = {"gan": {"score": "inversion"}}


class BenchmarkConfig(BaseModel):
    """Everything a benchmark run needs besides the data itself.

    Unset ``stride``, ``feature_mode`` and ``aggregation`` resolve to
    ``window_size``, the model's default mode and the mode's default
    aggregation. ``model_options`` override ``MODEL_OPTION_DEFAULTS``.
    """

    model: ModelKind = "vae"
    window_size: int = Field(default=DEFAULT_WINDOW_SIZE, ge=2)
    stride: Optional[int] = Field(default=None, ge=1)
    feature_mode: Optional[FeatureMode] = None
    aggregation: Optional[Aggregation] = None
    fpr_tolerance: float = Field(default=0.05, ge=0.0, lt=1.0)
    split_ratio: float = Field(default=0.8, gt=0.0, lt=1.0)
    seed: int = Field(default=0, ge=0)
    epochs: Optional[int] = Field(default=None, ge=1)
    batch_size: Optional[int] = Field(default=None, ge=1)
    learning_rate: Optional[float] = Field(default=None, gt=0.0)
    model_options: dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_model_fields(self) -> "BenchmarkConfig":
        if self.model == "hmm":
            given = [n for n in ("epochs", "batch_size", "learning_rate") if getattr(self, n) is not None]
            if given:
                raise ValueError(f"{', '.join(given)} do not apply to the hmm model")
        return self

    def resolved(self) -> "BenchmarkConfig":
        mode = self.feature_mode or DEFAULT_FEATURE_MODE[self.model]
        return self.model_copy(
            update={
                "stride": self.stride or self.window_size,
                "feature_mode": mode,
                "aggregation": self.aggregation or DEFAULT_AGGREGATION[mode],
            }
        )

    def train_config(self) -> TrainConfig:
        fields: dict[str, Any] = {"seed": self.seed, **MODEL_OPTION_DEFAULTS.get(self.model, {})}
        for name in ("epochs", "batch_size", "learning_rate"):
            if getattr(self, name) is not None:
                fields[name] = getattr(self, name)
        fields.update(self.model_options)
        try:
            return CONFIG_TYPES[self.model](**fields)
        except ValueError as e:
            raise ValidationError(f"invalid {self.model} options: {e}", field="model_options") from e


@dataclass
class BenchmarkData:
    name: str
    train: Dataset
    test: Dataset


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Tag any failure inside the block with the stage name."""
    log_event(logger, "stage_start", stage=name)
    try:
        yield
    except StageError:
        raise
    except (FaultDetectionError, ValueError, ArithmeticError, OSError) as e:
        raise StageError(name, e) from e
    log_event(logger, "stage_done", stage=name)


def load_benchmark_data(
    dataset: DatasetKind,
    *,
    train_path: Optional[str | os.PathLike[str]] = None,
    test_path: Optional[str | os.PathLike[str]] = None,
    data_path: Optional[str | os.PathLike[str]] = None,
    synth: Optional[SynthConfig] = None,
    split_ratio: float = 0.8,
    split_seed: int = 0,
) -> BenchmarkData:
    """Airbus ships separate train (all normal) and test files, used as-is.

    The synthetic set is read from ``data_path`` or generated, then split
    with the normal-only train/test procedure.
    """
    if dataset == "airbus":
        if train_path is None or test_path is None:
            raise ValidationError("airbus benchmark needs both a train and a test file", field="train_path")
        with stage("ingest"):
            train = read_dataset(train_path)
            test = read_dataset(test_path)
        if train.anomalous():
            log_event(logger, "train_anomalies_dropped", count=len(train.anomalous()))
            train = train.replace(train.normal())
        return BenchmarkData("airbus", train, test)

    with stage("ingest"):
        full = read_dataset(data_path) if data_path is not None else generate_synthetic(synth or SynthConfig())
    with stage("split"):
        parts = split(full, split_ratio, split_seed)
    return BenchmarkData("synthetic", parts.train, parts.test)


def run_benchmark(data: BenchmarkData, config: BenchmarkConfig) -> EvalReport:
    cfg = config.resolved()
    log_event(logger, "benchmark_config", **{**cfg.model_dump(mode="json"), "dataset": data.name})
    train_sequences = list(data.train)
    train_config = cfg.train_config()

    with stage("train"):
        result = train_detector(
            cfg.model, train_sequences, cfg.window_size, cfg.stride, cfg.feature_mode, train_config, cfg.aggregation
        )
    with stage("calibrate"):
        bundle = calibrate_bundle(result.bundle, train_sequences, cfg.fpr_tolerance)
        scores = [s for s in sequence_scores(bundle, train_sequences) if s is not None]
        stability = None
        if len(scores) >= STABILITY_FOLDS:
            stability = threshold_stability(scores, cfg.fpr_tolerance, STABILITY_FOLDS, cfg.seed)
    with stage("judge"):
        verdicts = judge(bundle, data.test)
    with stage("metrics"):
        result_metrics = metrics(verdicts)

    report = EvalReport(
        model_kind=cfg.model,
        dataset=data.name,
        window_size=cfg.window_size,
        stride=cfg.stride,
        feature_mode=cfg.feature_mode,
        aggregation=cfg.aggregation,
        seed=cfg.seed,
        fpr_tolerance=cfg.fpr_tolerance,
        threshold=bundle.threshold.value,
        metrics=result_metrics,
        verdicts=verdicts,
        stability=stability,
    )
    log_event(logger, "benchmark_done", **{k: v for k, v in result_metrics.as_dict().items()})
    return report


def run_seeds(data: BenchmarkData, config: BenchmarkConfig, seeds: Sequence[int]) -> SeedSummary:
    if not seeds:
        raise ValidationError("at least one seed is required", field="seeds")
    reports = tuple(run_benchmark(data, config.model_copy(update={"seed": s})) for s in seeds)
    return SeedSummary(reports)
