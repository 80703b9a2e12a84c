"""Train a detector, score sequences through its recorded pipeline, and judge them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from gfd.capture.types import Dataset, RawSequence
from gfd.common.errors import ValidationError
from gfd.common.logging import get_logger, log_event
from gfd.detect.bundle import Bundle
from gfd.detect.threshold import Threshold, aggregate, calibrate
from gfd.models import DEFAULT_AGGREGATION, TrainConfig
from gfd.models import gan, hmm, vae
from gfd.preprocess.pipeline import FeatureMode, fit_pipeline

logger = get_logger(__name__)


@dataclass(frozen=True)
class Verdict:
    sequence_id: str
    score: Optional[float]
    flagged: bool
    true_label: Optional[int] = None
    n_windows: int = 0

    @property
    def unscorable(self) -> bool:
        """True when the sequence is shorter than one window."""
        return self.score is None

    def to_record(self) -> dict:
        return {
            "sequence_id": self.sequence_id,
            "score": self.score,
            "flagged": self.flagged,
            "true_label": self.true_label,
            "unscorable": self.unscorable,
            "n_windows": self.n_windows,
        }


@dataclass
class TrainResult:
    bundle: Bundle
    history: list[float]


def train_detector(
    kind: str,
    sequences: Sequence[RawSequence],
    window_size: int,
    stride: int,
    feature_mode: FeatureMode,
    config: TrainConfig,
    aggregation: Optional[str] = None,
) -> TrainResult:
    """Fit the pipeline on normal training sequences, then the model on its outputs.

    The returned bundle has no threshold yet; see :func:`calibrate_bundle`.
    """
    if not sequences:
        raise ValidationError("no training sequences", field="sequences")
    aggregation = aggregation or DEFAULT_AGGREGATION[feature_mode]
    history: list[float]
    if kind == "hmm":
        pipeline = fit_pipeline(sequences, window_size, stride, feature_mode)
        observations = [x for x in pipeline.encode_all(sequences) if x.shape[0] >= 2]
        if not observations:
            raise ValidationError(
                "HMM training needs sequences with at least two windows", field="window_size", value=window_size
            )
        model, history = hmm.fit(observations, config)
    elif kind == "vae":
        pipeline = fit_pipeline(sequences, window_size, stride, feature_mode, output_range=(0.0, 1.0))
        x = np.vstack(pipeline.encode_all(sequences))
        model, history = vae.train(vae.build_vae(pipeline.dim, config), x, config)
    elif kind == "gan":
        low = -1.0 if config.output_activation == "tanh" else 0.0
        pipeline = fit_pipeline(sequences, window_size, stride, feature_mode, output_range=(low, 1.0))
        x = np.vstack(pipeline.encode_all(sequences))
        model, trace = gan.train(gan.build_gan(pipeline.dim, config), x, config)
        history = trace.d_losses
    else:
        raise ValidationError(f"unknown model kind {kind!r}", field="kind", value=kind)
    log_event(
        logger,
        "detector_trained",
        kind=kind,
        sequences=len(sequences),
        window_size=window_size,
        stride=stride,
        feature_mode=feature_mode,
    )
    return TrainResult(Bundle(kind, pipeline, model, config, aggregation), history)


def window_scores(bundle: Bundle, sequence: RawSequence) -> np.ndarray:
    """One score per window; empty when the sequence is shorter than a window."""
    x = bundle.pipeline.encode(sequence)
    if x.shape[0] == 0:
        return np.empty(0)
    if bundle.kind == "hmm":
        return hmm.window_scores(bundle.model, x, bundle.config.score)
    if bundle.kind == "vae":
        return vae.score_batch(bundle.model, x)
    return gan.score_batch(bundle.model, x, bundle.config)


def sequence_scores(
    bundle: Bundle, sequences: Iterable[RawSequence], aggregation: Optional[str] = None
) -> list[Optional[float]]:
    method = aggregation or bundle.aggregation
    out: list[Optional[float]] = []
    for seq in sequences:
        scores = window_scores(bundle, seq)
        out.append(aggregate(scores, method) if scores.size else None)
    return out


def calibrate_bundle(bundle: Bundle, sequences: Sequence[RawSequence], fpr_tolerance: float) -> Bundle:
    """Threshold from the aggregated scores of normal-only training sequences."""
    scores = [s for s in sequence_scores(bundle, sequences) if s is not None]
    if not scores:
        raise ValidationError("no calibration sequence yields a window", field="sequences")
    return bundle.with_threshold(calibrate(scores, fpr_tolerance))


def judge(
    bundle: Bundle,
    dataset: Dataset | Sequence[RawSequence],
    threshold: Optional[Threshold] = None,
    aggregation: Optional[str] = None,
) -> list[Verdict]:
    threshold = threshold or bundle.threshold
    if threshold is None:
        raise ValidationError("bundle has no calibrated threshold", field="threshold")
    sequences = list(dataset)
    verdicts = []
    for seq, score in zip(sequences, sequence_scores(bundle, sequences, aggregation)):
        n_windows = bundle.pipeline.window_count(len(seq))
        if score is None:
            verdicts.append(Verdict(seq.id, None, False, seq.label, 0))
        else:
            verdicts.append(Verdict(seq.id, score, threshold.flags(score), seq.label, n_windows))
    unscorable = sum(v.unscorable for v in verdicts)
    log_event(
        logger,
        "judged",
        sequences=len(verdicts),
        flagged=sum(v.flagged for v in verdicts),
        unscorable=unscorable,
        threshold=threshold.value,
    )
    return verdicts
