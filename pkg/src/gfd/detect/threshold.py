"""Threshold calibration on normal-only training scores and window aggregation."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from gfd.common.errors import ValidationError
from gfd.common.logging import get_logger, log_event
from gfd.engine.rng import RngStream

logger = get_logger(__name__)

Aggregation = Literal["max", "mean"]
AGGREGATIONS: tuple[str, ...] = ("max", "mean")
METHOD = "nearest_rank_quantile"
# absorbs float error in (1 - fpr) * n when the product is an exact integer
_RANK_EPS = 1e-9


@dataclass(frozen=True)
class Threshold:
    value: float
    fpr_tolerance: float
    calibration_size: int
    method: str = METHOD

    def __post_init__(self) -> None:
        if not 0.0 <= self.fpr_tolerance < 1.0:
            raise ValidationError("fpr_tolerance must lie in [0, 1)", field="fpr_tolerance", value=self.fpr_tolerance)
        if self.method != METHOD:
            raise ValidationError(f"unknown threshold method {self.method!r}", field="method")

    def flags(self, score: float) -> bool:
        return score > self.value


@dataclass(frozen=True)
class ThresholdStability:
    thresholds: tuple[float, ...]
    low: float
    high: float

    @property
    def spread(self) -> float:
        return self.high - self.low


def nearest_rank(n: int, fpr_tolerance: float) -> int:
    """1-based rank ``ceil((1 - fpr) * n)``, at least 1."""
    return max(1, math.ceil((1.0 - fpr_tolerance) * n - _RANK_EPS))


def calibrate(training_scores: Sequence[float] | np.ndarray, fpr_tolerance: float) -> Threshold:
    """Nearest-rank ``1 - fpr`` quantile of the training scores.

    At most ``fpr * n`` training scores lie strictly above the result.
    """
    scores = np.asarray(training_scores, dtype=np.float64).reshape(-1)
    if scores.size == 0:
        raise ValidationError("cannot calibrate a threshold on no scores", field="training_scores")
    if not 0.0 <= fpr_tolerance < 1.0:
        raise ValidationError("fpr_tolerance must lie in [0, 1)", field="fpr_tolerance", value=fpr_tolerance)
    if not np.all(np.isfinite(scores)):
        raise ValidationError("training scores must be finite", field="training_scores")
    ordered = np.sort(scores, kind="stable")
    value = float(ordered[nearest_rank(scores.size, fpr_tolerance) - 1])
    threshold = Threshold(value=value, fpr_tolerance=fpr_tolerance, calibration_size=int(scores.size))
    log_event(logger, "threshold_calibrated", value=value, fpr_tolerance=fpr_tolerance, n=int(scores.size))
    return threshold


def aggregate(window_scores: Sequence[float] | np.ndarray, method: Aggregation) -> float:
    scores = np.asarray(window_scores, dtype=np.float64).reshape(-1)
    if scores.size == 0:
        raise ValidationError("cannot aggregate an empty score list", field="window_scores")
    if method == "max":
        return float(scores.max())
    if method == "mean":
        return float(scores.mean())
    raise ValidationError(f"unknown aggregation {method!r}", field="aggregation", value=method)


def threshold_stability(
    scores: Sequence[float] | np.ndarray, fpr_tolerance: float, k: int = 5, seed: int = 0
) -> ThresholdStability:
    """Calibrate on each fold's complement of a seeded k-fold partition.

    Reported alongside the threshold; never used to move it.
    """
    values = np.asarray(scores, dtype=np.float64).reshape(-1)
    if k < 2:
        raise ValidationError("k must be >= 2", field="k", value=k)
    if values.size < k:
        raise ValidationError(f"need at least k={k} scores for {k}-fold stability", field="scores", value=values.size)
    folds = np.array_split(RngStream(seed, key=(3,)).permutation(values.size), k)
    thresholds = []
    for fold in folds:
        keep = np.ones(values.size, dtype=bool)
        keep[fold] = False
        ordered = np.sort(values[keep], kind="stable")
        thresholds.append(float(ordered[nearest_rank(ordered.size, fpr_tolerance) - 1]))
    result = ThresholdStability(tuple(thresholds), min(thresholds), max(thresholds))
    log_event(logger, "threshold_stability", level=logging.DEBUG, k=k, spread=result.spread)
    return result
