"""The recorded preprocessing chain applied identically at train and score time."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np

from gfd.capture.types import RawSequence
from gfd.common.errors import ValidationError
from gfd.preprocess.features import FEATURE_NAMES, feature_matrix
from gfd.preprocess.scaling import MinMaxParams, ScalerParams, fit_minmax, fit_scaler
from gfd.preprocess.windows import check_geometry, window_count, window_matrix

FeatureMode = Literal["stats", "raw"]
FEATURE_MODES: tuple[str, ...] = ("stats", "raw")


@dataclass(frozen=True, eq=False)
class Pipeline:
    window_size: int
    stride: int
    feature_mode: FeatureMode
    scaler: Optional[ScalerParams] = None
    minmax: Optional[MinMaxParams] = None

    def __post_init__(self) -> None:
        check_geometry(self.window_size, self.stride)
        if self.feature_mode not in FEATURE_MODES:
            raise ValidationError(f"unknown feature mode {self.feature_mode!r}", field="feature_mode")
        if self.feature_mode == "stats" and self.scaler is None:
            raise ValidationError("stats pipelines need a fitted scaler", field="scaler")

    @property
    def dim(self) -> int:
        return len(FEATURE_NAMES) if self.feature_mode == "stats" else self.window_size

    def encode(self, samples: RawSequence | np.ndarray) -> np.ndarray:
        """Model inputs for one sequence, shape (n_windows, dim); zero rows if it is too short."""
        values = samples.samples if isinstance(samples, RawSequence) else np.asarray(samples, dtype=np.float64)
        rows = _unscaled(values, self.window_size, self.stride, self.feature_mode)
        if self.scaler is not None:
            rows = self.scaler.apply(rows)
        if self.minmax is not None:
            rows = self.minmax.apply(rows)
        return rows.reshape(-1, self.dim)

    def window_count(self, n: int) -> int:
        return window_count(n, self.window_size, self.stride)

    def encode_all(self, sequences: Sequence[RawSequence]) -> list[np.ndarray]:
        return [self.encode(s) for s in sequences]


def _unscaled(values: np.ndarray, window_size: int, stride: int, mode: str) -> np.ndarray:
    rows = window_matrix(values, window_size, stride)
    return feature_matrix(rows) if mode == "stats" else rows


def fit_pipeline(
    sequences: Sequence[RawSequence],
    window_size: int,
    stride: int,
    feature_mode: FeatureMode,
    output_range: Optional[tuple[float, float]] = None,
) -> Pipeline:
    """Fit the scaling constants on training sequences.

    Stats features are standardized per column; with ``output_range`` they are
    then min-max mapped per column. Raw windows are only min-max mapped, with
    one dataset-wide range.
    """
    check_geometry(window_size, stride)
    if feature_mode not in FEATURE_MODES:
        raise ValidationError(f"unknown feature mode {feature_mode!r}", field="feature_mode", value=feature_mode)
    blocks = [_unscaled(s.samples, window_size, stride, feature_mode) for s in sequences]
    blocks = [b for b in blocks if b.shape[0] > 0]
    if not blocks:
        raise ValidationError(
            f"no training sequence yields a window of size {window_size}", field="window_size", value=window_size
        )
    train = np.vstack(blocks)

    scaler = None
    if feature_mode == "stats":
        scaler = fit_scaler(train)
        train = scaler.apply(train)
    minmax = None
    if output_range is not None:
        minmax = fit_minmax(train, per_column=feature_mode == "stats", feature_range=output_range)
    return Pipeline(window_size, stride, feature_mode, scaler, minmax)
