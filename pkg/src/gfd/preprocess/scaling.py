"""Standardization of feature columns and min-max mapping for sigmoid/tanh models."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, overload

import numpy as np

from gfd.common.errors import ValidationError
from gfd.preprocess.features import FeatureVector, as_matrix


@dataclass(frozen=True, eq=False)
class ScalerParams:
    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self) -> None:
        if self.means.shape != self.stds.shape:
            raise ValidationError("scaler means and deviations differ in length", field="stds")
        if np.any(self.stds < 0):
            raise ValidationError("scaler deviations must be non-negative", field="stds")

    @property
    def dim(self) -> int:
        return int(self.means.size)

    def apply(self, matrix: np.ndarray) -> np.ndarray:
        matrix = np.atleast_2d(matrix)
        if matrix.shape[1] != self.dim:
            raise ValidationError(
                f"feature dimension {matrix.shape[1]} does not match scaler dimension {self.dim}", field="features"
            )
        safe = np.where(self.stds == 0.0, 1.0, self.stds)
        return np.where(self.stds == 0.0, 0.0, (matrix - self.means) / safe)


def fit_scaler(features: Sequence[FeatureVector] | np.ndarray) -> ScalerParams:
    """Per-column population mean and standard deviation."""
    matrix = as_matrix(features)
    if matrix.shape[0] == 0:
        raise ValidationError("cannot fit a scaler on no features", field="features")
    return ScalerParams(means=matrix.mean(axis=0), stds=matrix.std(axis=0))


@overload
def transform(scaler: ScalerParams, features: np.ndarray) -> np.ndarray: ...
@overload
def transform(scaler: ScalerParams, features: Sequence[FeatureVector]) -> list[FeatureVector]: ...


def transform(scaler, features):
    """``(x - mean) / std`` per column; zero-deviation columns map to 0."""
    if isinstance(features, np.ndarray):
        return scaler.apply(features)
    out = scaler.apply(as_matrix(features))
    return [FeatureVector.from_array(row) for row in out]


@dataclass(frozen=True, eq=False)
class MinMaxParams:
    """Affine map of training min/max onto ``[low, high]``.

    ``lo``/``hi`` have one entry per column, or a single entry shared by all
    columns (raw windows are scaled with one dataset-wide range).
    """

    lo: np.ndarray
    hi: np.ndarray
    low: float = 0.0
    high: float = 1.0

    def apply(self, matrix: np.ndarray) -> np.ndarray:
        span = self.hi - self.lo
        safe = np.where(span == 0.0, 1.0, span)
        unit = np.where(span == 0.0, 0.0, (np.atleast_2d(matrix) - self.lo) / safe)
        return self.low + (self.high - self.low) * unit


def fit_minmax(matrix: np.ndarray, per_column: bool, feature_range: tuple[float, float] = (0.0, 1.0)) -> MinMaxParams:
    matrix = np.atleast_2d(matrix)
    if matrix.size == 0:
        raise ValidationError("cannot fit min-max scaling on no data", field="features")
    if per_column:
        lo, hi = matrix.min(axis=0), matrix.max(axis=0)
    else:
        lo, hi = np.array([matrix.min()]), np.array([matrix.max()])
    return MinMaxParams(lo=lo, hi=hi, low=feature_range[0], high=feature_range[1])
