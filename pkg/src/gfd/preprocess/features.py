"""Four-statistic window summaries: mean, median, skewness, kurtosis.

Moments are population moments (1/n). Skewness is m3 / m2**1.5 and kurtosis
m4 / m2**2 without excess subtraction, computed on the standardized window.
Only windows whose m2 is exactly zero (constant rows) get
skewness = kurtosis = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from gfd.preprocess.windows import Window

FEATURE_NAMES = ("mean", "median", "skewness", "kurtosis")


@dataclass(frozen=True)
class FeatureVector:
    mean: float
    median: float
    skewness: float
    kurtosis: float

    def as_array(self) -> np.ndarray:
        return np.array([self.mean, self.median, self.skewness, self.kurtosis], dtype=np.float64)

    @classmethod
    def from_array(cls, row: np.ndarray) -> "FeatureVector":
        return cls(*(float(v) for v in row))


def feature_matrix(windows: np.ndarray) -> np.ndarray:
    """Features of each row of a (count, window_size) array, shape (count, 4)."""
    windows = np.atleast_2d(np.asarray(windows, dtype=np.float64))
    if windows.shape[0] == 0:
        return np.empty((0, len(FEATURE_NAMES)))
    mean = windows.mean(axis=1)
    median = np.median(windows, axis=1)
    centered = windows - mean[:, None]
    m2 = np.mean(centered**2, axis=1)
    # zeroed only when m2 is exactly 0
    degenerate = (np.ptp(windows, axis=1) == 0.0) | (m2 == 0.0)
    scale = np.sqrt(np.where(degenerate, 1.0, m2))
    z = centered / scale[:, None]
    skew = np.where(degenerate, 0.0, np.mean(z**3, axis=1))
    kurt = np.where(degenerate, 0.0, np.mean(z**4, axis=1))
    return np.column_stack([mean, median, skew, kurt])


def extract_features(window: Window) -> FeatureVector:
    return FeatureVector.from_array(feature_matrix(window.values[None, :])[0])


def as_matrix(features: Sequence[FeatureVector] | np.ndarray) -> np.ndarray:
    if isinstance(features, np.ndarray):
        return np.atleast_2d(features.astype(np.float64, copy=False))
    return np.array([f.as_array() for f in features], dtype=np.float64).reshape(len(features), -1)
