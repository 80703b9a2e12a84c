"""Padding, fixed-size windowing and normal-only train/test splitting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from gfd.capture.types import NORMAL, Dataset, RawSequence
from gfd.common.errors import ValidationError
from gfd.engine.rng import RngStream

DEFAULT_WINDOW_SIZE = 2048  # samples; 2048 ms at 1 kHz


@dataclass(frozen=True, eq=False)
class Window:
    parent_id: str
    start_index: int
    values: np.ndarray

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class SplitResult:
    train: Dataset
    test: Dataset
    split_ratio: float
    seed: int


def pad_to_max(dataset: Dataset) -> Dataset:
    """Pre-pad every sequence with zeros up to the longest length.

    Original samples keep their values as a suffix; ``anomaly_at_ms`` moves
    right by the pad amount.
    """
    if len(dataset) == 0:
        raise ValidationError("cannot pad an empty dataset", field="sequences")
    target = max(len(s) for s in dataset)
    padded = []
    for seq in dataset:
        pad = target - len(seq)
        if pad == 0:
            padded.append(seq)
            continue
        onset = None if seq.anomaly_at_ms is None else seq.anomaly_at_ms + pad
        values = np.concatenate([np.zeros(pad), seq.samples])
        padded.append(RawSequence(seq.id, values, seq.label, onset))
    return dataset.replace(padded)


def window_count(n: int, window_size: int, stride: int) -> int:
    if n < window_size:
        return 0
    return (n - window_size) // stride + 1


def check_geometry(window_size: int, stride: int) -> None:
    if window_size < 2:
        raise ValidationError("window_size must be >= 2", field="window_size", value=window_size)
    if stride < 1:
        raise ValidationError("stride must be >= 1", field="stride", value=stride)


def window_matrix(samples: np.ndarray, window_size: int, stride: int) -> np.ndarray:
    """All full windows of ``samples`` as rows of a (count, window_size) array."""
    check_geometry(window_size, stride)
    count = window_count(samples.size, window_size, stride)
    if count == 0:
        return np.empty((0, window_size))
    view = np.lib.stride_tricks.sliding_window_view(samples, window_size)[::stride]
    return np.array(view[:count], dtype=np.float64)


def window(sequence: RawSequence, window_size: int, stride: int) -> list[Window]:
    """Windows starting at 0, stride, 2*stride, ...; a trailing partial window is dropped."""
    rows = window_matrix(sequence.samples, window_size, stride)
    return [Window(sequence.id, i * stride, row) for i, row in enumerate(rows)]


def split(dataset: Dataset, ratio: float, seed: int) -> SplitResult:
    """Seeded split: ``floor(ratio * #normal)`` normals train, the rest plus all anomalies test."""
    if not 0.0 < ratio < 1.0:
        raise ValidationError("split ratio must lie in (0, 1)", field="ratio", value=ratio)
    normal = [s for s in dataset if s.label == NORMAL]
    if not normal:
        raise ValidationError("cannot form training set: no normal sequences", field="sequences")
    order = RngStream(seed).permutation(len(normal))
    n_train = math.floor(ratio * len(normal) + 1e-12)
    train = [normal[i] for i in order[:n_train]]
    test = [normal[i] for i in order[n_train:]] + dataset.anomalous()
    return SplitResult(
        train=Dataset(tuple(train), f"{dataset.source_name}:train"),
        test=Dataset(tuple(test), f"{dataset.source_name}:test"),
        split_ratio=ratio,
        seed=seed,
    )
