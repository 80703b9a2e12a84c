"""Canonical in-memory data model for labeled 1 kHz recordings.

Sample index ``i`` corresponds to ``i`` milliseconds. Instances are immutable:
sample arrays are stored read-only so datasets can be shared across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from gfd.common.errors import ValidationError

NORMAL = 0
ANOMALOUS = 1


def _frozen(values: Sequence[float] | np.ndarray) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class RawSequence:
    """One device recording."""

    id: str
    samples: np.ndarray
    label: int = NORMAL
    anomaly_at_ms: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", _frozen(self.samples))
        if not self.id or not isinstance(self.id, str) or "," in self.id:
            raise ValidationError("sequence id must be a non-empty token without commas", field="id", value=self.id)
        if self.samples.size == 0:
            raise ValidationError(f"sequence {self.id!r} has no samples", field="samples")
        if self.label not in (NORMAL, ANOMALOUS):
            raise ValidationError(f"sequence {self.id!r}: label must be 0 or 1", field="label", value=self.label)
        if self.anomaly_at_ms is not None:
            if self.label != ANOMALOUS:
                raise ValidationError(
                    f"sequence {self.id!r}: anomaly_at_ms requires label 1", field="anomaly_at_ms", value=self.anomaly_at_ms
                )
            if not 0 <= self.anomaly_at_ms < self.samples.size:
                raise ValidationError(
                    f"sequence {self.id!r}: anomaly_at_ms outside [0, {self.samples.size})",
                    field="anomaly_at_ms",
                    value=self.anomaly_at_ms,
                )

    def __len__(self) -> int:
        return int(self.samples.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RawSequence):
            return NotImplemented
        return (
            self.id == other.id
            and self.label == other.label
            and self.anomaly_at_ms == other.anomaly_at_ms
            and np.array_equal(self.samples, other.samples)
        )

    def __hash__(self) -> int:
        return hash((self.id, self.label, self.anomaly_at_ms, self.samples.size))

    @property
    def is_anomalous(self) -> bool:
        return self.label == ANOMALOUS


@dataclass(frozen=True)
class Dataset:
    sequences: tuple[RawSequence, ...]
    source_name: str = "memory"
    _index: dict[str, int] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "sequences", tuple(self.sequences))
        index: dict[str, int] = {}
        for i, seq in enumerate(self.sequences):
            if seq.id in index:
                raise ValidationError(f"duplicate sequence id {seq.id!r}", field="id", value=seq.id)
            index[seq.id] = i
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.sequences)

    def __iter__(self) -> Iterator[RawSequence]:
        return iter(self.sequences)

    def __getitem__(self, seq_id: str) -> RawSequence:
        return self.sequences[self._index[seq_id]]

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.sequences]

    def normal(self) -> list[RawSequence]:
        return [s for s in self.sequences if s.label == NORMAL]

    def anomalous(self) -> list[RawSequence]:
        return [s for s in self.sequences if s.label == ANOMALOUS]

    def replace(self, sequences: Sequence[RawSequence], source_name: Optional[str] = None) -> "Dataset":
        return Dataset(tuple(sequences), source_name or self.source_name)
