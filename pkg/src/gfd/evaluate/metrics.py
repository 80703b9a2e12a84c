"""Sequence-level confusion counts and rates. Positive class = anomalous."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from gfd.capture.types import ANOMALOUS
from gfd.common.errors import ValidationError
from gfd.detect.judge import Verdict


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValidationError("confusion counts must be non-negative", field="counts")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class Metrics:
    confusion: ConfusionMatrix
    accuracy: float
    precision: float
    recall: float
    precision_undefined: bool = False
    recall_undefined: bool = False
    unscorable: int = 0

    def as_dict(self) -> dict:
        return {
            "tp": self.confusion.tp,
            "fp": self.confusion.fp,
            "tn": self.confusion.tn,
            "fn": self.confusion.fn,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "precision_undefined": self.precision_undefined,
            "recall_undefined": self.recall_undefined,
            "unscorable": self.unscorable,
        }


def confusion(verdicts: Sequence[Verdict]) -> tuple[ConfusionMatrix, int]:
    """Counts over scored verdicts, plus the number of unscorable ones left out."""
    tp = fp = tn = fn = unscorable = 0
    for v in verdicts:
        if v.true_label is None:
            raise ValidationError(f"verdict for {v.sequence_id!r} has no true label", field="true_label")
        if v.unscorable:
            unscorable += 1
            continue
        positive = v.true_label == ANOMALOUS
        if v.flagged and positive:
            tp += 1
        elif v.flagged:
            fp += 1
        elif positive:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp, fp, tn, fn), unscorable


def from_confusion(cm: ConfusionMatrix, unscorable: int = 0) -> Metrics:
    """Rates from counts; an undefined precision or recall is 0 with its flag set."""
    accuracy = (cm.tp + cm.tn) / cm.total if cm.total else 0.0
    predicted = cm.tp + cm.fp
    actual = cm.tp + cm.fn
    return Metrics(
        confusion=cm,
        accuracy=accuracy,
        precision=cm.tp / predicted if predicted else 0.0,
        recall=cm.tp / actual if actual else 0.0,
        precision_undefined=predicted == 0,
        recall_undefined=actual == 0,
        unscorable=unscorable,
    )


def metrics(verdicts: Sequence[Verdict]) -> Metrics:
    cm, unscorable = confusion(verdicts)
    return from_confusion(cm, unscorable)
