"""Evaluation reports: a text table with the published figures alongside, and
JSON Lines records (field order documented in docs/REPORT_FORMAT.md)."""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from statistics import fmean
from typing import Any, Iterable, Optional, Sequence

import orjson
from rich.console import Console
from rich.table import Table

from gfd.common.io import atomic_writer
from gfd.detect.judge import Verdict
from gfd.detect.threshold import ThresholdStability
from gfd.evaluate.metrics import Metrics


@dataclass(frozen=True)
class ReferenceFigure:
    dataset: str
    source: str
    accuracy: float
    precision: Optional[float] = None
    recall: Optional[float] = None


# Published sequence-level figures. The stapler data is not public, so its
# figures are shown next to synthetic-surrogate rows for orientation only.
REFERENCE_FIGURES: dict[tuple[str, str], tuple[ReferenceFigure, ...]] = {
    ("hmm", "airbus"): (
        ReferenceFigure("airbus", "results table", 0.97, 1.00, 0.97),
        ReferenceFigure("airbus", "summary text", 0.91),
    ),
    ("gan", "airbus"): (ReferenceFigure("airbus", "results table", 0.94, 1.00, 0.94),),
    ("vae", "airbus"): (ReferenceFigure("airbus", "results table", 0.97, 0.98, 0.97),),
    ("hmm", "synthetic"): (ReferenceFigure("stapler", "results table", 0.82, 1.00, 0.82),),
    ("gan", "synthetic"): (ReferenceFigure("stapler", "results table", 0.95, 1.00, 0.95),),
    ("vae", "synthetic"): (ReferenceFigure("stapler", "results table", 0.97, 1.00, 0.97),),
}


def reference_figures(model_kind: str, dataset: str) -> tuple[ReferenceFigure, ...]:
    return REFERENCE_FIGURES.get((model_kind, dataset), ())


@dataclass
class EvalReport:
    model_kind: str
    dataset: str
    window_size: int
    stride: int
    feature_mode: str
    aggregation: str
    seed: int
    fpr_tolerance: float
    threshold: float
    metrics: Metrics
    verdicts: list[Verdict] = field(default_factory=list)
    stability: Optional[ThresholdStability] = None

    @property
    def references(self) -> tuple[ReferenceFigure, ...]:
        return reference_figures(self.model_kind, self.dataset)


@dataclass(frozen=True)
class SeedSummary:
    """Mean and spread (max - min) of the rates over per-seed reports."""

    reports: tuple[EvalReport, ...]

    @property
    def seeds(self) -> list[int]:
        return [r.seed for r in self.reports]

    def mean(self, name: str) -> float:
        return fmean(getattr(r.metrics, name) for r in self.reports)

    def spread(self, name: str) -> float:
        values = [getattr(r.metrics, name) for r in self.reports]
        return max(values) - min(values)


def _pct(value: Optional[float]) -> str:
    return "-" if value is None else f"{100.0 * value:.1f}%"


def _published(refs: Iterable[ReferenceFigure]) -> str:
    return "; ".join(f"{_pct(r.accuracy)}/{_pct(r.precision)}/{_pct(r.recall)} ({r.dataset}, {r.source})" for r in refs)


def render_table(reports: Sequence[EvalReport], summaries: Sequence[SeedSummary] = ()) -> str:
    table = Table(title="Sequence-level detection", show_lines=False)
    for column in ("model", "dataset", "window", "stride", "features", "seed", "accuracy", "precision", "recall"):
        table.add_column(column, justify="right" if column not in ("model", "dataset", "features") else "left")
    table.add_column("threshold", justify="right")
    table.add_column("published acc/prec/rec")
    for r in reports:
        m = r.metrics
        precision = _pct(m.precision) + ("*" if m.precision_undefined else "")
        recall = _pct(m.recall) + ("*" if m.recall_undefined else "")
        table.add_row(
            r.model_kind,
            r.dataset,
            str(r.window_size),
            str(r.stride),
            r.feature_mode,
            str(r.seed),
            _pct(m.accuracy),
            precision,
            recall,
            f"{r.threshold:.6g}",
            _published(r.references),
        )
    for s in summaries:
        first = s.reports[0]
        table.add_row(
            first.model_kind,
            first.dataset,
            str(first.window_size),
            str(first.stride),
            first.feature_mode,
            "mean " + ",".join(str(x) for x in s.seeds),
            f"{_pct(s.mean('accuracy'))} ±{_pct(s.spread('accuracy'))}",
            f"{_pct(s.mean('precision'))} ±{_pct(s.spread('precision'))}",
            f"{_pct(s.mean('recall'))} ±{_pct(s.spread('recall'))}",
            "",
            _published(first.references),
        )
    buffer = io.StringIO()
    Console(file=buffer, width=160, force_terminal=False, color_system=None).print(table)
    text = buffer.getvalue()
    if any(r.metrics.precision_undefined or r.metrics.recall_undefined for r in reports):
        text += "* undefined (no flagged or no anomalous sequences); reported as 0\n"
    unscorable = sum(r.metrics.unscorable for r in reports)
    if unscorable:
        text += f"{unscorable} sequence(s) shorter than one window were excluded from the rates\n"
    return text


def summary_record(report: EvalReport) -> dict[str, Any]:
    m = report.metrics
    record: dict[str, Any] = {
        "record": "summary",
        "model": report.model_kind,
        "dataset": report.dataset,
        "window_size": report.window_size,
        "stride": report.stride,
        "feature_mode": report.feature_mode,
        "aggregation": report.aggregation,
        "seed": report.seed,
        "fpr_tolerance": report.fpr_tolerance,
        "threshold": report.threshold,
        **m.as_dict(),
        "threshold_fold_min": report.stability.low if report.stability else None,
        "threshold_fold_max": report.stability.high if report.stability else None,
        "published": [
            {"dataset": r.dataset, "source": r.source, "accuracy": r.accuracy, "precision": r.precision, "recall": r.recall}
            for r in report.references
        ],
    }
    return record


def verdict_record(verdict: Verdict, report: Optional[EvalReport] = None) -> dict[str, Any]:
    record: dict[str, Any] = {"record": "verdict"}
    if report is not None:
        record.update(model=report.model_kind, dataset=report.dataset, window_size=report.window_size, seed=report.seed)
    record.update(verdict.to_record())
    return record


def seed_summary_record(summary: SeedSummary) -> dict[str, Any]:
    first = summary.reports[0]
    record: dict[str, Any] = {
        "record": "seed_summary",
        "model": first.model_kind,
        "dataset": first.dataset,
        "window_size": first.window_size,
        "seeds": summary.seeds,
    }
    for name in ("accuracy", "precision", "recall"):
        record[f"{name}_mean"] = summary.mean(name)
        record[f"{name}_spread"] = summary.spread(name)
    return record


def report_records(report: EvalReport, include_verdicts: bool = True) -> list[dict[str, Any]]:
    records = [summary_record(report)]
    if include_verdicts:
        records.extend(verdict_record(v, report) for v in report.verdicts)
    return records


def dumps_jsonl(records: Iterable[dict[str, Any]]) -> bytes:
    return b"".join(orjson.dumps(r) + b"\n" for r in records)


def write_jsonl(records: Iterable[dict[str, Any]], path: str | os.PathLike[str]) -> None:
    data = dumps_jsonl(records)
    with atomic_writer(path) as fh:
        fh.write(data)
