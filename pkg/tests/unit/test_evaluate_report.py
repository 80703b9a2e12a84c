"""
Unit tests for evaluate.report

Tests the comparison table, published figures and JSON Lines record layout.
"""

import orjson
import pytest

from gfd.capture.types import ANOMALOUS, NORMAL
from gfd.detect.judge import Verdict
from gfd.detect.threshold import ThresholdStability
from gfd.evaluate.metrics import ConfusionMatrix, from_confusion
from gfd.evaluate.report import (
    EvalReport,
    SeedSummary,
    dumps_jsonl,
    reference_figures,
    render_table,
    report_records,
    seed_summary_record,
    write_jsonl,
)

SUMMARY_FIELDS = [
    "record",
    "model",
    "dataset",
    "window_size",
    "stride",
    "feature_mode",
    "aggregation",
    "seed",
    "fpr_tolerance",
    "threshold",
    "tp",
    "fp",
    "tn",
    "fn",
    "accuracy",
    "precision",
    "recall",
    "precision_undefined",
    "recall_undefined",
    "unscorable",
    "threshold_fold_min",
    "threshold_fold_max",
    "published",
]


def _report(model="hmm", dataset="airbus", seed=0, cm=ConfusionMatrix(tp=2, fp=1, tn=6, fn=1), unscorable=0):
    verdicts = [Verdict("a", 2.0, True, ANOMALOUS, 3), Verdict("b", 0.1, False, NORMAL, 3)]
    return EvalReport(
        model_kind=model,
        dataset=dataset,
        window_size=2048,
        stride=2048,
        feature_mode="stats",
        aggregation="mean",
        seed=seed,
        fpr_tolerance=0.05,
        threshold=1.25,
        metrics=from_confusion(cm, unscorable),
        verdicts=verdicts,
        stability=ThresholdStability((1.0, 1.5), 1.0, 1.5),
    )


class TestReferenceFigures:
    """Test published figures"""

    def test_hmm_airbus_carries_both_accuracies(self):
        accuracies = sorted(r.accuracy for r in reference_figures("hmm", "airbus"))
        assert accuracies == [0.91, 0.97]

    def test_unknown_combination(self):
        assert reference_figures("vae", "elsewhere") == ()


class TestTable:
    """Test the text table"""

    def test_shows_measured_and_published(self):
        text = render_table([_report()])
        assert "80.0%" in text
        assert "97.0%" in text and "91.0%" in text
        assert "undefined" not in text

    def test_footnotes(self):
        text = render_table([_report(cm=ConfusionMatrix(tn=5, fn=2), unscorable=3)])
        assert "undefined" in text
        assert "3 sequence(s)" in text

    def test_seed_summary_row(self):
        summary = SeedSummary((_report(seed=1), _report(seed=2, cm=ConfusionMatrix(tp=3, tn=7))))
        assert summary.seeds == [1, 2]
        assert summary.mean("accuracy") == pytest.approx(0.9)
        assert summary.spread("accuracy") == pytest.approx(0.2)
        assert "mean 1,2" in render_table([], [summary])


class TestRecords:
    """Test JSON Lines output"""

    def test_summary_field_order(self):
        line = dumps_jsonl(report_records(_report())).splitlines()[0]
        record = orjson.loads(line)
        assert list(record) == SUMMARY_FIELDS
        assert record["threshold_fold_min"] == 1.0
        assert [p["source"] for p in record["published"]] == ["results table", "summary text"]

    def test_verdict_records_follow_summary(self):
        lines = dumps_jsonl(report_records(_report())).splitlines()
        assert len(lines) == 3
        verdict = orjson.loads(lines[1])
        assert verdict["record"] == "verdict"
        assert verdict["sequence_id"] == "a"
        assert verdict["model"] == "hmm"
        assert len(report_records(_report(), include_verdicts=False)) == 1

    def test_seed_summary_record(self):
        record = seed_summary_record(SeedSummary((_report(seed=0), _report(seed=5))))
        assert record["record"] == "seed_summary"
        assert record["seeds"] == [0, 5]
        assert record["recall_spread"] == 0.0

    def test_write(self, tmp_path):
        path = tmp_path / "out" / "report.jsonl"
        write_jsonl(report_records(_report()), path)
        assert path.read_bytes() == dumps_jsonl(report_records(_report()))
