"""
Unit tests for evaluate.metrics

Tests confusion counting with anomalous as the positive class, derived rates
and their undefined cases.
"""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gfd.capture.types import ANOMALOUS, NORMAL
from gfd.common.errors import ValidationError
from gfd.detect.judge import Verdict
from gfd.evaluate.metrics import ConfusionMatrix, confusion, from_confusion, metrics


def _verdicts(pairs):
    """(flagged, label) pairs to scored verdicts."""
    return [Verdict(f"s{i}", 1.0 if flagged else 0.0, flagged, label, 1) for i, (flagged, label) in enumerate(pairs)]


class TestMetrics:
    """Test rate computation"""

    def test_worked_example(self):
        pairs = [(True, ANOMALOUS)] * 2 + [(True, NORMAL)] + [(False, ANOMALOUS)] + [(False, NORMAL)] * 6
        result = metrics(_verdicts(pairs))
        assert result.confusion == ConfusionMatrix(tp=2, fp=1, tn=6, fn=1)
        assert result.accuracy == pytest.approx(0.8)
        assert result.precision == pytest.approx(2 / 3)
        assert result.recall == pytest.approx(2 / 3)
        assert not result.precision_undefined and not result.recall_undefined

    def test_nothing_flagged(self):
        result = metrics(_verdicts([(False, ANOMALOUS), (False, NORMAL)]))
        assert result.precision == 0.0 and result.precision_undefined
        assert result.recall == 0.0 and not result.recall_undefined

    def test_no_anomalies(self):
        result = metrics(_verdicts([(False, NORMAL), (True, NORMAL)]))
        assert result.recall_undefined
        assert result.accuracy == 0.5

    def test_empty(self):
        result = from_confusion(ConfusionMatrix())
        assert result.accuracy == 0.0
        assert result.precision_undefined and result.recall_undefined

    def test_unscorable_left_out(self):
        verdicts = _verdicts([(True, ANOMALOUS)]) + [Verdict("short", None, False, ANOMALOUS)]
        result = metrics(verdicts)
        assert result.confusion.total == 1
        assert result.unscorable == 1
        assert result.as_dict()["unscorable"] == 1

    def test_missing_label(self):
        with pytest.raises(ValidationError):
            confusion([Verdict("x", 0.5, True)])

    def test_negative_counts(self):
        with pytest.raises(ValidationError):
            ConfusionMatrix(tp=-1)

    @given(st.lists(st.tuples(st.booleans(), st.sampled_from([NORMAL, ANOMALOUS])), max_size=50))
    def test_counts_match_a_recount(self, pairs):
        cm, unscorable = confusion(_verdicts(pairs))
        assert unscorable == 0
        assert cm.tp == sum(f and l == ANOMALOUS for f, l in pairs)
        assert cm.fp == sum(f and l == NORMAL for f, l in pairs)
        assert cm.fn == sum(not f and l == ANOMALOUS for f, l in pairs)
        assert cm.tn == sum(not f and l == NORMAL for f, l in pairs)
        assert cm.total == len(pairs)
        result = from_confusion(cm)
        assert 0.0 <= result.accuracy <= 1.0
        assert result.as_dict()["tp"] == cm.tp
