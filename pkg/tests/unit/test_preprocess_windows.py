"""
Unit tests for preprocess.windows

Tests padding, window geometry and the normal-only split.
"""

import numpy as np
import pytest

from gfd.capture.types import ANOMALOUS, Dataset, RawSequence
from gfd.common.errors import ValidationError
from gfd.preprocess.windows import pad_to_max, split, window, window_count, window_matrix


class TestWindowing:
    """Test fixed-size windowing"""

    def test_window_count_matches_enumeration(self):
        for n in range(1, 33):
            for w in range(2, n + 2):
                for s in range(1, n + 2):
                    starts = [i for i in range(0, n, s) if i + w <= n]
                    assert window_count(n, w, s) == len(starts), (n, w, s)
                    rows = window_matrix(np.arange(float(n)), w, s)
                    assert rows.shape == (len(starts), w)
                    for row, start in zip(rows, starts):
                        np.testing.assert_array_equal(row, np.arange(start, start + w))

    def test_window_records_parent_and_offset(self):
        seq = RawSequence("s", np.arange(10.0))
        wins = window(seq, 4, 3)
        assert [w.start_index for w in wins] == [0, 3, 6]
        assert all(w.parent_id == "s" and len(w) == 4 for w in wins)

    def test_short_sequence_yields_nothing(self):
        assert window(RawSequence("s", np.arange(3.0)), 4, 1) == []

    @pytest.mark.parametrize("w,s", [(1, 1), (4, 0)])
    def test_invalid_geometry(self, w, s):
        with pytest.raises(ValidationError):
            window_matrix(np.arange(10.0), w, s)


class TestPadding:
    """Test pre-padding to the longest sequence"""

    def test_pad_shifts_onset(self):
        ds = Dataset((RawSequence("long", np.ones(6)), RawSequence("short", [5.0, 6.0, 7.0], ANOMALOUS, 1)))
        padded = pad_to_max(ds)
        np.testing.assert_array_equal(padded["short"].samples, [0, 0, 0, 5, 6, 7])
        assert padded["short"].anomaly_at_ms == 4
        assert padded["long"] == ds["long"]


class TestSplit:
    """Test the seeded normal-only split"""

    def test_anomalies_never_train(self, small_dataset):
        result = split(small_dataset, 0.75, seed=1)
        assert len(result.train) == 6
        assert all(s.label == 0 for s in result.train)
        assert {s.id for s in result.test} == set(small_dataset.ids) - {s.id for s in result.train}
        assert len(result.test.anomalous()) == 4

    def test_seeded(self, small_dataset):
        assert split(small_dataset, 0.5, 3).train.ids == split(small_dataset, 0.5, 3).train.ids

    def test_invalid_ratio(self, small_dataset):
        with pytest.raises(ValidationError):
            split(small_dataset, 1.0, 0)

    def test_no_normals(self):
        ds = Dataset((RawSequence("a", [1.0, 2.0], ANOMALOUS, 0),))
        with pytest.raises(ValidationError, match="no normal sequences"):
            split(ds, 0.8, 0)
