"""
Unit tests for preprocess.features, preprocess.scaling and preprocess.pipeline

Tests window statistics against a brute-force oracle, standardization and
the recorded pipeline.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gfd.capture.types import RawSequence
from gfd.common.errors import ValidationError
from gfd.preprocess.features import extract_features, feature_matrix
from gfd.preprocess.pipeline import Pipeline, fit_pipeline
from gfd.preprocess.scaling import fit_minmax, fit_scaler, transform
from gfd.preprocess.windows import Window


def _oracle(values):
    n = len(values)
    mean = sum(values) / n
    ordered = sorted(values)
    median = ordered[n // 2] if n % 2 else (ordered[n // 2 - 1] + ordered[n // 2]) / 2
    m2 = sum((v - mean) ** 2 for v in values) / n
    m3 = sum((v - mean) ** 3 for v in values) / n
    m4 = sum((v - mean) ** 4 for v in values) / n
    if m2 == 0:
        return mean, median, 0.0, 0.0
    return mean, median, m3 / m2**1.5, m4 / m2**2


class TestFeatures:
    """Test mean/median/skewness/kurtosis"""

    def test_matches_brute_force(self):
        rng = np.random.default_rng(0)
        for n in (2, 3, 7, 64):
            rows = rng.standard_normal((5, n)) * 3 + 1
            got = feature_matrix(rows)
            for row, feats in zip(rows, got):
                np.testing.assert_allclose(feats, _oracle(list(row)), rtol=1e-12, atol=1e-12)

    def test_known_values(self):
        f = extract_features(Window("s", 0, np.array([1.0, 2.0, 3.0, 10.0])))
        assert f.mean == 4.0
        assert f.median == 2.5
        assert f.skewness > 0
        assert f.kurtosis == pytest.approx(_oracle([1.0, 2.0, 3.0, 10.0])[3], rel=1e-12)

    def test_constant_window(self):
        f = extract_features(Window("s", 0, np.full(8, 3.0)))
        assert (f.mean, f.median, f.skewness, f.kurtosis) == (3.0, 3.0, 0.0, 0.0)

    def test_near_constant_window_keeps_its_shape(self):
        values = np.full(64, 1e6)
        values[-1] = 1e6 + 1e-9
        got = feature_matrix(values[None, :])[0]
        expected = _oracle(list(values))
        assert expected[2] != 0.0 and expected[3] != 0.0
        np.testing.assert_allclose(got, expected, rtol=1e-6)

    def test_tiny_spread_is_not_zeroed(self):
        f = extract_features(Window("s", 0, np.array([0.0, 0.0, 0.0, 1e-150])))
        assert f.skewness == pytest.approx(_oracle([0.0, 0.0, 0.0, 1.0])[2], rel=1e-12)
        assert f.kurtosis == pytest.approx(_oracle([0.0, 0.0, 0.0, 1.0])[3], rel=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, st.integers(2, 40), elements=st.floats(-1e3, 1e3)))
    def test_always_finite(self, values):
        assert np.all(np.isfinite(feature_matrix(values[None, :])))


class TestScaling:
    """Test standardization and min-max mapping"""

    def test_standardization_identity(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((50, 4)) * [1, 2, 3, 4] + [5, 6, 7, 8]
        z = transform(fit_scaler(x), x)
        np.testing.assert_allclose(z.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(z.std(axis=0), 1.0, rtol=1e-12)

    def test_zero_deviation_column_maps_to_zero(self):
        x = np.array([[1.0, 2.0], [1.0, 4.0]])
        z = fit_scaler(x).apply(x)
        np.testing.assert_array_equal(z[:, 0], [0.0, 0.0])

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            fit_scaler(np.ones((3, 4))).apply(np.ones((3, 2)))

    def test_minmax_range(self):
        x = np.array([[-2.0, 0.0], [2.0, 10.0]])
        np.testing.assert_allclose(fit_minmax(x, per_column=True).apply(x), [[0, 0], [1, 1]])
        np.testing.assert_allclose(fit_minmax(x, per_column=False, feature_range=(-1, 1)).apply(x), [[-1, -2 / 3], [-1 / 3, 1]])


class TestPipeline:
    """Test the recorded preprocessing chain"""

    def test_stats_pipeline_shapes(self, small_dataset):
        pipe = fit_pipeline(small_dataset.normal(), 64, 32, "stats")
        x = pipe.encode(small_dataset["n0"])
        assert x.shape == (7, 4)
        assert pipe.minmax is None

    def test_raw_pipeline_in_unit_range_on_training_data(self, small_dataset):
        pipe = fit_pipeline(small_dataset.normal(), 32, 32, "raw", output_range=(0.0, 1.0))
        for seq in small_dataset.normal():
            x = pipe.encode(seq)
            assert x.shape == (8, 32)
            assert x.min() >= 0.0 and x.max() <= 1.0

    def test_short_sequence_encodes_to_zero_rows(self, small_dataset):
        pipe = fit_pipeline(small_dataset.normal(), 64, 64, "stats")
        assert pipe.encode(RawSequence("tiny", np.ones(10))).shape == (0, 4)

    def test_stats_requires_scaler(self):
        with pytest.raises(ValidationError):
            Pipeline(64, 64, "stats")

    def test_no_window_fits(self, small_dataset):
        with pytest.raises(ValidationError):
            fit_pipeline(small_dataset.normal(), 1024, 1024, "raw")
