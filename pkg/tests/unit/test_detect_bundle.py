"""
Unit tests for detect.bundle

Tests the self-contained model bundle: stable byte layout, integrity checks
and identical verdicts after a reload.
"""

import struct

import numpy as np
import pytest

from gfd.common.errors import BundleError
from gfd.detect.bundle import FORMAT_VERSION, MAGIC, Bundle, load_bundle, read_bundle, save_bundle, write_bundle
from gfd.detect.judge import judge
from gfd.models import default_config


class TestRoundTrip:
    """Test save and load"""

    @pytest.mark.parametrize("kind", ["hmm", "vae", "gan"])
    def test_bytes_are_stable(self, kind, trained_bundle):
        data = save_bundle(trained_bundle(kind))
        assert data[:8] == MAGIC
        assert save_bundle(load_bundle(data)) == data

    @pytest.mark.parametrize("kind", ["hmm", "vae", "gan"])
    def test_reload_gives_identical_verdicts(self, kind, trained_bundle, small_dataset):
        bundle = trained_bundle(kind)
        reloaded = load_bundle(save_bundle(bundle))
        assert reloaded.kind == kind
        assert reloaded.threshold == bundle.threshold
        assert reloaded.config == bundle.config
        assert judge(reloaded, small_dataset) == judge(bundle, small_dataset)

    def test_gan_inversion_settings_survive(self, trained_bundle, small_dataset):
        bundle = trained_bundle("gan", score="inversion", inversion_steps=3)
        reloaded = load_bundle(save_bundle(bundle))
        assert reloaded.config.score == "inversion"
        assert judge(reloaded, small_dataset) == judge(bundle, small_dataset)

    def test_uncalibrated_bundle(self, trained_bundle):
        bundle = trained_bundle("hmm")
        bare = Bundle(bundle.kind, bundle.pipeline, bundle.model, bundle.config, bundle.aggregation)
        assert load_bundle(save_bundle(bare)).threshold is None

    def test_file_round_trip(self, trained_bundle, tmp_path):
        bundle = trained_bundle("vae")
        path = tmp_path / "model.gfd"
        write_bundle(bundle, path)
        assert path.read_bytes() == save_bundle(bundle)
        np.testing.assert_array_equal(read_bundle(path).pipeline.minmax.hi, bundle.pipeline.minmax.hi)


class TestIntegrity:
    """Test rejection of damaged bundles"""

    @pytest.fixture
    def data(self, trained_bundle):
        return save_bundle(trained_bundle("hmm"))

    @pytest.mark.parametrize("keep", [0, 10, 40, -1, -33])
    def test_truncated(self, data, keep):
        with pytest.raises(BundleError):
            load_bundle(data[:keep])

    def test_flipped_byte(self, data):
        damaged = bytearray(data)
        damaged[len(data) // 2] ^= 0xFF
        with pytest.raises(BundleError, match="checksum"):
            load_bundle(bytes(damaged))

    def test_bad_magic(self, data):
        with pytest.raises(BundleError, match="magic"):
            load_bundle(b"NOTABNDL" + data[8:])

    def test_unknown_version(self, data):
        bumped = data[:8] + struct.pack("<I", FORMAT_VERSION + 1) + data[12:]
        with pytest.raises(BundleError, match="version"):
            load_bundle(bumped)

    def test_missing_file(self, tmp_path):
        with pytest.raises(BundleError) as info:
            read_bundle(tmp_path / "absent.gfd")
        assert info.value.context["path"].endswith("absent.gfd")


class TestBundleValidation:
    """Test bundle construction checks"""

    def test_rejects_mismatched_config(self, trained_bundle):
        bundle = trained_bundle("hmm")
        with pytest.raises(BundleError):
            Bundle("hmm", bundle.pipeline, bundle.model, default_config("vae"), "mean")

    def test_rejects_unknown_kind_and_aggregation(self, trained_bundle):
        bundle = trained_bundle("hmm")
        with pytest.raises(BundleError):
            Bundle("svm", bundle.pipeline, bundle.model, bundle.config, "mean")
        with pytest.raises(BundleError):
            Bundle("hmm", bundle.pipeline, bundle.model, bundle.config, "median")
