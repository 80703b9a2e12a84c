"""
Unit tests for common.config, common.errors and common.io

Tests environment-driven settings, structured errors and atomic writes.
"""

import logging

import numpy as np
import orjson
import pytest

from gfd.common.config import Settings
from gfd.common.errors import BundleError, FaultDetectionError, ParseError, StageError, ValidationError
from gfd.common.ids import array_digest, stable_sha256
from gfd.common.io import atomic_writer
from gfd.common.logging import get_logger, log_event


class TestSettings:
    """Test settings loading"""

    def test_defaults(self, monkeypatch):
        for name in ("GFD_LOG_LEVEL", "GFD_SEED", "GFD_OUTPUT_DIR"):
            monkeypatch.delenv(name, raising=False)
        s = Settings(_env_file=None)
        assert s.log_level == "INFO"
        assert s.default_seed == 0

    def test_environment_overrides(self, monkeypatch):
        monkeypatch.setenv("GFD_SEED", "7")
        monkeypatch.setenv("GFD_LOG_LEVEL", "DEBUG")
        s = Settings(_env_file=None)
        assert s.default_seed == 7
        assert s.log_level == "DEBUG"


class TestErrors:
    """Test structured exceptions"""

    def test_to_dict_carries_context(self):
        err = ValidationError("bad window", field="window_size", value=1)
        payload = err.to_dict()["error"]
        assert payload["type"] == "ValidationError"
        assert payload["context"] == {"field": "window_size", "value": "1"}
        assert "timestamp" in payload

    def test_long_values_are_truncated(self):
        err = ValidationError("too long", field="x", value="y" * 500)
        assert len(err.context["value"]) == 100

    def test_parse_error_prefixes_line(self):
        err = ParseError("expected 5 fields, got 4", line=12)
        assert str(err) == "line 12: expected 5 fields, got 4"
        assert err.line == 12

    def test_stage_error_names_stage(self):
        err = StageError("train", ValueError("no windows"))
        assert err.stage == "train"
        assert str(err) == "[train] no windows"
        assert isinstance(err, FaultDetectionError)

    def test_bundle_error_path(self):
        assert BundleError("truncated", path="/tmp/x.gfd").context == {"path": "/tmp/x.gfd"}


class TestIds:
    """Test digests"""

    def test_stable_sha256_separates_parts(self):
        assert stable_sha256("ab", "c") != stable_sha256("a", "bc")

    def test_array_digest_depends_on_shape(self):
        a = np.arange(6.0)
        assert array_digest(a) == array_digest(a.copy())
        assert array_digest(a) != array_digest(a.reshape(2, 3))


class TestAtomicWriter:
    """Test write-to-temp, rename-on-success"""

    def test_success_replaces_target(self, tmp_path):
        target = tmp_path / "out.bin"
        target.write_bytes(b"old")
        with atomic_writer(target) as fh:
            fh.write(b"new")
        assert target.read_bytes() == b"new"
        assert list(tmp_path.iterdir()) == [target]

    def test_failure_leaves_target_untouched(self, tmp_path):
        target = tmp_path / "out.bin"
        target.write_bytes(b"old")
        with pytest.raises(RuntimeError):
            with atomic_writer(target) as fh:
                fh.write(b"partial")
                raise RuntimeError("boom")
        assert target.read_bytes() == b"old"
        assert list(tmp_path.iterdir()) == [target]


class TestLogging:
    """Test structured event records"""

    def test_log_event_emits_json(self, caplog):
        logger = get_logger("gfd.test")
        logger.propagate = True
        with caplog.at_level(logging.INFO, logger="gfd.test"):
            log_event(logger, "epoch", loss=np.float64(0.5), epoch=3)
        record = orjson.loads(caplog.records[-1].getMessage())
        assert record == {"event": "epoch", "loss": 0.5, "epoch": 3}
