"""Self-describing binary model bundle.

Layout (little-endian)::

    magic    8 bytes   b"GFDBNDL\\x00"
    version  u32
    hlen     u64       length of the JSON header
    header   hlen      orjson: kind, pipeline, model, config, threshold, arrays
    payload            concatenated row-major <f8 arrays, offsets in the header
    digest   32 bytes  SHA-256 of everything before it

See docs/BUNDLE_FORMAT.md.
"""

from __future__ import annotations

import hashlib
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np
import orjson

from gfd.common.errors import BundleError, FaultDetectionError
from gfd.common.io import atomic_writer
from gfd.common.logging import get_logger, log_event
from gfd.detect.threshold import AGGREGATIONS, Threshold
from gfd.engine.layers import DenseLayer, DenseNet
from gfd.models import CONFIG_TYPES, MODEL_KINDS, Model, TrainConfig
from gfd.models.gan import GanModel
from gfd.models.hmm import HmmParams
from gfd.models.vae import VaeModel
from gfd.preprocess.pipeline import Pipeline
from gfd.preprocess.scaling import MinMaxParams, ScalerParams

logger = get_logger(__name__)

MAGIC = b"GFDBNDL\x00"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<8sIQ")
_DIGEST_SIZE = 32


@dataclass(eq=False)
class Bundle:
    kind: str
    pipeline: Pipeline
    model: Model
    config: TrainConfig
    aggregation: str
    threshold: Optional[Threshold] = None

    def __post_init__(self) -> None:
        if self.kind not in MODEL_KINDS:
            raise BundleError(f"unknown model kind {self.kind!r}")
        if self.aggregation not in AGGREGATIONS:
            raise BundleError(f"unknown aggregation {self.aggregation!r}")
        if not isinstance(self.config, CONFIG_TYPES[self.kind]):
            raise BundleError(f"{type(self.config).__name__} does not configure a {self.kind} model")

    def with_threshold(self, threshold: Threshold) -> "Bundle":
        return Bundle(self.kind, self.pipeline, self.model, self.config, self.aggregation, threshold)


class _ArrayWriter:
    def __init__(self) -> None:
        self.manifest: list[dict[str, Any]] = []
        self.chunks: list[bytes] = []
        self.offset = 0

    def add(self, name: str, array: np.ndarray) -> None:
        data = np.ascontiguousarray(array, dtype="<f8")
        raw = data.tobytes()
        self.manifest.append({"name": name, "shape": list(data.shape), "offset": self.offset})
        self.chunks.append(raw)
        self.offset += len(raw)


def _net_meta(prefix: str, net: DenseNet, arrays: _ArrayWriter) -> list[dict[str, Any]]:
    meta = []
    for k, layer in enumerate(net.layers):
        arrays.add(f"{prefix}.{k}.weights", layer.weights)
        arrays.add(f"{prefix}.{k}.biases", layer.biases)
        meta.append(
            {"activation": layer.activation, "alpha": layer.alpha, "l2_lambda": layer.l2_lambda, "dropout": layer.dropout}
        )
    return meta


def _model_meta(bundle: Bundle, arrays: _ArrayWriter) -> dict[str, Any]:
    model = bundle.model
    if isinstance(model, HmmParams):
        for name in ("pi", "A", "means", "variances"):
            arrays.add(f"hmm.{name}", getattr(model, name))
        return {"n_states": model.n_states}
    if isinstance(model, VaeModel):
        return {
            "latent_dim": model.latent_dim,
            "input_dim": model.input_dim,
            "l2_lambda": model.l2_lambda,
            "kl_weight": model.kl_weight,
            "encoder": _net_meta("encoder", model.encoder, arrays),
            "decoder": _net_meta("decoder", model.decoder, arrays),
        }
    return {
        "noise_dim": model.noise_dim,
        "dropout_rate": model.dropout_rate,
        "generator": _net_meta("generator", model.generator, arrays),
        "discriminator": _net_meta("discriminator", model.discriminator, arrays),
    }


def save_bundle(bundle: Bundle) -> bytes:
    arrays = _ArrayWriter()
    pipe = bundle.pipeline
    if pipe.scaler is not None:
        arrays.add("pipeline.scaler.means", pipe.scaler.means)
        arrays.add("pipeline.scaler.stds", pipe.scaler.stds)
    minmax = None
    if pipe.minmax is not None:
        arrays.add("pipeline.minmax.lo", pipe.minmax.lo)
        arrays.add("pipeline.minmax.hi", pipe.minmax.hi)
        minmax = {"low": pipe.minmax.low, "high": pipe.minmax.high}

    model_meta = _model_meta(bundle, arrays)
    threshold = None
    if bundle.threshold is not None:
        t = bundle.threshold
        threshold = {
            "value": t.value,
            "fpr_tolerance": t.fpr_tolerance,
            "calibration_size": t.calibration_size,
            "method": t.method,
        }
    header = {
        "kind": bundle.kind,
        "aggregation": bundle.aggregation,
        "pipeline": {
            "window_size": pipe.window_size,
            "stride": pipe.stride,
            "feature_mode": pipe.feature_mode,
            "minmax": minmax,
        },
        "model": model_meta,
        "config": bundle.config.model_dump(mode="json"),
        "seeds": {"model": bundle.config.seed},
        "threshold": threshold,
        "arrays": arrays.manifest,
    }
    header_bytes = orjson.dumps(header)
    body = _PREFIX.pack(MAGIC, FORMAT_VERSION, len(header_bytes)) + header_bytes + b"".join(arrays.chunks)
    return body + hashlib.sha256(body).digest()


class _ArrayReader:
    def __init__(self, manifest: list[dict[str, Any]], payload: bytes):
        self.payload = payload
        self.entries = {entry["name"]: entry for entry in manifest}

    def get(self, name: str) -> np.ndarray:
        entry = self.entries.get(name)
        if entry is None:
            raise BundleError(f"bundle is missing array {name!r}")
        shape = tuple(int(d) for d in entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = int(entry["offset"])
        end = start + 8 * count
        if start < 0 or end > len(self.payload):
            raise BundleError(f"array {name!r} runs past the payload")
        return np.frombuffer(self.payload, dtype="<f8", count=count, offset=start).astype(np.float64).reshape(shape)

    def net(self, prefix: str, meta: list[dict[str, Any]]) -> DenseNet:
        return DenseNet(
            [
                DenseLayer(
                    self.get(f"{prefix}.{k}.weights"),
                    self.get(f"{prefix}.{k}.biases"),
                    m["activation"],
                    m["alpha"],
                    m["l2_lambda"],
                    m["dropout"],
                )
                for k, m in enumerate(meta)
            ]
        )


def _split(data: bytes) -> tuple[dict[str, Any], bytes]:
    if len(data) < _PREFIX.size + _DIGEST_SIZE:
        raise BundleError("bundle is truncated")
    magic, version, header_len = _PREFIX.unpack_from(data)
    if magic != MAGIC:
        raise BundleError("not a model bundle (bad magic)")
    if version != FORMAT_VERSION:
        raise BundleError(f"unsupported bundle version {version}; expected {FORMAT_VERSION}")
    body, digest = data[:-_DIGEST_SIZE], data[-_DIGEST_SIZE:]
    if _PREFIX.size + header_len > len(body):
        raise BundleError("bundle is truncated")
    if hashlib.sha256(body).digest() != digest:
        raise BundleError("bundle checksum mismatch (truncated or corrupted)")
    try:
        header = orjson.loads(body[_PREFIX.size : _PREFIX.size + header_len])
    except orjson.JSONDecodeError as e:
        raise BundleError(f"bundle header is not valid JSON: {e}") from e
    return header, body[_PREFIX.size + header_len :]


def load_bundle(data: bytes) -> Bundle:
    header, payload = _split(bytes(data))
    try:
        kind = header["kind"]
        if kind not in MODEL_KINDS:
            raise BundleError(f"unknown model kind {kind!r}")
        arrays = _ArrayReader(header["arrays"], payload)
        p = header["pipeline"]
        scaler = None
        if "pipeline.scaler.means" in arrays.entries:
            scaler = ScalerParams(arrays.get("pipeline.scaler.means"), arrays.get("pipeline.scaler.stds"))
        minmax = None
        if p["minmax"] is not None:
            minmax = MinMaxParams(
                arrays.get("pipeline.minmax.lo"), arrays.get("pipeline.minmax.hi"), p["minmax"]["low"], p["minmax"]["high"]
            )
        pipeline = Pipeline(p["window_size"], p["stride"], p["feature_mode"], scaler, minmax)

        m = header["model"]
        model: Model
        if kind == "hmm":
            model = HmmParams(*(arrays.get(f"hmm.{name}") for name in ("pi", "A", "means", "variances")))
        elif kind == "vae":
            model = VaeModel(
                arrays.net("encoder", m["encoder"]),
                arrays.net("decoder", m["decoder"]),
                m["latent_dim"],
                m["input_dim"],
                m["l2_lambda"],
                m["kl_weight"],
            )
        else:
            model = GanModel(
                arrays.net("generator", m["generator"]),
                arrays.net("discriminator", m["discriminator"]),
                m["noise_dim"],
                m["dropout_rate"],
            )
        config = CONFIG_TYPES[kind].model_validate(header["config"])
        threshold = Threshold(**header["threshold"]) if header["threshold"] is not None else None
        return Bundle(kind, pipeline, model, config, header["aggregation"], threshold)
    except BundleError:
        raise
    except (KeyError, TypeError, ValueError, FaultDetectionError) as e:
        raise BundleError(f"bundle header is inconsistent: {e}") from e


def write_bundle(bundle: Bundle, path: str | os.PathLike[str]) -> None:
    data = save_bundle(bundle)
    with atomic_writer(path) as fh:
        fh.write(data)
    log_event(logger, "bundle_written", path=str(path), kind=bundle.kind, bytes=len(data))


def read_bundle(path: str | os.PathLike[str]) -> Bundle:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise BundleError(f"cannot read bundle: {e}", path=str(path)) from e
    try:
        return load_bundle(data)
    except BundleError as e:
        raise BundleError(e.message, path=str(path)) from e
