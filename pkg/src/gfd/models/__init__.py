"""Model kinds and their per-kind defaults."""

from __future__ import annotations

from typing import Literal, Union

from gfd.models.gan import GanModel, GanTrainConfig
from gfd.models.hmm import HmmParams, HmmTrainConfig
from gfd.models.vae import VaeModel, VaeTrainConfig

ModelKind = Literal["hmm", "vae", "gan"]
MODEL_KINDS: tuple[str, ...] = ("hmm", "vae", "gan")

TrainConfig = Union[HmmTrainConfig, VaeTrainConfig, GanTrainConfig]
Model = Union[HmmParams, VaeModel, GanModel]

CONFIG_TYPES: dict[str, type[TrainConfig]] = {
    "hmm": HmmTrainConfig,
    "vae": VaeTrainConfig,
    "gan": GanTrainConfig,
}

# the HMM models window statistics; the networks see flattened windows
DEFAULT_FEATURE_MODE: dict[str, str] = {"hmm": "stats", "vae": "raw", "gan": "raw"}
DEFAULT_AGGREGATION: dict[str, str] = {"raw": "max", "stats": "mean"}


def default_config(kind: str, **overrides) -> TrainConfig:
    return CONFIG_TYPES[kind](**overrides)
