"""Seeded stand-in for a stapler-style dataset: sinusoids plus noise, with one
change-point anomaly injected into each anomalous sequence."""

from __future__ import annotations

from typing import Literal

import numpy as np
from pydantic import BaseModel, Field, model_validator

from gfd.capture.types import ANOMALOUS, NORMAL, Dataset, RawSequence
from gfd.common.errors import ValidationError
from gfd.common.ids import array_digest
from gfd.common.logging import get_logger, log_event
from gfd.engine.rng import RngStream

logger = get_logger(__name__)

AnomalyKind = Literal["step_shift", "amplitude_burst", "frequency_shift"]


class SynthConfig(BaseModel):
    n_normal: int = Field(default=200, ge=0)
    n_anomalous: int = Field(default=60, ge=0)
    min_length: int = Field(default=4096, ge=2)
    max_length: int = Field(default=16384, ge=2)
    sample_rate_hz: float = Field(default=1000.0, gt=0.0)
    amplitudes: tuple[float, ...] = (2.0, 1.0)
    frequencies_hz: tuple[float, ...] = (5.0, 50.0)
    noise_sigma: float = Field(default=1.0, gt=0.0)
    kinds: tuple[AnomalyKind, ...] = ("step_shift", "amplitude_burst")  # frequency_shift is opt-in
    magnitude_range: tuple[float, float] = (3.0, 8.0)  # in units of noise_sigma
    burst_length_range: tuple[int, int] = (256, 2048)
    frequency_factor_range: tuple[float, float] = (1.5, 3.0)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check(self) -> "SynthConfig":
        if self.min_length > self.max_length:
            raise ValueError("min_length must not exceed max_length")
        if len(self.amplitudes) != len(self.frequencies_hz):
            raise ValueError("amplitudes and frequencies_hz must pair up")
        if self.n_normal + self.n_anomalous == 0:
            raise ValueError("at least one sequence is required")
        if self.n_anomalous and not self.kinds:
            raise ValueError("anomalous sequences need at least one anomaly kind")
        lo, hi = self.magnitude_range
        if not 0.0 < lo <= hi:
            raise ValueError("magnitudes must be positive with low <= high")
        blo, bhi = self.burst_length_range
        if not 1 <= blo <= bhi:
            raise ValueError("burst lengths must be >= 1 with low <= high")
        flo, fhi = self.frequency_factor_range
        if not 0.0 < flo <= fhi:
            raise ValueError("frequency factors must be positive with low <= high")
        return self

    def check_window(self, window_size: int) -> None:
        if self.min_length < window_size:
            raise ValidationError(
                f"min_length {self.min_length} is shorter than window_size {window_size}",
                field="min_length",
                value=self.min_length,
            )


def _draw(rng: RngStream, bounds: tuple[float, float]) -> float:
    lo, hi = bounds
    return float(lo) if lo == hi else float(rng.uniform(lo, hi))


def _base_signal(config: SynthConfig, t: np.ndarray, phases: np.ndarray, factor: float = 1.0) -> np.ndarray:
    out = np.zeros(t.size)
    for amp, freq, phase in zip(config.amplitudes, config.frequencies_hz, phases):
        out += amp * np.sin(2.0 * np.pi * freq * factor * t / config.sample_rate_hz + phase)
    return out


def inject_step_shift(samples: np.ndarray, at: int, level: float) -> np.ndarray:
    out = samples.copy()
    out[at:] += level
    return out


def inject_amplitude_burst(samples: np.ndarray, at: int, length: int, amplitude: float, period: float) -> np.ndarray:
    """Oscillation of peak ``amplitude`` added on ``[at, at + length)``."""
    out = samples.copy()
    end = min(samples.size, at + length)
    k = np.arange(end - at)
    out[at:end] += amplitude * np.sin(2.0 * np.pi * k / period)
    return out


def _sequence(config: SynthConfig, rng: RngStream, seq_id: str, anomalous: bool) -> RawSequence:
    length = int(rng.integers(config.min_length, config.max_length + 1))
    phases = rng.uniform(0.0, 2.0 * np.pi, len(config.amplitudes))
    t = np.arange(length, dtype=np.float64)
    noise = config.noise_sigma * rng.normal(length)
    samples = _base_signal(config, t, phases) + noise
    if not anomalous:
        return RawSequence(seq_id, samples, NORMAL, None)

    at = int(rng.integers(length // 4, 3 * length // 4 + 1))
    at = min(at, length - 1)
    kind = config.kinds[int(rng.integers(0, len(config.kinds)))]
    magnitude = _draw(rng, config.magnitude_range) * config.noise_sigma
    if kind == "step_shift":
        samples = inject_step_shift(samples, at, magnitude)
    elif kind == "amplitude_burst":
        burst = int(rng.integers(config.burst_length_range[0], config.burst_length_range[1] + 1))
        period = config.sample_rate_hz / (config.frequencies_hz[0] if config.frequencies_hz else 10.0)
        samples = inject_amplitude_burst(samples, at, burst, magnitude, period)
    else:
        factor = _draw(rng, config.frequency_factor_range)
        shifted = _base_signal(config, t, phases, factor) + noise
        samples = np.concatenate([samples[:at], shifted[at:]])
    return RawSequence(seq_id, samples, ANOMALOUS, at)


def generate_synthetic(config: SynthConfig) -> Dataset:
    """Deterministic in ``config.seed``; each sequence draws from its own child stream."""
    root = RngStream(config.seed, key=(7,))
    sequences = [_sequence(config, root.child(0, i), f"normal-{i:04d}", False) for i in range(config.n_normal)]
    sequences += [_sequence(config, root.child(1, i), f"anomalous-{i:04d}", True) for i in range(config.n_anomalous)]
    log_event(
        logger,
        "synthetic_generated",
        seed=config.seed,
        normal=config.n_normal,
        anomalous=config.n_anomalous,
        digest=array_digest(*(s.samples for s in sequences)),
    )
    return Dataset(tuple(sequences), f"synthetic-{config.seed}")
