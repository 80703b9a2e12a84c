"""Shared fixtures: small seeded sequences and datasets that need no external files."""

import numpy as np
import pytest

from gfd.capture.types import ANOMALOUS, NORMAL, Dataset, RawSequence
from gfd.evaluate.synth import SynthConfig


def make_sequence(seq_id, n, seed=0, label=NORMAL, shift_at=None, shift=0.0):
    rng = np.random.default_rng(seed)
    t = np.arange(n)
    values = np.sin(2 * np.pi * t / 50.0) + 0.3 * rng.standard_normal(n)
    if shift_at is not None:
        values[shift_at:] += shift
    return RawSequence(seq_id, values, label, shift_at if label == ANOMALOUS else None)


@pytest.fixture
def small_dataset():
    """Eight normal and four step-shifted sequences of 256 samples."""
    normal = [make_sequence(f"n{i}", 256, seed=i) for i in range(8)]
    anomalous = [make_sequence(f"a{i}", 256, seed=100 + i, label=ANOMALOUS, shift_at=128, shift=4.0) for i in range(4)]
    return Dataset(tuple(normal + anomalous), "small")


@pytest.fixture
def tiny_synth():
    return SynthConfig(
        n_normal=20,
        n_anomalous=8,
        min_length=512,
        max_length=1024,
        kinds=("step_shift",),
        magnitude_range=(5.0, 5.0),
        seed=3,
    )


def central_difference(f, array, eps=1e-6):
    """Numerical gradient of scalar ``f()`` w.r.t. ``array`` (perturbed in place)."""
    grad = np.zeros_like(array)
    it = np.nditer(array, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        saved = array[idx]
        array[idx] = saved + eps
        up = f()
        array[idx] = saved - eps
        down = f()
        array[idx] = saved
        grad[idx] = (up - down) / (2 * eps)
    return grad


def relative_error(a, b):
    a, b = np.ravel(a), np.ravel(b)
    return np.linalg.norm(a - b) / max(np.linalg.norm(a) + np.linalg.norm(b), 1e-12)


@pytest.fixture
def numgrad():
    return central_difference


@pytest.fixture
def relerr():
    return relative_error


@pytest.fixture
def sequence_factory():
    return make_sequence


TINY_CONFIGS = {
    "hmm": ("stats", {"n_states": 2, "max_iters": 10}),
    "vae": ("raw", {"epochs": 3, "batch_size": 16}),
    "gan": ("raw", {"epochs": 1, "batch_size": 16, "noise_dim": 4}),
}


@pytest.fixture
def trained_bundle(small_dataset):
    """Factory for a calibrated bundle of the given kind, trained on ``small_dataset``'s normals."""
    from gfd.detect.judge import calibrate_bundle, train_detector
    from gfd.models import default_config

    def build(kind, fpr=0.05, **overrides):
        mode, options = TINY_CONFIGS[kind]
        config = default_config(kind, **{**options, **overrides})
        result = train_detector(kind, small_dataset.normal(), 32, 32, mode, config)
        return calibrate_bundle(result.bundle, small_dataset.normal(), fpr)

    return build
