from __future__ import annotations

import numpy as np

from gfd.common.errors import ValidationError

BCE_CLAMP = 1e-7


def _pair(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValidationError(f"shape mismatch {a.shape} vs {b.shape}", field="target")
    return a, b


def mse(x: np.ndarray, x_hat: np.ndarray) -> float:
    """Mean of squared componentwise differences."""
    x, x_hat = _pair(x, x_hat)
    return float(np.mean((x - x_hat) ** 2))


def mse_grad(x: np.ndarray, x_hat: np.ndarray) -> np.ndarray:
    """d mse / d x_hat."""
    x, x_hat = _pair(x, x_hat)
    return 2.0 * (x_hat - x) / x.size


def bce(prediction: np.ndarray, target: np.ndarray) -> float:
    """Mean binary cross-entropy with probabilities clamped to [1e-7, 1 - 1e-7]."""
    p, t = _pair(prediction, target)
    p = np.clip(p, BCE_CLAMP, 1.0 - BCE_CLAMP)
    return float(-np.mean(t * np.log(p) + (1.0 - t) * np.log(1.0 - p)))


def bce_grad(prediction: np.ndarray, target: np.ndarray) -> np.ndarray:
    """d bce / d prediction; zero where the clamp is active."""
    p, t = _pair(prediction, target)
    inside = (p > BCE_CLAMP) & (p < 1.0 - BCE_CLAMP)
    pc = np.clip(p, BCE_CLAMP, 1.0 - BCE_CLAMP)
    grad = (pc - t) / (pc * (1.0 - pc)) / p.size
    return np.where(inside, grad, 0.0)
