"""Fully-connected variational autoencoder scored by reconstruction error.

Encoder: input -> h1 -> h2 (ReLU) -> linear head emitting [mu, log_var].
Decoder: latent -> h2 (ReLU) -> input (sigmoid). All weights carry L2.
Training minimizes mse(x, x_hat) + kl_weight * KL + L2 with Adam.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from pydantic import BaseModel, Field

from gfd.common.errors import ValidationError
from gfd.common.logging import get_logger, log_event
from gfd.engine.layers import DenseNet, Gradients, Tape, backward, build_net, forward
from gfd.engine.optim import AdamState, apply_adam
from gfd.engine.rng import RngStream

logger = get_logger(__name__)

FEATURE_ARCHITECTURE = (16, 8, 4)
RAW_ARCHITECTURE = (128, 64, 16)


class VaeTrainConfig(BaseModel):
    epochs: int = Field(default=300, ge=1)
    batch_size: int = Field(default=64, ge=1)
    learning_rate: float = Field(default=0.001, gt=0.0)
    seed: int = Field(default=0, ge=0)
    l2_lambda: float = Field(default=1e-4, ge=0.0)
    kl_weight: float = Field(default=1.0, ge=0.0)
    hidden_dims: Optional[tuple[int, int]] = None
    latent_dim: Optional[int] = Field(default=None, ge=1)

    def architecture(self, input_dim: int) -> tuple[int, int, int]:
        """(h1, h2, latent); unset entries follow the input size."""
        h1, h2, latent = FEATURE_ARCHITECTURE if input_dim <= 16 else RAW_ARCHITECTURE
        if self.hidden_dims is not None:
            h1, h2 = self.hidden_dims
        return h1, h2, self.latent_dim or latent


@dataclass(eq=False)
class VaeModel:
    encoder: DenseNet
    decoder: DenseNet
    latent_dim: int
    input_dim: int
    l2_lambda: float
    kl_weight: float = 1.0

    def __post_init__(self) -> None:
        if self.encoder.in_dim != self.input_dim or self.decoder.out_dim != self.input_dim:
            raise ValidationError("decoder output must match encoder input", field="decoder")
        if self.encoder.out_dim != 2 * self.latent_dim or self.decoder.in_dim != self.latent_dim:
            raise ValidationError("latent dimensions do not chain", field="latent_dim")


@dataclass
class VaeTape:
    x: np.ndarray
    enc: Tape
    dec: Tape
    mu: np.ndarray
    log_var: np.ndarray
    eps: np.ndarray
    z: np.ndarray
    x_hat: np.ndarray
    reconstruction: float
    kl: float


def build_vae(input_dim: int, config: VaeTrainConfig) -> VaeModel:
    h1, h2, latent = config.architecture(input_dim)
    rng = RngStream(config.seed, key=(0,))
    encoder = build_net([input_dim, h1, h2, 2 * latent], ["relu", "relu", "identity"], rng, config.l2_lambda)
    decoder = build_net([latent, h2, input_dim], ["relu", "sigmoid"], rng, config.l2_lambda)
    return VaeModel(encoder, decoder, latent, input_dim, config.l2_lambda, config.kl_weight)


def kl_divergence(mu: np.ndarray, log_var: np.ndarray) -> float:
    """KL(N(mu, exp(log_var)) || N(0, I)) = 1/2 sum(mu^2 + exp(log_var) - 1 - log_var)."""
    mu = np.asarray(mu, dtype=np.float64)
    log_var = np.asarray(log_var, dtype=np.float64)
    if mu.shape != log_var.shape:
        raise ValidationError(f"mu {mu.shape} and log_var {log_var.shape} differ", field="log_var")
    return float(0.5 * np.sum(mu**2 + np.exp(log_var) - 1.0 - log_var))


def _check_input(model: VaeModel, x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != model.input_dim:
        raise ValidationError(f"input dimension {x.shape[1]} does not match model {model.input_dim}", field="input")
    return x


def encode(model: VaeModel, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    head, _ = forward(model.encoder, _check_input(model, x))
    return head[:, : model.latent_dim], head[:, model.latent_dim :]


def decode(model: VaeModel, z: np.ndarray) -> np.ndarray:
    out, _ = forward(model.decoder, np.atleast_2d(z))
    return out


def elbo_loss(
    model: VaeModel,
    input: np.ndarray,
    rng: RngStream,
    eps: Optional[np.ndarray] = None,
    strict: bool = True,
) -> tuple[float, VaeTape]:
    """Batch-mean negative ELBO plus the L2 penalty of both networks.

    ``z = mu + exp(log_var / 2) * eps``; ``eps`` is drawn from ``rng`` unless
    given, which freezes the noise for gradient checks.
    """
    x = _check_input(model, input)
    if strict and (x.min() < 0.0 or x.max() > 1.0):
        raise ValidationError("VAE training input must be scaled to [0, 1]", field="input", value=(x.min(), x.max()))
    n = x.shape[0]
    head, enc_tape = forward(model.encoder, x, mode="train")
    mu, log_var = head[:, : model.latent_dim], head[:, model.latent_dim :]
    if eps is None:
        eps = rng.normal(mu.shape)
    eps = np.asarray(eps, dtype=np.float64).reshape(mu.shape)
    z = mu + np.exp(0.5 * log_var) * eps
    x_hat, dec_tape = forward(model.decoder, z, mode="train")

    reconstruction = float(np.mean((x - x_hat) ** 2))
    kl = kl_divergence(mu, log_var) / n
    loss = reconstruction + model.kl_weight * kl + model.encoder.l2_penalty() + model.decoder.l2_penalty()
    tape = VaeTape(x, enc_tape, dec_tape, mu, log_var, eps, z, x_hat, reconstruction, kl)
    return loss, tape


def elbo_gradients(model: VaeModel, tape: VaeTape) -> tuple[Gradients, Gradients]:
    """Gradients of :func:`elbo_loss` for (encoder, decoder), through the reparameterized sample."""
    n = tape.x.shape[0]
    g_xhat = 2.0 * (tape.x_hat - tape.x) / tape.x.size
    dec_grads = backward(model.decoder, tape.dec, g_xhat)
    dz = dec_grads.input
    std = np.exp(0.5 * tape.log_var)
    d_mu = dz + model.kl_weight * tape.mu / n
    d_log_var = dz * tape.eps * 0.5 * std + model.kl_weight * 0.5 * (np.exp(tape.log_var) - 1.0) / n
    enc_grads = backward(model.encoder, tape.enc, np.concatenate([d_mu, d_log_var], axis=1))
    return enc_grads, dec_grads


def train(model: VaeModel, windows: np.ndarray, config: VaeTrainConfig) -> tuple[VaeModel, list[float]]:
    """Mini-batch Adam over seeded shuffles; returns the model and per-epoch mean loss."""
    x = np.atleast_2d(np.asarray(windows, dtype=np.float64))
    if x.shape[0] == 0:
        raise ValidationError("VAE training needs at least one window", field="windows")
    x = _check_input(model, x)
    rng = RngStream(config.seed, key=(1,))
    enc_state = AdamState.for_params(model.encoder.parameters(), learning_rate=config.learning_rate)
    dec_state = AdamState.for_params(model.decoder.parameters(), learning_rate=config.learning_rate)

    history: list[float] = []
    n = x.shape[0]
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            batch = x[order[start : start + config.batch_size]]
            loss, tape = elbo_loss(model, batch, rng)
            enc_grads, dec_grads = elbo_gradients(model, tape)
            apply_adam(model.encoder, enc_state, enc_grads)
            apply_adam(model.decoder, dec_state, dec_grads)
            total += loss * batch.shape[0]
        history.append(total / n)
        log_event(logger, "vae_epoch", level=logging.DEBUG, epoch=epoch, loss=history[-1])
    log_event(logger, "vae_trained", epochs=config.epochs, first_loss=history[0], final_loss=history[-1])
    return model, history


def score_batch(model: VaeModel, windows: np.ndarray) -> np.ndarray:
    """Per-window mse between input and the decoded latent mean."""
    x = _check_input(model, windows)
    mu, _ = encode(model, x)
    return np.mean((x - decode(model, mu)) ** 2, axis=1)


def score(model: VaeModel, window: np.ndarray) -> float:
    return float(score_batch(model, window)[0])
