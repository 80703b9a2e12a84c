"""Dense GAN over flattened windows.

Generator: noise -> 256 -> 512 -> input (LeakyReLU hidden, sigmoid or tanh out).
Discriminator: input -> 512 -> 256 -> 1 (LeakyReLU hidden with dropout, sigmoid out).
Both nets train with their own Adam state; the generator uses the
non-saturating loss, one discriminator step per generator step.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field

from gfd.common.errors import ValidationError
from gfd.common.logging import get_logger, log_event
from gfd.engine.layers import DenseNet, Gradients, Tape, backward, build_net, forward
from gfd.engine.losses import bce, bce_grad
from gfd.engine.optim import AdamState, apply_adam
from gfd.engine.rng import RngStream

logger = get_logger(__name__)

OutputActivation = Literal["sigmoid", "tanh"]
GanScore = Literal["discriminator", "inversion"]

GENERATOR_HIDDEN = (256, 512)
DISCRIMINATOR_HIDDEN = (512, 256)
ACCEPT_SLACK = 1e-10
MAX_HALVINGS = 30


class GanTrainConfig(BaseModel):
    epochs: int = Field(default=300, ge=1)
    batch_size: int = Field(default=64, ge=1)
    learning_rate: float = Field(default=0.0002, gt=0.0)
    beta1: float = Field(default=0.5, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    seed: int = Field(default=0, ge=0)
    leaky_alpha: float = Field(default=0.2, ge=0.0)
    noise_dim: int = Field(default=64, ge=1)
    dropout_rate: float = Field(default=0.4, ge=0.0, lt=1.0)
    output_activation: OutputActivation = "sigmoid"
    score: GanScore = "discriminator"
    inversion_steps: int = Field(default=100, ge=1)
    inversion_lr: float = Field(default=0.01, gt=0.0)
    inversion_blend: float = Field(default=0.0, ge=0.0, le=1.0)


@dataclass(eq=False)
class GanModel:
    generator: DenseNet
    discriminator: DenseNet
    noise_dim: int
    dropout_rate: float = 0.4

    def __post_init__(self) -> None:
        if self.generator.in_dim != self.noise_dim:
            raise ValidationError("generator input must equal noise_dim", field="noise_dim", value=self.noise_dim)
        if self.generator.out_dim != self.discriminator.in_dim:
            raise ValidationError("generator output must feed the discriminator", field="generator")
        if self.discriminator.out_dim != 1:
            raise ValidationError("discriminator must emit one probability", field="discriminator")

    @property
    def input_dim(self) -> int:
        return self.discriminator.in_dim

    @property
    def output_activation(self) -> str:
        return self.generator.layers[-1].activation


@dataclass
class GanTrace:
    d_losses: list[float] = field(default_factory=list)
    g_losses: list[float] = field(default_factory=list)
    first_d_real: Optional[np.ndarray] = None
    first_d_fake: Optional[np.ndarray] = None
    first_d_loss: Optional[float] = None


def build_gan(input_dim: int, config: GanTrainConfig) -> GanModel:
    rng = RngStream(config.seed, key=(0,))
    a = config.leaky_alpha
    generator = build_net(
        [config.noise_dim, *GENERATOR_HIDDEN, input_dim],
        ["leaky_relu", "leaky_relu", config.output_activation],
        rng,
        alpha=a,
    )
    discriminator = build_net(
        [input_dim, *DISCRIMINATOR_HIDDEN, 1],
        ["leaky_relu", "leaky_relu", "sigmoid"],
        rng,
        alpha=a,
        dropout_layers=(0, 1),
    )
    return GanModel(generator, discriminator, config.noise_dim, config.dropout_rate)


def _check_windows(model: GanModel, windows: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(windows, dtype=np.float64))
    if x.shape[1] != model.input_dim:
        raise ValidationError(f"window dimension {x.shape[1]} does not match model {model.input_dim}", field="window")
    return x


def discriminator_loss(
    model: GanModel, real: np.ndarray, fake: np.ndarray, rng: Optional[RngStream]
) -> tuple[float, Tape, np.ndarray]:
    """Mean of the real (target 1) and fake (target 0) BCE halves, dropout active.

    Real and fake batches must be the same size so the joint mean equals the
    average of the two per-half means.
    """
    if real.shape != fake.shape:
        raise ValidationError("real and fake batches must match in shape", field="fake")
    batch = np.concatenate([real, fake], axis=0)
    targets = np.concatenate([np.ones((real.shape[0], 1)), np.zeros((fake.shape[0], 1))])
    out, tape = forward(model.discriminator, batch, "train", model.dropout_rate, rng)
    return bce(out, targets), tape, out


def discriminator_gradients(model: GanModel, tape: Tape, out: np.ndarray) -> Gradients:
    n = out.shape[0] // 2
    targets = np.concatenate([np.ones((n, 1)), np.zeros((n, 1))])
    return backward(model.discriminator, tape, bce_grad(out, targets))


def generator_loss(
    model: GanModel, z: np.ndarray, rng: Optional[RngStream]
) -> tuple[float, tuple[Tape, Tape], np.ndarray]:
    """Non-saturating generator loss ``bce(D(G(z)), 1)``."""
    fake, g_tape = forward(model.generator, z, "train")
    out, d_tape = forward(model.discriminator, fake, "train", model.dropout_rate, rng)
    return bce(out, np.ones_like(out)), (g_tape, d_tape), out


def generator_gradients(model: GanModel, tapes: tuple[Tape, Tape], out: np.ndarray) -> Gradients:
    """Generator gradients only; the discriminator backward pass is used for its input gradient."""
    g_tape, d_tape = tapes
    through_d = backward(model.discriminator, d_tape, bce_grad(out, np.ones_like(out)))
    return backward(model.generator, g_tape, through_d.input)


def train(model: GanModel, windows: np.ndarray, config: GanTrainConfig) -> tuple[GanModel, GanTrace]:
    x = _check_windows(model, windows)
    n = x.shape[0]
    if n < config.batch_size:
        raise ValidationError(
            f"GAN training needs at least batch_size={config.batch_size} windows, got {n}", field="windows", value=n
        )
    rng = RngStream(config.seed, key=(1,))
    hyper = dict(learning_rate=config.learning_rate, beta1=config.beta1, beta2=config.beta2)
    d_state = AdamState.for_params(model.discriminator.parameters(), **hyper)
    g_state = AdamState.for_params(model.generator.parameters(), **hyper)

    trace = GanTrace()
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        d_total = g_total = 0.0
        batches = 0
        for start in range(0, n, config.batch_size):
            real = x[order[start : start + config.batch_size]]
            m = real.shape[0]
            fake, _ = forward(model.generator, rng.normal((m, model.noise_dim)))
            d_loss, d_tape, d_out = discriminator_loss(model, real, fake, rng)
            if trace.first_d_loss is None:
                trace.first_d_real = d_out[:m, 0].copy()
                trace.first_d_fake = d_out[m:, 0].copy()
                trace.first_d_loss = d_loss
            apply_adam(model.discriminator, d_state, discriminator_gradients(model, d_tape, d_out))

            g_loss, g_tapes, g_out = generator_loss(model, rng.normal((m, model.noise_dim)), rng)
            apply_adam(model.generator, g_state, generator_gradients(model, g_tapes, g_out))

            d_total += d_loss
            g_total += g_loss
            batches += 1
        trace.d_losses.append(d_total / batches)
        trace.g_losses.append(g_total / batches)
        log_event(
            logger, "gan_epoch", level=logging.DEBUG, epoch=epoch, d_loss=trace.d_losses[-1], g_loss=trace.g_losses[-1]
        )
    log_event(logger, "gan_trained", epochs=config.epochs, d_loss=trace.d_losses[-1], g_loss=trace.g_losses[-1])
    return model, trace


def discriminate(model: GanModel, windows: np.ndarray) -> np.ndarray:
    """Eval-mode discriminator probabilities, one per window."""
    out, _ = forward(model.discriminator, _check_windows(model, windows))
    return out[:, 0]


def score_discriminator_batch(model: GanModel, windows: np.ndarray) -> np.ndarray:
    return 1.0 - discriminate(model, windows)


def score_discriminator(model: GanModel, window: np.ndarray) -> float:
    """``1 - D(window)`` with dropout off; higher is more anomalous."""
    return float(score_discriminator_batch(model, window)[0])


def _row_reconstruction(model: GanModel, z: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-row ``mse(G(z), target)`` and its gradient with respect to each row of ``z``."""
    out, tape = forward(model.generator, z)
    diff = out - target
    grads = backward(model.generator, tape, 2.0 * diff / target.shape[1])
    return np.mean(diff**2, axis=1), grads.input


def invert_latent_batch(
    model: GanModel,
    windows: np.ndarray,
    n_steps: int,
    lr: float,
    seed: int = 0,
    z0: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, list[list[float]]]:
    """Descend ``mse(G(z_i), window_i)`` for every row at once.

    Rows are independent: each has its own step size and loss trace, and
    every row starts from the same code. A step is accepted only if the loss
    rises by at most ``ACCEPT_SLACK``; otherwise that row's step is halved (up
    to ``MAX_HALVINGS`` times) and, failing that, the row stops early. Returns
    the final codes and the per-row loss traces (initial loss first, then one
    entry per accepted step).
    """
    if n_steps < 1:
        raise ValidationError("n_steps must be >= 1", field="n_steps", value=n_steps)
    if lr <= 0:
        raise ValidationError("lr must be positive", field="lr", value=lr)
    target = _check_windows(model, windows)
    if z0 is None:
        start = RngStream(seed, key=(2,)).normal(model.noise_dim)
    else:
        start = np.asarray(z0, dtype=np.float64).reshape(model.noise_dim)
    z = np.tile(start, (target.shape[0], 1))

    loss, grad = _row_reconstruction(model, z, target)
    traces = [[float(v)] for v in loss]
    active = np.ones(target.shape[0], dtype=bool)
    for _ in range(n_steps):
        if not active.any():
            break
        step = np.full(target.shape[0], lr)
        pending = active.copy()
        for _ in range(MAX_HALVINGS + 1):
            rows = np.flatnonzero(pending)
            if rows.size == 0:
                break
            candidate = z[rows] - step[rows, None] * grad[rows]
            new_loss, new_grad = _row_reconstruction(model, candidate, target[rows])
            ok = new_loss <= loss[rows] + ACCEPT_SLACK
            done = rows[ok]
            z[done], loss[done], grad[done] = candidate[ok], new_loss[ok], new_grad[ok]
            for i in done:
                traces[i].append(float(loss[i]))
            pending[done] = False
            step[rows[~ok]] *= 0.5
        active &= ~pending
    return z, traces


def invert_latent(
    model: GanModel,
    window: np.ndarray,
    n_steps: int,
    lr: float,
    seed: int = 0,
    z0: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, list[float]]:
    """Single-window :func:`invert_latent_batch`; returns the code and its loss trace."""
    z, traces = invert_latent_batch(model, _check_windows(model, window)[:1], n_steps, lr, seed, z0)
    return z[0], traces[0]


def score_inversion(
    model: GanModel,
    window: np.ndarray,
    n_steps: int = 100,
    lr: float = 0.01,
    seed: int = 0,
    blend: float = 0.0,
) -> float:
    """Reconstruction mse after latent inversion, blended as
    ``(1 - blend) * mse + blend * score_discriminator``."""
    return float(score_inversion_batch(model, _check_windows(model, window)[:1], n_steps, lr, seed, blend)[0])


def score_inversion_batch(
    model: GanModel,
    windows: np.ndarray,
    n_steps: int = 100,
    lr: float = 0.01,
    seed: int = 0,
    blend: float = 0.0,
) -> np.ndarray:
    if not 0.0 <= blend <= 1.0:
        raise ValidationError("blend must lie in [0, 1]", field="blend", value=blend)
    x = _check_windows(model, windows)
    _, traces = invert_latent_batch(model, x, n_steps, lr, seed)
    recon = np.array([t[-1] for t in traces])
    if blend == 0.0:
        return recon
    return (1.0 - blend) * recon + blend * score_discriminator_batch(model, x)


def score_batch(model: GanModel, windows: np.ndarray, config: GanTrainConfig) -> np.ndarray:
    x = _check_windows(model, windows)
    if config.score == "discriminator":
        return score_discriminator_batch(model, x)
    return score_inversion_batch(
        model, x, config.inversion_steps, config.inversion_lr, config.seed, config.inversion_blend
    )
