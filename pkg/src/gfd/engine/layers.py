"""Fully-connected layers with manual reverse-mode gradients.

Batches are row-major: an input of shape (n, in_dim) yields (n, out_dim). A
1-D input is treated as a batch of one and the output is returned 1-D.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np
from scipy.special import expit

from gfd.common.errors import ValidationError
from gfd.engine.rng import RngStream

Activation = Literal["relu", "leaky_relu", "sigmoid", "tanh", "identity"]
Mode = Literal["train", "eval"]
ACTIVATIONS: tuple[str, ...] = ("relu", "leaky_relu", "sigmoid", "tanh", "identity")


@dataclass(eq=False)
class DenseLayer:
    weights: np.ndarray  # (out_dim, in_dim)
    biases: np.ndarray  # (out_dim,)
    activation: Activation = "identity"
    alpha: float = 0.2  # leaky_relu slope
    l2_lambda: float = 0.0
    dropout: bool = False

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.biases = np.asarray(self.biases, dtype=np.float64).reshape(-1)
        if self.weights.ndim != 2 or self.weights.shape[0] != self.biases.size:
            raise ValidationError(
                f"weights {self.weights.shape} and biases {self.biases.shape} are inconsistent", field="weights"
            )
        if self.activation not in ACTIVATIONS:
            raise ValidationError(f"unknown activation {self.activation!r}", field="activation")
        if self.l2_lambda < 0:
            raise ValidationError("l2_lambda must be non-negative", field="l2_lambda", value=self.l2_lambda)

    @property
    def in_dim(self) -> int:
        return int(self.weights.shape[1])

    @property
    def out_dim(self) -> int:
        return int(self.weights.shape[0])

    def activate(self, z: np.ndarray) -> np.ndarray:
        if self.activation == "relu":
            return np.maximum(z, 0.0)
        if self.activation == "leaky_relu":
            return np.where(z > 0.0, z, self.alpha * z)
        if self.activation == "sigmoid":
            return expit(z)
        if self.activation == "tanh":
            return np.tanh(z)
        return z

    def derivative(self, z: np.ndarray, a: np.ndarray) -> np.ndarray:
        if self.activation == "relu":
            return (z > 0.0).astype(np.float64)
        if self.activation == "leaky_relu":
            return np.where(z > 0.0, 1.0, self.alpha)
        if self.activation == "sigmoid":
            return a * (1.0 - a)
        if self.activation == "tanh":
            return 1.0 - a * a
        return np.ones_like(z)


@dataclass(eq=False)
class DenseNet:
    layers: list[DenseLayer]
    generation: int = 0  # bumped on every parameter update; stale tapes are rejected

    def __post_init__(self) -> None:
        if not self.layers:
            raise ValidationError("a network needs at least one layer", field="layers")
        for k, (a, b) in enumerate(zip(self.layers, self.layers[1:])):
            if a.out_dim != b.in_dim:
                raise ValidationError(
                    f"layer {k} out_dim {a.out_dim} does not chain into layer {k + 1} in_dim {b.in_dim}", field="layers"
                )

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def parameters(self) -> list[np.ndarray]:
        """Parameter arrays in a fixed order: W0, b0, W1, b1, ..."""
        params: list[np.ndarray] = []
        for layer in self.layers:
            params.extend((layer.weights, layer.biases))
        return params

    def l2_penalty(self) -> float:
        """Sum over layers of ``lambda / 2 * ||W||^2`` (biases excluded)."""
        return float(sum(0.5 * layer.l2_lambda * np.sum(layer.weights**2) for layer in self.layers))

    def touch(self) -> None:
        self.generation += 1

    def copy(self) -> "DenseNet":
        return DenseNet(
            [
                DenseLayer(l.weights.copy(), l.biases.copy(), l.activation, l.alpha, l.l2_lambda, l.dropout)
                for l in self.layers
            ]
        )


@dataclass
class Tape:
    net_id: int
    generation: int
    squeeze: bool
    inputs: list[np.ndarray] = field(default_factory=list)
    pre: list[np.ndarray] = field(default_factory=list)
    post: list[np.ndarray] = field(default_factory=list)
    masks: list[Optional[np.ndarray]] = field(default_factory=list)
    output: Optional[np.ndarray] = None


@dataclass
class Gradients:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    input: np.ndarray

    def as_list(self) -> list[np.ndarray]:
        """Aligned with :meth:`DenseNet.parameters`."""
        out: list[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out


def build_net(
    dims: Sequence[int],
    activations: Sequence[Activation],
    rng: RngStream,
    l2_lambda: float = 0.0,
    alpha: float = 0.2,
    dropout_layers: Sequence[int] = (),
) -> DenseNet:
    """Glorot-uniform weights on ``±sqrt(6 / (fan_in + fan_out))``, zero biases."""
    if len(activations) != len(dims) - 1:
        raise ValidationError("need one activation per layer", field="activations")
    if any(d < 1 for d in dims):
        raise ValidationError("all layer dimensions must be >= 1", field="dims", value=list(dims))
    layers = []
    for k, (fan_in, fan_out) in enumerate(zip(dims, dims[1:])):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights = rng.uniform(-limit, limit, (fan_out, fan_in))
        layers.append(
            DenseLayer(weights, np.zeros(fan_out), activations[k], alpha, l2_lambda, dropout=k in dropout_layers)
        )
    return DenseNet(layers)


def forward(
    net: DenseNet,
    input: np.ndarray,
    mode: Mode = "eval",
    dropout_rate: float = 0.0,
    rng: Optional[RngStream] = None,
) -> tuple[np.ndarray, Tape]:
    """Run the network and record everything :func:`backward` needs.

    In train mode, layers flagged ``dropout`` keep each post-activation unit
    with probability ``1 - dropout_rate`` and scale survivors by
    ``1 / (1 - dropout_rate)``. Eval mode never drops.
    """
    if not 0.0 <= dropout_rate < 1.0:
        raise ValidationError("dropout_rate must lie in [0, 1)", field="dropout_rate", value=dropout_rate)
    x = np.asarray(input, dtype=np.float64)
    squeeze = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != net.in_dim:
        raise ValidationError(f"input dimension {x.shape[1]} does not match network input {net.in_dim}", field="input")
    use_dropout = mode == "train" and dropout_rate > 0.0
    if use_dropout and rng is None:
        raise ValidationError("train-mode dropout needs an RngStream", field="rng")
    keep = 1.0 - dropout_rate

    tape = Tape(net_id=id(net), generation=net.generation, squeeze=squeeze)
    for layer in net.layers:
        tape.inputs.append(x)
        z = x @ layer.weights.T + layer.biases
        a = layer.activate(z)
        tape.pre.append(z)
        tape.post.append(a)
        mask = None
        if use_dropout and layer.dropout:
            mask = (rng.random(a.shape) < keep) / keep
            a = a * mask
        tape.masks.append(mask)
        x = a
    tape.output = x
    return (x[0] if squeeze else x), tape


def backward(net: DenseNet, tape: Tape, output_gradient: np.ndarray) -> Gradients:
    """Exact gradients of ``loss + l2_penalty`` given ``d loss / d output``.

    Dropout masks recorded on the tape are replayed; L2 adds ``lambda * W``.
    """
    if tape.net_id != id(net) or tape.generation != net.generation or len(tape.pre) != len(net.layers):
        raise ValidationError("tape does not belong to this network state", field="tape")
    g = np.atleast_2d(np.asarray(output_gradient, dtype=np.float64))
    if g.shape != tape.output.shape:
        raise ValidationError(
            f"output gradient shape {g.shape} does not match output {tape.output.shape}", field="output_gradient"
        )
    n_layers = len(net.layers)
    dws: list[np.ndarray] = [np.empty(0)] * n_layers
    dbs: list[np.ndarray] = [np.empty(0)] * n_layers
    for k in range(n_layers - 1, -1, -1):
        layer = net.layers[k]
        if tape.masks[k] is not None:
            g = g * tape.masks[k]
        gz = g * layer.derivative(tape.pre[k], tape.post[k])
        dws[k] = gz.T @ tape.inputs[k] + layer.l2_lambda * layer.weights
        dbs[k] = gz.sum(axis=0)
        g = gz @ layer.weights
    return Gradients(weights=dws, biases=dbs, input=g[0] if tape.squeeze else g)
