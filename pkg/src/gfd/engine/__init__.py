from gfd.engine.layers import DenseLayer, DenseNet, Gradients, Tape, backward, build_net, forward
from gfd.engine.losses import bce, bce_grad, mse, mse_grad
from gfd.engine.optim import AdamState, adam_step, apply_adam
from gfd.engine.rng import RngStream

__all__ = [
    "AdamState",
    "DenseLayer",
    "DenseNet",
    "Gradients",
    "RngStream",
    "Tape",
    "adam_step",
    "apply_adam",
    "backward",
    "bce",
    "bce_grad",
    "build_net",
    "forward",
    "mse",
    "mse_grad",
]
