"""Gaussian-emission hidden Markov model.

Emissions are diagonal Gaussians, one per state. Forward-backward runs on
normalized alphas; each step's emission densities are shifted by their max
log value before exponentiation, and the shift is added back into the
log-likelihood, so long or far-off sequences never underflow.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from pydantic import BaseModel, Field

from gfd.common.errors import ValidationError
from gfd.common.logging import get_logger, log_event
from gfd.engine.rng import RngStream

logger = get_logger(__name__)

VARIANCE_FLOOR = 1e-6
STOCHASTIC_TOL = 1e-9
_TINY = np.finfo(np.float64).tiny

HmmScore = Literal["reconstruction", "nll"]


class HmmTrainConfig(BaseModel):
    n_states: int = Field(default=2, ge=1)
    max_iters: int = Field(default=100, ge=1)
    tol: float = Field(default=1e-4, ge=0.0)
    seed: int = Field(default=0, ge=0)
    score: HmmScore = "reconstruction"


@dataclass(frozen=True, eq=False)
class HmmParams:
    pi: np.ndarray  # (K,)
    A: np.ndarray  # (K, K)
    means: np.ndarray  # (K, D)
    variances: np.ndarray  # (K, D)

    def __post_init__(self) -> None:
        k = self.pi.size
        if self.A.shape != (k, k) or self.means.shape[0] != k or self.variances.shape != self.means.shape:
            raise ValidationError("HMM parameter shapes are inconsistent", field="A")
        if np.any(self.pi < 0) or np.any(self.A < 0):
            raise ValidationError("probabilities must be non-negative", field="pi")
        if abs(self.pi.sum() - 1.0) > STOCHASTIC_TOL or np.any(np.abs(self.A.sum(axis=1) - 1.0) > STOCHASTIC_TOL):
            raise ValidationError("pi and rows of A must sum to 1", field="A")
        if np.any(self.variances < VARIANCE_FLOOR):
            raise ValidationError("variances must respect the floor", field="variances")

    @property
    def n_states(self) -> int:
        return int(self.pi.size)

    @property
    def dim(self) -> int:
        return int(self.means.shape[1])


@dataclass(frozen=True, eq=False)
class HmmPosterior:
    gamma: np.ndarray  # (T, K)
    log_likelihood: float


@dataclass
class _Pass:
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    log_scale: np.ndarray  # per-step log normalizer including the emission shift
    xi_sum: np.ndarray
    b: np.ndarray  # shifted emission densities

    @property
    def log_likelihood(self) -> float:
        return float(self.log_scale.sum())


def _as_observations(params: HmmParams | None, sequence: np.ndarray) -> np.ndarray:
    x = np.asarray(sequence, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValidationError("observation sequence must be a non-empty (T, D) array", field="sequence")
    if params is not None and x.shape[1] != params.dim:
        raise ValidationError(f"observation dimension {x.shape[1]} does not match emissions {params.dim}", field="sequence")
    return x


def log_emissions(params: HmmParams, x: np.ndarray) -> np.ndarray:
    """log N(x_t | mu_i, diag(var_i)), shape (T, K)."""
    diff = x[:, None, :] - params.means[None, :, :]
    return -0.5 * np.sum(np.log(2.0 * np.pi * params.variances)[None] + diff**2 / params.variances[None], axis=2)


def _forward_backward(params: HmmParams, x: np.ndarray, need_backward: bool = True) -> _Pass:
    logb = log_emissions(params, x)
    shift = logb.max(axis=1)
    b = np.exp(logb - shift[:, None])
    T, K = b.shape
    alpha = np.empty((T, K))
    log_scale = np.empty(T)
    scales = np.empty(T)

    a = params.pi * b[0]
    for t in range(T):
        if t > 0:
            a = (alpha[t - 1] @ params.A) * b[t]
        c = max(a.sum(), _TINY)
        alpha[t] = a / c
        scales[t] = c
        log_scale[t] = np.log(c) + shift[t]

    beta = np.ones((T, K))
    xi_sum = np.zeros((K, K))
    if need_backward:
        for t in range(T - 2, -1, -1):
            weighted = b[t + 1] * beta[t + 1]
            beta[t] = (params.A @ weighted) / scales[t + 1]
            xi_sum += alpha[t][:, None] * params.A * (weighted / scales[t + 1])[None, :]
    gamma = alpha * beta
    gamma /= np.maximum(gamma.sum(axis=1, keepdims=True), _TINY)
    return _Pass(alpha, beta, gamma, log_scale, xi_sum, b)


def log_likelihood(params: HmmParams, sequence: np.ndarray) -> float:
    """log P(sequence | params) via the scaled forward algorithm."""
    x = _as_observations(params, sequence)
    return _forward_backward(params, x, need_backward=False).log_likelihood


def posteriors(params: HmmParams, sequence: np.ndarray) -> HmmPosterior:
    x = _as_observations(params, sequence)
    fb = _forward_backward(params, x)
    return HmmPosterior(gamma=fb.gamma, log_likelihood=fb.log_likelihood)


def viterbi(params: HmmParams, sequence: np.ndarray) -> np.ndarray:
    """Most probable state path; ties go to the lower state index."""
    x = _as_observations(params, sequence)
    logb = log_emissions(params, x)
    with np.errstate(divide="ignore"):
        log_pi = np.log(params.pi)
        log_A = np.log(params.A)
    T, K = logb.shape
    delta = log_pi + logb[0]
    back = np.zeros((T, K), dtype=np.int64)
    for t in range(1, T):
        cand = delta[:, None] + log_A  # (from, to)
        back[t] = np.argmax(cand, axis=0)
        delta = cand[back[t], np.arange(K)] + logb[t]
    path = np.empty(T, dtype=np.int64)
    path[-1] = int(np.argmax(delta))
    for t in range(T - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return path


def reconstruct(params: HmmParams, sequence: np.ndarray) -> np.ndarray:
    """Posterior-weighted emission means, shape (T, D)."""
    return posteriors(params, sequence).gamma @ params.means


def window_scores(params: HmmParams, sequence: np.ndarray, score: HmmScore = "reconstruction") -> np.ndarray:
    """One anomaly score per observation.

    ``reconstruction``: squared error between x_t and its reconstruction,
    averaged over dimensions. ``nll``: negative log of the step's forward
    normalizer, so the scores sum to ``-log P(sequence)``.
    """
    x = _as_observations(params, sequence)
    fb = _forward_backward(params, x, need_backward=score == "reconstruction")
    if score == "nll":
        return -fb.log_scale
    x_hat = fb.gamma @ params.means
    return np.mean((x - x_hat) ** 2, axis=1)


def score_reconstruction(params: HmmParams, sequence: np.ndarray) -> float:
    return float(np.mean(window_scores(params, sequence, "reconstruction")))


def score_negative_log_likelihood(params: HmmParams, sequence: np.ndarray) -> float:
    return float(np.mean(window_scores(params, sequence, "nll")))


def _initial_params(observations: list[np.ndarray], n_states: int, seed: int) -> HmmParams:
    stacked = np.concatenate(observations, axis=0)
    rng = RngStream(seed)
    # farthest-point seeding
    means = [stacked[int(rng.integers(0, stacked.shape[0]))]]
    for _ in range(1, n_states):
        d2 = np.min([np.sum((stacked - m) ** 2, axis=1) for m in means], axis=0)
        means.append(stacked[int(np.argmax(d2))])
    variance = np.maximum(stacked.var(axis=0), VARIANCE_FLOOR)
    return HmmParams(
        pi=np.full(n_states, 1.0 / n_states),
        A=np.full((n_states, n_states), 1.0 / n_states),
        means=np.array(means, dtype=np.float64),
        variances=np.tile(variance, (n_states, 1)),
    )


def _m_step(params: HmmParams, passes: list[_Pass], observations: list[np.ndarray]) -> HmmParams:
    K, D = params.means.shape
    pi = np.mean([fb.gamma[0] for fb in passes], axis=0)
    pi = pi / pi.sum()

    xi = np.sum([fb.xi_sum for fb in passes], axis=0)
    rows = xi.sum(axis=1, keepdims=True)
    A = np.where(rows > 0, xi / np.where(rows > 0, rows, 1.0), params.A)
    A = A / A.sum(axis=1, keepdims=True)

    weight = np.zeros(K)
    first = np.zeros((K, D))
    for fb, x in zip(passes, observations):
        weight += fb.gamma.sum(axis=0)
        first += fb.gamma.T @ x
    seen = weight > 0
    safe = np.where(seen, weight, 1.0)[:, None]
    means = np.where(seen[:, None], first / safe, params.means)

    second = np.zeros((K, D))
    for fb, x in zip(passes, observations):
        for k in range(K):
            second[k] += fb.gamma[:, k] @ (x - means[k]) ** 2
    variances = np.where(seen[:, None], second / safe, params.variances)
    variances = np.maximum(variances, VARIANCE_FLOOR)
    return HmmParams(pi=pi, A=A, means=means, variances=variances)


def fit_baum_welch_trace(
    observations: Sequence[np.ndarray],
    n_states: int = 2,
    seed: int = 0,
    max_iters: int = 100,
    tol: float = 1e-4,
) -> tuple[HmmParams, list[float]]:
    """Baum-Welch EM; returns the fitted parameters and the per-iteration total log-likelihood.

    Stops once an iteration improves the total log-likelihood by less than
    ``tol`` or after ``max_iters`` iterations.
    """
    if not observations:
        raise ValidationError("Baum-Welch needs at least one observation sequence", field="observations")
    if n_states < 1:
        raise ValidationError("n_states must be >= 1", field="n_states", value=n_states)
    if max_iters < 1:
        raise ValidationError("max_iters must be >= 1", field="max_iters", value=max_iters)
    obs = [_as_observations(None, o) for o in observations]
    dims = {o.shape[1] for o in obs}
    if len(dims) != 1:
        raise ValidationError("observation sequences differ in dimension", field="observations")
    if any(o.shape[0] < 2 for o in obs):
        raise ValidationError("every observation sequence needs length >= 2", field="observations")

    params = _initial_params(obs, n_states, seed)
    history: list[float] = []
    for it in range(max_iters):
        passes = [_forward_backward(params, x) for x in obs]
        ll = float(sum(fb.log_likelihood for fb in passes))
        history.append(ll)
        log_event(logger, "baum_welch_iteration", level=logging.DEBUG, iteration=it, log_likelihood=ll)
        if it > 0 and ll - history[-2] < tol:
            break
        params = _m_step(params, passes, obs)
    log_event(logger, "baum_welch_done", iterations=len(history), log_likelihood=history[-1], n_states=n_states)
    return params, history


def fit_baum_welch(
    observations: Sequence[np.ndarray],
    n_states: int = 2,
    seed: int = 0,
    max_iters: int = 100,
    tol: float = 1e-4,
) -> HmmParams:
    params, _ = fit_baum_welch_trace(observations, n_states, seed, max_iters, tol)
    return params


def fit(observations: Sequence[np.ndarray], config: HmmTrainConfig) -> tuple[HmmParams, list[float]]:
    return fit_baum_welch_trace(observations, config.n_states, config.seed, config.max_iters, config.tol)
