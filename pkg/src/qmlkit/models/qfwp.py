"""Quantum fast weight programmer.

A classical slow network reads each observation and emits an additive update
for the fast VQC's angles; the fast model then processes the same observation
with its freshly updated parameters (update-then-forward). Across an episode
the fast angles are therefore

    theta_t = theta_0 + sum_{s<=t} slow(o_s)

and training touches only the slow network: the episode gradient combines
shift-rule Jacobians of the fast circuit at every step with suffix sums over
time, then backpropagates through the slow net.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..autodiff import Adam, value_and_jacobians
from ..classical import MlpSpec, init_weights, mlp_forward, mlp_vjp
from .vqc import VqcModel, vqc_forward, vqc_init

__all__ = ["QfwpModel", "qfwp_init", "qfwp_step", "qfwp_episode",
           "qfwp_episode_grad", "train_qfwp"]


@dataclass(frozen=True)
class QfwpModel:
    """Slow programmer (one hidden tanh layer) and fast VQC."""

    slow_spec: MlpSpec
    slow_weights: np.ndarray
    fast: VqcModel

    def __post_init__(self) -> None:
        object.__setattr__(self, "slow_weights",
                           np.asarray(self.slow_weights, dtype=np.float64))
        if self.slow_weights.shape != (self.slow_spec.n_weights,):
            raise ValueError(
                f"slow_weights shape {self.slow_weights.shape} != "
                f"({self.slow_spec.n_weights},)")
        if len(self.slow_spec.layer_sizes) != 3:
            raise ValueError("slow net must have exactly one hidden layer")
        if self.slow_spec.layer_sizes[0] != self.fast.circuit.input_dim:
            raise ValueError("slow net input dim != fast circuit input dim")
        if self.slow_spec.layer_sizes[-1] != self.fast.circuit.n_params:
            raise ValueError(
                f"slow net emits {self.slow_spec.layer_sizes[-1]} values, "
                f"fast circuit has {self.fast.circuit.n_params} angle slots")


def qfwp_init(fast: VqcModel, slow_hidden: int, seed: int,
              weight_scale: float = 0.1) -> QfwpModel:
    """Slow net observation -> hidden(tanh) -> delta-theta, seeded."""
    spec = MlpSpec((fast.circuit.input_dim, slow_hidden,
                    fast.circuit.n_params))
    rng = np.random.default_rng(seed)
    return QfwpModel(spec, rng.normal(scale=weight_scale, size=spec.n_weights),
                     fast)


def slow_delta(model: QfwpModel, observation) -> np.ndarray:
    """The additive angle update the slow net programs for one observation."""
    obs = np.asarray(observation, dtype=np.float64).reshape(1, -1)
    return mlp_forward(model.slow_spec, model.slow_weights, obs)[0]


def qfwp_step(model: QfwpModel, observation) -> tuple[np.ndarray, QfwpModel]:
    """Update-then-forward: returns (fast output, model with updated angles)."""
    delta = slow_delta(model, observation)
    fast = replace(model.fast, theta=model.fast.theta + delta)
    out = vqc_forward(fast, observation)
    return out, replace(model, fast=fast)


def qfwp_episode(model: QfwpModel, observations) -> tuple[np.ndarray, QfwpModel]:
    """Run qfwp_step over a whole episode; outputs stacked (T, n_outputs)."""
    observations = np.atleast_2d(np.asarray(observations, dtype=np.float64))
    outs = []
    for obs in observations:
        out, model = qfwp_step(model, obs)
        outs.append(out)
    return np.stack(outs), model


def qfwp_episode_grad(model: QfwpModel, observations,
                      targets) -> tuple[float, np.ndarray]:
    """Summed squared episode error and its gradient w.r.t. slow weights only.

    Loss = sum_t |fast(o_t; theta_t) - y_t|^2 with theta_t accumulated by the
    slow net. The fast baseline theta_0 and readout receive no gradient; the
    chain rule runs through the angle updates alone.
    """
    observations = np.atleast_2d(np.asarray(observations, dtype=np.float64))
    targets = np.asarray(targets, dtype=np.float64)
    T = observations.shape[0]
    if T == 0:
        raise ValueError("episode must contain at least one observation")

    deltas = mlp_forward(model.slow_spec, model.slow_weights, observations)
    theta = model.fast.theta
    loss = 0.0
    step_grads = np.empty((T, model.fast.circuit.n_params))
    for t in range(T):
        theta = theta + deltas[t]
        expvals, jac = value_and_jacobians(model.fast.circuit,
                                           observations[t], theta)
        pred = model.fast.output_scale * expvals + model.fast.output_bias
        resid = pred - np.atleast_1d(targets[t])
        loss += float(np.sum(resid ** 2))
        step_grads[t] = np.einsum("k,k,kp->p", 2.0 * resid,
                                  model.fast.output_scale, jac)
    # theta_t depends on every delta_s with s <= t, so each delta_s collects
    # the suffix sum of the per-step angle gradients
    suffix = np.cumsum(step_grads[::-1], axis=0)[::-1]
    grad_slow = mlp_vjp(model.slow_spec, model.slow_weights, observations,
                        suffix)
    return loss, grad_slow


def train_qfwp(model: QfwpModel, episodes, steps: int,
               lr: float = 0.01) -> tuple[QfwpModel, list[float]]:
    """Adam on the slow weights over a list of (observations, targets)
    episodes; returns (model, per-step summed losses)."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    opt = Adam(lr=lr)
    weights = model.slow_weights
    losses = []
    for _ in range(steps):
        total = 0.0
        grad = np.zeros_like(weights)
        for obs, tgt in episodes:
            loss, g = qfwp_episode_grad(replace(model, slow_weights=weights),
                                        obs, tgt)
            total += loss
            grad += g
        losses.append(total)
        weights = opt.step(weights, grad)
    return replace(model, slow_weights=weights), losses
