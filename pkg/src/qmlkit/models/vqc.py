"""Variational quantum classifier/regressor: circuit plus affine readout."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..autodiff import batched_value_and_jacobian
from ..circuit import ParamCircuit, build_layered, run, run_batch

__all__ = ["VqcModel", "vqc_init", "vqc_forward", "vqc_forward_batch",
           "vqc_loss_and_grads", "train_vqc"]


@dataclass(frozen=True)
class VqcModel:
    """A parameterized circuit with per-output scale and bias.

    Output k is ``output_scale[k] * <O_k> + output_bias[k]`` where O_k is the
    circuit's k-th observable.
    """

    circuit: ParamCircuit
    theta: np.ndarray
    output_scale: np.ndarray
    output_bias: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta",
                           np.asarray(self.theta, dtype=np.float64))
        object.__setattr__(self, "output_scale",
                           np.asarray(self.output_scale, dtype=np.float64))
        object.__setattr__(self, "output_bias",
                           np.asarray(self.output_bias, dtype=np.float64))
        if self.theta.shape != (self.circuit.n_params,):
            raise ValueError(
                f"theta shape {self.theta.shape} != ({self.circuit.n_params},)")
        n_out = len(self.circuit.observables)
        for name, arr in (("output_scale", self.output_scale),
                          ("output_bias", self.output_bias)):
            if arr.shape != (n_out,):
                raise ValueError(f"{name} shape {arr.shape} != ({n_out},)")

    @property
    def n_outputs(self) -> int:
        return len(self.circuit.observables)


def vqc_init(circuit: ParamCircuit, seed: int, theta_scale: float = 0.1) -> VqcModel:
    """Seeded model with small random angles, scale 1, bias 0."""
    rng = np.random.default_rng(seed)
    n_out = len(circuit.observables)
    return VqcModel(circuit, rng.normal(scale=theta_scale, size=circuit.n_params),
                    np.ones(n_out), np.zeros(n_out))


def vqc_forward(model: VqcModel, x) -> np.ndarray:
    """Output vector for one input."""
    return model.output_scale * run(model.circuit, x, model.theta) \
        + model.output_bias


def vqc_forward_batch(model: VqcModel, X) -> np.ndarray:
    """Outputs for a batch of inputs, shape (B, n_outputs)."""
    return model.output_scale * run_batch(model.circuit, X, model.theta) \
        + model.output_bias


def vqc_loss_and_grads(model: VqcModel, X, y):
    """Mean squared error and gradients w.r.t. (theta, scale, bias).

    y must broadcast to the (B, n_outputs) prediction array. All circuit
    Jacobians come from one batched shift-rule pass.
    """
    expvals, jac = batched_value_and_jacobian(model.circuit, X, model.theta)
    pred = model.output_scale * expvals + model.output_bias
    target = np.asarray(y, dtype=np.float64).reshape(pred.shape)
    resid = pred - target
    loss = float(np.mean(resid ** 2))
    dpred = 2.0 * resid / resid.size
    dtheta = np.einsum("bk,k,bkp->p", dpred, model.output_scale, jac)
    dscale = np.einsum("bk,bk->k", dpred, expvals)
    dbias = dpred.sum(axis=0)
    return loss, dtheta, dscale, dbias


def train_vqc(model: VqcModel, X, y, steps: int, lr: float,
              train_readout: bool = True) -> tuple[VqcModel, list[float]]:
    """Full-batch gradient descent; returns (model, per-step losses)."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    losses = []
    for _ in range(steps):
        loss, dtheta, dscale, dbias = vqc_loss_and_grads(model, X, y)
        losses.append(loss)
        model = replace(
            model,
            theta=model.theta - lr * dtheta,
            output_scale=model.output_scale - lr * dscale if train_readout
            else model.output_scale,
            output_bias=model.output_bias - lr * dbias if train_readout
            else model.output_bias)
    return model, losses


def default_classifier(n_qubits: int, input_dim: int, n_layers: int,
                       seed: int) -> VqcModel:
    """Layered circuit with a single Z observable on qubit 0."""
    from ..statevec import pauli_z
    circuit = build_layered(n_qubits, input_dim, n_layers,
                            observables=(pauli_z(0),))
    return vqc_init(circuit, seed)
