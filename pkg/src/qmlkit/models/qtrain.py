"""Quantum-train weight compression.

An N-qubit QNN's basis probabilities parameterize the M weights of a
classical network, N = ceil(log2 M), so M weights are steered by the QNN's
angle count plus two rescale scalars instead of M free parameters:

    w_i = s * (2^N * p_i - 1) + b,   i = 0..M-1 in basis order

where p is the probability vector of the QNN state. Training backpropagates
the task loss through the affine map and the shift rule into the angles and
(s, b).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..autodiff import Adam, probability_jacobian
from ..circuit import build_layered, op_angles, simulate_from_op_angles
from ..classical import MlpSpec, mlp_loss_and_grad
from .vqc import VqcModel, vqc_init

__all__ = ["QtCompressor", "required_qubits", "qt_init",
           "qt_generate_weights", "qt_loss_and_grads", "qt_train",
           "classical_reference"]


def required_qubits(m: int) -> int:
    """The weight-count law: N = ceil(log2 M) qubits generate M weights."""
    if m < 1:
        raise ValueError(f"need at least one weight, got {m}")
    return max(0, (m - 1).bit_length())


@dataclass(frozen=True)
class QtCompressor:
    """QNN whose basis probabilities are rescaled into M network weights."""

    qnn: VqcModel
    m: int
    scale: float = 1.0
    shift: float = 0.0

    def __post_init__(self) -> None:
        capacity = 2 ** self.qnn.circuit.n_qubits
        if self.m < 1:
            raise ValueError(f"need at least one weight, got {self.m}")
        if self.m > capacity:
            raise ValueError(
                f"M={self.m} exceeds capacity 2^{self.qnn.circuit.n_qubits}"
                f"={capacity}")
        if self.qnn.circuit.input_dim != 0:
            raise ValueError("the generator QNN takes no data input")


def qt_init(m: int, n_layers: int, seed: int) -> QtCompressor:
    """Compressor over the minimal qubit count for m weights.

    A zero-qubit register cannot be simulated, so m=1 still gets one qubit;
    required_qubits(1) remains 0 per the law.
    """
    n_qubits = max(1, required_qubits(m))
    circuit = build_layered(n_qubits, 0, n_layers)
    return QtCompressor(vqc_init(circuit, seed), m)


def qt_generate_weights(comp: QtCompressor) -> np.ndarray:
    """The M weights in basis order: s * (2^N p_i - 1) + b for i < M."""
    rows = op_angles(comp.qnn.circuit, None, comp.qnn.theta)
    amps = simulate_from_op_angles(comp.qnn.circuit, rows)
    p = np.abs(amps[0, :comp.m]) ** 2
    full = 2 ** comp.qnn.circuit.n_qubits
    return comp.scale * (full * p - 1.0) + comp.shift


def qt_loss_and_grads(comp: QtCompressor, net_spec: MlpSpec, X, y):
    """Task MSE of the generated net and gradients w.r.t. (theta, s, b)."""
    if net_spec.n_weights != comp.m:
        raise ValueError(
            f"net needs {net_spec.n_weights} weights but compressor "
            f"generates {comp.m}")
    p, jac = probability_jacobian(comp.qnn.circuit, None, comp.qnn.theta,
                                  first_m=comp.m)
    full = 2 ** comp.qnn.circuit.n_qubits
    w = comp.scale * (full * p - 1.0) + comp.shift
    loss, dw = mlp_loss_and_grad(net_spec, w, X, y)
    dtheta = comp.scale * full * (dw @ jac)
    dscale = float(dw @ (full * p - 1.0))
    dshift = float(dw.sum())
    return loss, dtheta, dscale, dshift


def qt_train(comp: QtCompressor, net_spec: MlpSpec, X, y, epochs: int,
             lr: float = 0.05) -> tuple[QtCompressor, list[float]]:
    """Adam over (theta, s, b); returns (compressor, per-epoch losses)."""
    if epochs < 0:
        raise ValueError("epochs must be >= 0")
    if net_spec.n_weights != comp.m:
        raise ValueError(
            f"net needs {net_spec.n_weights} weights but compressor "
            f"generates {comp.m}")
    opt = Adam(lr=lr)
    flat = np.concatenate([comp.qnn.theta, [comp.scale, comp.shift]])
    losses = []
    for _ in range(epochs):
        cur = replace(comp, qnn=replace(comp.qnn, theta=flat[:-2]),
                      scale=float(flat[-2]), shift=float(flat[-1]))
        loss, dtheta, dscale, dshift = qt_loss_and_grads(cur, net_spec, X, y)
        losses.append(loss)
        flat = opt.step(flat, np.concatenate([dtheta, [dscale, dshift]]))
    comp = replace(comp, qnn=replace(comp.qnn, theta=flat[:-2]),
                   scale=float(flat[-2]), shift=float(flat[-1]))
    return comp, losses


def classical_reference(net_spec: MlpSpec, X, y, epochs: int, lr: float,
                        seed: int) -> float:
    """Final loss of the same net trained directly; the representability
    check used before judging compression quality."""
    from ..classical import mlp_train
    _, losses = mlp_train(net_spec, X, y, epochs=epochs, lr=lr, seed=seed)
    return losses[-1] if losses else math.inf
