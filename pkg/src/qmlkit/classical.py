"""Classical feed-forward nets with a flat-weight interface.

The flat layout is the contract other modules rely on: for each layer in
order, the weight matrix W (fan_out x fan_in) in row-major order, then the
bias vector b. Hidden layers use tanh; the output layer is linear.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "MlpSpec",
    "init_weights",
    "mlp_forward",
    "mlp_loss_and_grad",
    "mlp_vjp",
    "mlp_train",
]


@dataclass(frozen=True)
class MlpSpec:
    """Layer sizes including input and output, e.g. (2, 4, 1)."""

    layer_sizes: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.layer_sizes) < 2:
            raise ValueError("need at least input and output layer sizes")
        if any(s < 1 for s in self.layer_sizes):
            raise ValueError("layer sizes must be positive")

    @property
    def n_weights(self) -> int:
        sizes = self.layer_sizes
        return sum(sizes[i] * sizes[i + 1] + sizes[i + 1]
                   for i in range(len(sizes) - 1))

    def unpack(self, flat: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
        """Split a flat weight vector into per-layer (W, b) views."""
        flat = np.asarray(flat, dtype=float)
        if flat.shape != (self.n_weights,):
            raise ValueError(
                f"expected {self.n_weights} weights, got shape {flat.shape}")
        layers = []
        pos = 0
        sizes = self.layer_sizes
        for i in range(len(sizes) - 1):
            fan_in, fan_out = sizes[i], sizes[i + 1]
            W = flat[pos:pos + fan_in * fan_out].reshape(fan_out, fan_in)
            pos += fan_in * fan_out
            b = flat[pos:pos + fan_out]
            pos += fan_out
            layers.append((W, b))
        return layers


def init_weights(spec: MlpSpec, seed: int, scale: float = 0.5) -> np.ndarray:
    """Seeded normal initialization of the flat weight vector."""
    rng = np.random.default_rng(seed)
    return rng.normal(scale=scale, size=spec.n_weights)


def _forward_tape(spec: MlpSpec, flat: np.ndarray,
                  X: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    layers = spec.unpack(flat)
    a = np.atleast_2d(np.asarray(X, dtype=float))
    if a.shape[1] != spec.layer_sizes[0]:
        raise ValueError(
            f"input dimension {a.shape[1]} != {spec.layer_sizes[0]}")
    activations = [a]
    for i, (W, b) in enumerate(layers):
        z = a @ W.T + b
        a = z if i == len(layers) - 1 else np.tanh(z)
        activations.append(a)
    return a, activations


def mlp_forward(spec: MlpSpec, flat: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Batch forward pass; X of shape (B, in) -> output of shape (B, out)."""
    out, _ = _forward_tape(spec, flat, X)
    return out


def _backprop(spec: MlpSpec, flat: np.ndarray, activations: list[np.ndarray],
              delta: np.ndarray) -> np.ndarray:
    """Flat-weight gradient given d(objective)/d(output) as delta."""
    layers = spec.unpack(flat)
    grad = np.zeros(spec.n_weights)
    pos = spec.n_weights
    for i in range(len(layers) - 1, -1, -1):
        W, _ = layers[i]
        a_prev = activations[i]
        gW = delta.T @ a_prev
        gb = delta.sum(axis=0)
        fan_in, fan_out = W.shape[1], W.shape[0]
        pos -= fan_out
        grad[pos:pos + fan_out] = gb
        pos -= fan_in * fan_out
        grad[pos:pos + fan_in * fan_out] = gW.ravel()
        if i > 0:
            # through tanh of the previous hidden layer
            delta = (delta @ W) * (1.0 - a_prev ** 2)
    return grad


def mlp_loss_and_grad(spec: MlpSpec, flat: np.ndarray, X: np.ndarray,
                      y: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared error over the batch and its gradient w.r.t. flat weights."""
    out, activations = _forward_tape(spec, flat, X)
    target = np.asarray(y, dtype=float).reshape(out.shape)
    resid = out - target
    loss = float(np.mean(resid ** 2))
    # d(mean of all squared entries)/d(out)
    return loss, _backprop(spec, flat, activations, 2.0 * resid / resid.size)


def mlp_vjp(spec: MlpSpec, flat: np.ndarray, X: np.ndarray,
            U: np.ndarray) -> np.ndarray:
    """Gradient of sum_b U[b].mlp(X[b]) w.r.t. the flat weights.

    U must match the output shape (B, out). This is the building block for
    losses that are not plain MSE on the net's output.
    """
    out, activations = _forward_tape(spec, flat, X)
    U = np.asarray(U, dtype=float)
    if U.shape != out.shape:
        raise ValueError(f"U shape {U.shape} != output shape {out.shape}")
    return _backprop(spec, flat, activations, U)


def mlp_train(spec: MlpSpec, X: np.ndarray, y: np.ndarray, epochs: int,
              lr: float, seed: int) -> tuple[np.ndarray, list[float]]:
    """Full-batch gradient descent; returns (weights, per-epoch losses)."""
    if epochs < 0:
        raise ValueError("epochs must be >= 0")
    flat = init_weights(spec, seed)
    losses = []
    for _ in range(epochs):
        loss, grad = mlp_loss_and_grad(spec, flat, X, y)
        losses.append(loss)
        flat = flat - lr * grad
    return flat, losses
