"""Differentiable architecture search over a candidate-circuit ensemble.

The ensemble output is a softmax-weighted sum of the candidates' outputs;
the structural logits and every candidate's rotation angles train jointly by
gradient descent. Logits pass through softmax rather than being free mixing
reals: an unconstrained weighted sum could shrink the loss by rescaling,
while a probability vector keeps argmax selection meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..autodiff import Adam, batched_value_and_jacobian
from ..circuit import ParamCircuit, run

__all__ = ["StructuralWeights", "softmax_weights", "diffqas_forward",
           "diffqas_loss_and_grads", "diffqas_train"]


@dataclass(frozen=True)
class StructuralWeights:
    """One logit per candidate circuit."""

    logits: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "logits",
                           np.asarray(self.logits, dtype=np.float64))
        if self.logits.ndim != 1 or self.logits.size < 1:
            raise ValueError("logits must be a non-empty vector")

    @property
    def weights(self) -> np.ndarray:
        return softmax_weights(self.logits)


def softmax_weights(logits) -> np.ndarray:
    logits = np.asarray(logits, dtype=np.float64)
    shifted = np.exp(logits - logits.max())
    return shifted / shifted.sum()


def _check_ensemble(candidates, thetas, sw: StructuralWeights) -> int:
    if not candidates:
        raise ValueError("need at least one candidate circuit")
    if len(thetas) != len(candidates) or sw.logits.size != len(candidates):
        raise ValueError(f"{len(candidates)} candidates need as many thetas "
                         f"and logits, got {len(thetas)} and {sw.logits.size}")
    n_out = candidates[0].n_outputs
    for j, circuit in enumerate(candidates):
        if circuit.n_outputs != n_out:
            raise ValueError(f"candidate {j} has {circuit.n_outputs} outputs, "
                             f"expected {n_out}")
    return n_out


def diffqas_forward(candidates: list[ParamCircuit], x, thetas,
                    sw: StructuralWeights) -> np.ndarray:
    """Ensemble output: sum_j softmax(logits)_j * candidate_j(x; theta_j)."""
    _check_ensemble(candidates, thetas, sw)
    w = sw.weights
    outs = np.stack([run(c, x, th) for c, th in zip(candidates, thetas)])
    return np.tensordot(w, outs, axes=1)


def diffqas_loss_and_grads(candidates: list[ParamCircuit], X, y, thetas,
                           sw: StructuralWeights):
    """Batch MSE of the ensemble and gradients for (logits, each theta).

    Candidate partials go through the shift rule; the logits gradient is the
    analytic softmax chain rule d w / d logits = diag(w) - w w^T applied to
    the per-candidate output sensitivities.
    """
    _check_ensemble(candidates, thetas, sw)
    w = sw.weights
    vals, jacs = [], []
    for circuit, theta in zip(candidates, thetas):
        v, j = batched_value_and_jacobian(circuit, X, theta)
        vals.append(v)
        jacs.append(j)
    pred = sum(w[j] * vals[j] for j in range(len(candidates)))
    target = np.asarray(y, dtype=np.float64).reshape(pred.shape)
    resid = pred - target
    loss = float(np.mean(resid ** 2))
    dpred = 2.0 * resid / resid.size
    dthetas = [w[j] * np.einsum("bk,bkp->p", dpred, jacs[j])
               for j in range(len(candidates))]
    g_w = np.array([float(np.sum(dpred * vals[j]))
                    for j in range(len(candidates))])
    dlogits = w * (g_w - float(w @ g_w))
    return loss, dlogits, dthetas


def diffqas_train(candidates: list[ParamCircuit], X, y, epochs: int,
                  lr: float = 0.05, seed: int = 0
                  ) -> tuple[StructuralWeights, list[np.ndarray], int,
                             list[float]]:
    """Joint Adam descent on (logits, all candidate angles).

    Starts from equal logits and per-candidate seeded angles; returns the
    final weights, angles, the argmax candidate index, and the loss curve.
    """
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    n = len(candidates)
    sw = StructuralWeights(np.zeros(n))
    streams = [np.random.default_rng(s)
               for s in np.random.SeedSequence(seed).spawn(n)]
    thetas = [stream.uniform(-np.pi, np.pi, size=c.n_params)
              for stream, c in zip(streams, candidates)]
    sizes = [t.size for t in thetas]
    adam = Adam(lr=lr)
    losses = []
    for _ in range(epochs):
        loss, dlogits, dthetas = diffqas_loss_and_grads(
            candidates, X, y, thetas, sw)
        losses.append(loss)
        flat = np.concatenate([sw.logits] + thetas)
        grad = np.concatenate([dlogits] + dthetas)
        flat = adam.step(flat, grad)
        sw = StructuralWeights(flat[:n])
        offset = n
        thetas = []
        for size in sizes:
            thetas.append(flat[offset:offset + size])
            offset += size
    return sw, thetas, int(np.argmax(sw.logits)), losses
