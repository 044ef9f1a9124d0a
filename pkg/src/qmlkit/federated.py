"""In-process federated averaging over VQC clients.

Each round every client copies the global parameters, trains locally on its
own shard, and the new global model is the weighted average of the returned
parameters. Everything runs in one process; the client interface is a plain
function so a networked transport could replace it without touching the
training code.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import replace
from functools import partial

import numpy as np

from .models import VqcModel, train_vqc, vqc_forward_batch

__all__ = ["fed_avg", "fed_round", "run_federated", "eval_mse"]


def fed_avg(param_vectors, weights=None) -> np.ndarray:
    """Element-wise weighted mean of K parameter vectors.

    weights default to uniform; they must be non-negative and sum to 1
    within 1e-12. Two exactness guarantees beyond plain np.average:
    averaging identical vectors returns that vector bit-for-bit, and the
    result does not depend on client order (each element is an exactly
    rounded sum via math.fsum, so permuting (vector, weight) pairs cannot
    change it).
    """
    vectors = [np.asarray(v, dtype=np.float64) for v in param_vectors]
    if not vectors:
        raise ValueError("need at least one parameter vector")
    shape = vectors[0].shape
    for i, v in enumerate(vectors):
        if v.shape != shape:
            raise ValueError(f"vector {i} has shape {v.shape}, expected {shape}")
    if weights is None:
        weights = np.full(len(vectors), 1.0 / len(vectors))
    else:
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (len(vectors),):
            raise ValueError(f"{len(vectors)} vectors but {weights.shape} weights")
        if np.any(weights < 0):
            raise ValueError("aggregation weights must be non-negative")
        if abs(float(weights.sum()) - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {weights.sum()!r}, expected 1")
    stack = np.stack(vectors)
    if bool(np.all(stack == stack[0])):
        return stack[0].copy()
    products = stack.reshape(len(vectors), -1) * weights[:, np.newaxis]
    out = np.array([math.fsum(col) for col in products.T])
    return out.reshape(shape)


def eval_mse(model: VqcModel, X, y) -> float:
    """Mean squared error of the model on a labelled set."""
    pred = vqc_forward_batch(model, X)
    target = np.asarray(y, dtype=np.float64).reshape(pred.shape)
    return float(np.mean((pred - target) ** 2))


def _local_fit(global_model: VqcModel, epochs: int, lr: float, shard):
    """Train one client from the global parameters; None for an empty shard."""
    X, y = shard
    if np.asarray(X).shape[0] == 0:
        return None
    local, curve = train_vqc(global_model, X, y, steps=epochs, lr=lr)
    return local, curve[-1]


def fed_round(global_model: VqcModel, shards, epochs: int, lr: float,
              weights=None, mapper=map) -> tuple[VqcModel, list[float | None]]:
    """One synchronous round: local training on every shard, then averaging.

    Returns (new global model, per-client final training losses). A client
    with an empty shard is skipped: its loss is None, a warning is issued,
    and the aggregation weights renormalize over the participants. Client
    fits are independent, so `mapper` may be a thread-pool map; it must
    preserve input order.
    """
    if not shards:
        raise ValueError("need at least one client shard")
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    if weights is None:
        weights = np.full(len(shards), 1.0 / len(shards))
    else:
        weights = np.asarray(weights, dtype=np.float64)

    fit = partial(_local_fit, global_model, epochs, lr)
    results = list(mapper(fit, shards))

    locals_, kept_weights = [], []
    losses: list[float | None] = []
    for k, result in enumerate(results):
        if result is None:
            warnings.warn(f"client {k} has an empty shard and was skipped")
            losses.append(None)
            continue
        local, loss = result
        losses.append(loss)
        locals_.append(local)
        kept_weights.append(weights[k])
    if not locals_:
        raise ValueError("every client shard is empty")
    kept = np.asarray(kept_weights)
    kept = kept / kept.sum()
    new_model = replace(
        global_model,
        theta=fed_avg([m.theta for m in locals_], kept),
        output_scale=fed_avg([m.output_scale for m in locals_], kept),
        output_bias=fed_avg([m.output_bias for m in locals_], kept))
    return new_model, losses


def run_federated(global_model: VqcModel, shards, rounds: int, epochs: int,
                  lr: float, eval_set=None, weights=None, mapper=map
                  ) -> tuple[VqcModel, list[dict]]:
    """Full simulation; returns (model, history rows).

    History rows carry round, client, and loss; client -1 rows hold the
    global eval loss when an eval set is given, with round 0 logged before
    any training.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    history = []
    if eval_set is not None:
        history.append({"round": 0, "client": -1,
                        "loss": eval_mse(global_model, *eval_set)})
    for r in range(1, rounds + 1):
        global_model, losses = fed_round(global_model, shards, epochs, lr,
                                         weights, mapper)
        for k, loss in enumerate(losses):
            if loss is not None:
                history.append({"round": r, "client": k, "loss": loss})
        if eval_set is not None:
            history.append({"round": r, "client": -1,
                            "loss": eval_mse(global_model, *eval_set)})
    return global_model, history
