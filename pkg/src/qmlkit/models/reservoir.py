"""QLSTM reservoir: a frozen random cell with a trained affine readout.

The recurrent parameters are drawn once from the seed and never updated;
the public API deliberately offers no gradient path into them. Only the
readout (w, b) is fit, by ridge-regularized least squares on the final
hidden state.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .qlstm import QlstmParams, qlstm_forward, qlstm_init

__all__ = ["ReservoirModel", "reservoir_init", "reservoir_forward",
           "reservoir_features", "train_readout", "reservoir_predict"]


@dataclass(frozen=True)
class ReservoirModel:
    """Frozen QLSTM cell plus affine readout h -> w.h + b."""

    cell: QlstmParams
    w_out: np.ndarray
    b_out: float
    seed: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "w_out",
                           np.asarray(self.w_out, dtype=np.float64))
        if self.w_out.shape != (self.cell.hidden_dim,):
            raise ValueError(
                f"w_out shape {self.w_out.shape} != ({self.cell.hidden_dim},)")


def reservoir_init(hidden_dim: int, input_dim: int, n_qubits: int,
                   n_layers: int, seed: int) -> ReservoirModel:
    """Seeded random cell; readout starts at zero."""
    cell = qlstm_init(hidden_dim, input_dim, n_qubits, n_layers, seed)
    return ReservoirModel(cell, np.zeros(hidden_dim), 0.0, seed)


def reservoir_features(model: ReservoirModel, X_seq) -> np.ndarray:
    """Final hidden state per sequence, shape (B, hidden_dim)."""
    H, _ = qlstm_forward(model.cell, X_seq)
    return H[:, -1, :]


def reservoir_forward(model: ReservoirModel, X_seq) -> np.ndarray:
    """Full hidden trajectory (B, T, hidden_dim); deterministic per seed."""
    H, _ = qlstm_forward(model.cell, X_seq)
    return H


def train_readout(model: ReservoirModel, X_seq, y,
                  ridge: float = 1e-8) -> tuple[ReservoirModel, float]:
    """Fit (w, b) by least squares on reservoir features.

    Returns the updated model and its mean squared error on (X_seq, y).
    The cell is untouched; no gradient w.r.t. cell parameters exists in
    this module.
    """
    h = reservoir_features(model, X_seq)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if len(y) != h.shape[0]:
        raise ValueError(f"{h.shape[0]} sequences but {len(y)} targets")
    design = np.concatenate([h, np.ones((h.shape[0], 1))], axis=1)
    gram = design.T @ design + ridge * np.eye(design.shape[1])
    coef = np.linalg.solve(gram, design.T @ y)
    fitted = replace(model, w_out=coef[:-1], b_out=float(coef[-1]))
    mse = float(np.mean((design @ coef - y) ** 2))
    return fitted, mse


def reservoir_predict(model: ReservoirModel, X_seq) -> np.ndarray:
    """Readout applied to the final hidden state."""
    return reservoir_features(model, X_seq) @ model.w_out + model.b_out
