"""Small synthetic datasets used by the training tasks and the CLI."""

from __future__ import annotations

import numpy as np

__all__ = [
    "make_blobs",
    "make_xor",
    "make_damped_sine",
    "sliding_windows",
]


def make_blobs(n_per_class: int, seed: int, separation: float = 2.0,
               spread: float = 0.3) -> tuple[np.ndarray, np.ndarray]:
    """Two Gaussian blobs with labels -1/+1, linearly separable by default.

    Class -1 is centred at (-separation/2, -separation/2), class +1 at
    (+separation/2, +separation/2). Returns (X, y) with X of shape (2n, 2).
    """
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    rng = np.random.default_rng(seed)
    half = separation / 2.0
    neg = rng.normal(loc=(-half, -half), scale=spread, size=(n_per_class, 2))
    pos = rng.normal(loc=(half, half), scale=spread, size=(n_per_class, 2))
    X = np.concatenate([neg, pos], axis=0)
    y = np.concatenate([-np.ones(n_per_class), np.ones(n_per_class)])
    perm = rng.permutation(len(y))
    return X[perm], y[perm]


def make_xor(n_repeats: int = 1, noise: float = 0.0,
             seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """The four XOR corners (+-1, +-1) with label -sign(x0*x1).

    With n_repeats > 1 the corners are tiled; noise > 0 jitters the inputs.
    """
    if n_repeats < 1:
        raise ValueError("n_repeats must be >= 1")
    corners = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])
    labels = np.array([-1.0, 1.0, 1.0, -1.0])
    X = np.tile(corners, (n_repeats, 1))
    y = np.tile(labels, n_repeats)
    if noise > 0.0:
        rng = np.random.default_rng(seed)
        X = X + rng.normal(scale=noise, size=X.shape)
    return X, y


def make_damped_sine(n_steps: int, omega: float = 0.5, decay: float = 0.02,
                     t0: float = 0.0) -> np.ndarray:
    """Sampled damped sine y_t = exp(-decay*t) * sin(omega*t), t = t0, t0+1, ..."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    t = t0 + np.arange(n_steps, dtype=float)
    return np.exp(-decay * t) * np.sin(omega * t)


def sliding_windows(series: np.ndarray, window: int) -> tuple[np.ndarray, np.ndarray]:
    """Next-step prediction pairs: X[i] = series[i:i+window], y[i] = series[i+window]."""
    series = np.asarray(series, dtype=float)
    if series.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if window < 1 or window >= len(series):
        raise ValueError("window must satisfy 1 <= window < len(series)")
    n = len(series) - window
    X = np.stack([series[i:i + window] for i in range(n)])
    y = series[window:]
    return X, y
