"""MLP backprop against finite differences; datasets sanity."""

import numpy as np
import pytest

from qmlkit.classical import (
    MlpSpec,
    init_weights,
    mlp_forward,
    mlp_loss_and_grad,
    mlp_train,
)
from qmlkit.datasets import make_blobs, make_damped_sine, make_xor, sliding_windows


class TestMlpSpec:
    def test_weight_counts(self):
        assert MlpSpec((2, 4, 1)).n_weights == 17
        assert MlpSpec((2, 2, 1)).n_weights == 9
        assert MlpSpec((3, 5)).n_weights == 20

    def test_unpack_round_trip(self):
        spec = MlpSpec((2, 3, 1))
        flat = np.arange(spec.n_weights, dtype=float)
        layers = spec.unpack(flat)
        rebuilt = np.concatenate(
            [np.concatenate([W.ravel(), b]) for W, b in layers])
        np.testing.assert_array_equal(rebuilt, flat)

    def test_bad_sizes(self):
        with pytest.raises(ValueError):
            MlpSpec((2,))
        with pytest.raises(ValueError):
            MlpSpec((2, 0, 1))
        with pytest.raises(ValueError):
            MlpSpec((2, 3, 1)).unpack(np.zeros(5))


class TestForwardAndGrad:
    def test_linear_net_is_affine(self):
        spec = MlpSpec((2, 1))
        flat = np.array([2.0, -1.0, 0.5])  # W=[[2,-1]], b=[0.5]
        out = mlp_forward(spec, flat, np.array([[1.0, 1.0], [0.0, 2.0]]))
        np.testing.assert_allclose(out, [[1.5], [-1.5]])

    def test_grad_matches_finite_difference(self):
        rng = np.random.default_rng(11)
        spec = MlpSpec((3, 4, 2))
        flat = init_weights(spec, seed=0)
        X = rng.normal(size=(6, 3))
        y = rng.normal(size=(6, 2))
        _, grad = mlp_loss_and_grad(spec, flat, X, y)
        h = 1e-6
        for k in range(spec.n_weights):
            wp, wm = flat.copy(), flat.copy()
            wp[k] += h
            wm[k] -= h
            lp, _ = mlp_loss_and_grad(spec, wp, X, y)
            lm, _ = mlp_loss_and_grad(spec, wm, X, y)
            assert grad[k] == pytest.approx((lp - lm) / (2 * h), abs=1e-6)

    def test_zero_residual_zero_grad(self):
        spec = MlpSpec((2, 2, 1))
        flat = init_weights(spec, seed=3)
        X = np.array([[0.2, -0.4]])
        y = mlp_forward(spec, flat, X)
        loss, grad = mlp_loss_and_grad(spec, flat, X, y)
        assert loss == 0.0
        np.testing.assert_allclose(grad, 0.0, atol=1e-15)

    def test_xor_direct_training(self):
        # representability check used by the weight-compression task
        X, y = make_xor()
        spec = MlpSpec((2, 4, 1))
        for seed in (0, 1, 2):
            _, losses = mlp_train(spec, X, y, epochs=3000, lr=0.1, seed=seed)
            if losses[-1] < 0.01:
                break
        assert losses[-1] < 0.01

    def test_train_zero_epochs(self):
        spec = MlpSpec((2, 2, 1))
        X, y = make_xor()
        flat, losses = mlp_train(spec, X, y, epochs=0, lr=0.1, seed=0)
        np.testing.assert_array_equal(flat, init_weights(spec, seed=0))
        assert losses == []


class TestDatasets:
    def test_blobs_separable(self):
        X, y = make_blobs(50, seed=4)
        assert X.shape == (100, 2) and set(np.unique(y)) == {-1.0, 1.0}
        # default geometry is separated by the line x0 + x1 = 0
        assert np.all(np.sign(X.sum(axis=1)) == y)

    def test_xor_labels(self):
        X, y = make_xor()
        np.testing.assert_array_equal(y, -np.sign(X[:, 0] * X[:, 1]))
        X3, y3 = make_xor(n_repeats=3)
        assert X3.shape == (12, 2) and y3.shape == (12,)

    def test_damped_sine_values(self):
        y = make_damped_sine(5, omega=0.5, decay=0.02)
        t = np.arange(5.0)
        np.testing.assert_allclose(y, np.exp(-0.02 * t) * np.sin(0.5 * t))

    def test_sliding_windows(self):
        X, y = sliding_windows(np.array([0.0, 1.0, 2.0, 3.0, 4.0]), window=2)
        np.testing.assert_array_equal(X, [[0, 1], [1, 2], [2, 3]])
        np.testing.assert_array_equal(y, [2, 3, 4])
        with pytest.raises(ValueError):
            sliding_windows(np.zeros(3), window=3)
