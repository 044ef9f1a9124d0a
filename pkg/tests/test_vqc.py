"""VQC model: forward contract, gradients, and a small training run."""

import numpy as np
import pytest

from qmlkit.circuit import ParamCircuit, build_layered, run
from qmlkit.models import (
    VqcModel,
    train_vqc,
    vqc_forward,
    vqc_forward_batch,
    vqc_init,
    vqc_loss_and_grads,
)
from qmlkit.statevec import pauli_z


def empty_model(n_qubits, scale=1.0, bias=0.0):
    obs = tuple(pauli_z(q) for q in range(n_qubits))
    circuit = ParamCircuit(n_qubits, (), observables=obs)
    return VqcModel(circuit, np.zeros(0), np.full(n_qubits, scale),
                    np.full(n_qubits, bias))


class TestForward:
    def test_empty_circuit_all_plus_one(self):
        out = vqc_forward(empty_model(3), None)
        np.testing.assert_array_equal(out, [1.0, 1.0, 1.0])

    def test_zero_scale_gives_bias(self):
        out = vqc_forward(empty_model(2, scale=0.0, bias=0.7), None)
        np.testing.assert_array_equal(out, [0.7, 0.7])

    def test_matches_run_plus_affine(self):
        rng = np.random.default_rng(5)
        circuit = build_layered(4, 4, 2)
        model = VqcModel(circuit, rng.normal(size=circuit.n_params),
                         rng.normal(size=4), rng.normal(size=4))
        x = rng.uniform(-np.pi, np.pi, 4)
        expected = model.output_scale * run(circuit, x, model.theta) \
            + model.output_bias
        np.testing.assert_allclose(vqc_forward(model, x), expected, atol=1e-12)

    def test_batch_matches_single(self):
        rng = np.random.default_rng(9)
        circuit = build_layered(3, 3, 1, observables=(pauli_z(0), pauli_z(2)))
        model = vqc_init(circuit, seed=1)
        X = rng.uniform(-1, 1, (6, 3))
        batch = vqc_forward_batch(model, X)
        assert batch.shape == (6, 2)
        for b in range(6):
            np.testing.assert_allclose(batch[b], vqc_forward(model, X[b]),
                                       atol=1e-12)

    def test_shape_validation(self):
        circuit = build_layered(2, 2, 1)
        with pytest.raises(ValueError):
            VqcModel(circuit, np.zeros(3), np.ones(2), np.zeros(2))
        with pytest.raises(ValueError):
            VqcModel(circuit, np.zeros(circuit.n_params), np.ones(1),
                     np.zeros(2))


class TestTraining:
    def test_loss_grads_match_finite_difference(self):
        rng = np.random.default_rng(3)
        circuit = build_layered(3, 2, 1, observables=(pauli_z(0),))
        model = vqc_init(circuit, seed=4)
        X = rng.uniform(-1, 1, (4, 2))
        y = rng.uniform(-1, 1, 4)
        _, dtheta, dscale, dbias = vqc_loss_and_grads(model, X, y)

        def loss_at(theta, scale, bias):
            m = VqcModel(circuit, theta, scale, bias)
            pred = vqc_forward_batch(m, X)
            return np.mean((pred - y.reshape(-1, 1)) ** 2)

        h = 1e-6
        for k in range(circuit.n_params):
            tp, tm = model.theta.copy(), model.theta.copy()
            tp[k] += h
            tm[k] -= h
            fd = (loss_at(tp, model.output_scale, model.output_bias)
                  - loss_at(tm, model.output_scale, model.output_bias)) / (2 * h)
            assert dtheta[k] == pytest.approx(fd, abs=1e-6)
        fd_s = (loss_at(model.theta, model.output_scale + h, model.output_bias)
                - loss_at(model.theta, model.output_scale - h,
                          model.output_bias)) / (2 * h)
        assert dscale[0] == pytest.approx(fd_s, abs=1e-6)
        fd_b = (loss_at(model.theta, model.output_scale, model.output_bias + h)
                - loss_at(model.theta, model.output_scale,
                          model.output_bias - h)) / (2 * h)
        assert dbias[0] == pytest.approx(fd_b, abs=1e-6)

    def test_training_reduces_loss_on_blobs(self):
        from qmlkit.datasets import make_blobs
        X, y = make_blobs(20, seed=7)
        circuit = build_layered(2, 2, 2, observables=(pauli_z(0),))
        model = vqc_init(circuit, seed=0)
        trained, losses = train_vqc(model, np.arctan(X), y, steps=60, lr=0.2)
        assert losses[-1] < 0.5 * losses[0]
        pred = vqc_forward_batch(trained, np.arctan(X))[:, 0]
        assert np.mean(np.sign(pred) == y) == 1.0

    def test_zero_steps_identity(self):
        circuit = build_layered(2, 2, 1)
        model = vqc_init(circuit, seed=2)
        trained, losses = train_vqc(model, np.zeros((2, 2)), np.zeros((2, 4)),
                                    steps=0, lr=0.1)
        assert losses == []
        np.testing.assert_array_equal(trained.theta, model.theta)
