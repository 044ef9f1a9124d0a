"""Quantum-train compression: the weight law, the rescale map, gradients."""

import numpy as np
import pytest

from qmlkit.circuit import ParamCircuit, build_layered
from qmlkit.classical import MlpSpec
from qmlkit.models import (
    QtCompressor,
    VqcModel,
    qt_generate_weights,
    qt_init,
    qt_loss_and_grads,
    qt_train,
    required_qubits,
)


def gateless_compressor(n_qubits, m, scale=1.0, shift=0.0):
    circuit = ParamCircuit(n_qubits, ())
    qnn = VqcModel(circuit, np.zeros(0), np.zeros(0), np.zeros(0))
    return QtCompressor(qnn, m, scale, shift)


class TestWeightLaw:
    def test_examples(self):
        assert required_qubits(4) == 2
        assert required_qubits(7) == 3
        assert required_qubits(1) == 0

    def test_law_up_to_64(self):
        import math
        for m in range(1, 65):
            expected = math.ceil(math.log2(m))
            assert required_qubits(m) == expected
            assert m <= 2 ** required_qubits(m)

    def test_invalid_m(self):
        with pytest.raises(ValueError):
            required_qubits(0)


class TestGenerate:
    def test_identity_circuit(self):
        # p = (1, 0, 0, 0) so w = 2^N p - 1 = (3, -1, -1, -1)
        comp = gateless_compressor(2, 4)
        np.testing.assert_allclose(qt_generate_weights(comp),
                                   [3.0, -1.0, -1.0, -1.0], atol=1e-15)

    def test_uniform_state_all_zero(self):
        # H wall: every p_i = 2^-N, so 2^N p - 1 = 0
        comp = qt_init(8, n_layers=0, seed=0)
        np.testing.assert_allclose(qt_generate_weights(comp), 0.0, atol=1e-10)

    def test_shift_and_scale(self):
        comp = gateless_compressor(2, 4, scale=2.0, shift=-0.5)
        np.testing.assert_allclose(qt_generate_weights(comp),
                                   [5.5, -2.5, -2.5, -2.5], atol=1e-15)

    def test_capacity_error(self):
        with pytest.raises(ValueError):
            gateless_compressor(2, 5)

    def test_truncation_order_stable(self):
        comp_full = qt_init(8, n_layers=1, seed=3)
        w_full = qt_generate_weights(comp_full)
        for m in range(1, 9):
            comp_m = QtCompressor(comp_full.qnn, m, comp_full.scale,
                                  comp_full.shift)
            w_m = qt_generate_weights(comp_m)
            assert w_m.shape == (m,)
            np.testing.assert_array_equal(w_m, w_full[:m])

    def test_minimal_qubits_used(self):
        assert qt_init(17, n_layers=1, seed=0).qnn.circuit.n_qubits == 5
        assert qt_init(1, n_layers=1, seed=0).qnn.circuit.n_qubits == 1


class TestTraining:
    def test_grad_matches_fd_on_2_2_1_net(self):
        from dataclasses import replace
        spec = MlpSpec((2, 2, 1))
        assert spec.n_weights == 9
        comp = qt_init(9, n_layers=1, seed=5)
        assert comp.qnn.circuit.n_qubits == 4
        rng = np.random.default_rng(2)
        X = rng.uniform(-1, 1, (6, 2))
        y = rng.uniform(-1, 1, 6)
        loss, dtheta, dscale, dshift = qt_loss_and_grads(comp, spec, X, y)

        def loss_at(theta, s, b):
            from qmlkit.classical import mlp_loss_and_grad
            c = replace(comp, qnn=replace(comp.qnn, theta=theta),
                        scale=s, shift=b)
            w = qt_generate_weights(c)
            return mlp_loss_and_grad(spec, w, X, y)[0]

        assert loss == pytest.approx(
            loss_at(comp.qnn.theta, comp.scale, comp.shift), abs=1e-12)
        h = 1e-5
        for k in range(comp.qnn.circuit.n_params):
            tp, tm = comp.qnn.theta.copy(), comp.qnn.theta.copy()
            tp[k] += h
            tm[k] -= h
            fd = (loss_at(tp, comp.scale, comp.shift)
                  - loss_at(tm, comp.scale, comp.shift)) / (2 * h)
            assert dtheta[k] == pytest.approx(fd, abs=1e-4)
        fd_s = (loss_at(comp.qnn.theta, comp.scale + h, comp.shift)
                - loss_at(comp.qnn.theta, comp.scale - h, comp.shift)) / (2 * h)
        assert dscale == pytest.approx(fd_s, abs=1e-4)
        fd_b = (loss_at(comp.qnn.theta, comp.scale, comp.shift + h)
                - loss_at(comp.qnn.theta, comp.scale, comp.shift - h)) / (2 * h)
        assert dshift == pytest.approx(fd_b, abs=1e-4)

    def test_zero_epochs_unchanged(self):
        spec = MlpSpec((2, 2, 1))
        comp = qt_init(9, n_layers=1, seed=6)
        out, losses = qt_train(comp, spec, np.zeros((2, 2)), np.zeros(2),
                               epochs=0)
        assert losses == []
        np.testing.assert_array_equal(out.qnn.theta, comp.qnn.theta)
        assert (out.scale, out.shift) == (comp.scale, comp.shift)

    def test_weight_count_mismatch(self):
        comp = qt_init(9, n_layers=1, seed=0)
        with pytest.raises(ValueError):
            qt_loss_and_grads(comp, MlpSpec((2, 4, 1)), np.zeros((1, 2)),
                              np.zeros(1))

    def test_loss_decreases_on_small_task(self):
        spec = MlpSpec((2, 2, 1))
        comp = qt_init(9, n_layers=2, seed=8)
        rng = np.random.default_rng(9)
        X = rng.uniform(-1, 1, (8, 2))
        y = X[:, 0] * 0.5
        _, losses = qt_train(comp, spec, X, y, epochs=50, lr=0.05)
        assert losses[-1] < 0.5 * losses[0]
