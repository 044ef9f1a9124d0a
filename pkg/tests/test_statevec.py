"""Simulator core: gate application, expectations, probabilities, sampling."""

import numpy as np
import pytest

import oracles
from qmlkit.statevec import (
    GATE_NAMES,
    ROTATION_GATES,
    ObservableSpec,
    apply_gate,
    basis_probabilities,
    expectation,
    gate_matrix,
    init_state,
    pauli_z,
    sample_shots,
)

INV_SQRT2 = 1.0 / np.sqrt(2.0)


def random_gate_sequence(rng, n_qubits, depth):
    gates = []
    kinds = sorted(GATE_NAMES)
    for _ in range(depth):
        kind = kinds[rng.integers(len(kinds))]
        if kind == "CNOT":
            if n_qubits < 2:
                kind = "X"
                targets = (0,)
            else:
                c, t = rng.choice(n_qubits, size=2, replace=False)
                targets = (int(c), int(t))
        else:
            targets = (int(rng.integers(n_qubits)),)
        theta = float(rng.uniform(-np.pi, np.pi)) if kind in ROTATION_GATES else None
        gates.append((kind, targets, theta))
    return gates


def random_state(rng, n_qubits):
    state = init_state(n_qubits)
    for kind, targets, theta in random_gate_sequence(rng, n_qubits, 20):
        state = apply_gate(state, kind, targets, theta)
    return state


class TestInitState:
    def test_one_qubit_ground(self):
        np.testing.assert_array_equal(init_state(1).amplitudes, [1, 0])

    def test_two_qubit_ground(self):
        np.testing.assert_array_equal(init_state(2).amplitudes, [1, 0, 0, 0])

    def test_zero_qubits_rejected(self):
        with pytest.raises(ValueError):
            init_state(0)

    def test_above_ceiling_rejected(self):
        with pytest.raises(ValueError):
            init_state(17)

    def test_custom_ceiling(self):
        assert init_state(17, max_qubits=18).n_qubits == 17


class TestApplyGate:
    def test_hadamard_on_zero(self):
        out = apply_gate(init_state(1), "H", [0])
        np.testing.assert_allclose(out.amplitudes, [INV_SQRT2, INV_SQRT2],
                                   atol=1e-12)

    def test_x_flips(self):
        out = apply_gate(init_state(1), "X", [0])
        np.testing.assert_allclose(out.amplitudes, [0, 1], atol=1e-12)

    def test_bell_construction(self):
        state = apply_gate(init_state(2), "H", [0])
        state = apply_gate(state, "CNOT", [0, 1])
        np.testing.assert_allclose(state.amplitudes,
                                   [INV_SQRT2, 0, 0, INV_SQRT2], atol=1e-12)

    def test_rz_phase_on_zero(self):
        theta = 0.7
        out = apply_gate(init_state(1), "RZ", [0], theta)
        np.testing.assert_allclose(out.amplitudes,
                                   [np.exp(-1j * theta / 2), 0], atol=1e-12)

    def test_input_not_mutated(self):
        state = init_state(1)
        apply_gate(state, "X", [0])
        np.testing.assert_array_equal(state.amplitudes, [1, 0])

    def test_out_of_range_target(self):
        with pytest.raises(ValueError):
            apply_gate(init_state(2), "X", [2])

    def test_cnot_duplicate_targets(self):
        with pytest.raises(ValueError):
            apply_gate(init_state(2), "CNOT", [1, 1])

    def test_cnot_wrong_arity(self):
        with pytest.raises(ValueError):
            apply_gate(init_state(2), "CNOT", [0])

    def test_norm_preserved_random_sequences(self):
        rng = np.random.default_rng(7)
        for n_qubits in (1, 3, 6, 12):
            state = init_state(n_qubits)
            for kind, targets, theta in random_gate_sequence(rng, n_qubits, 100):
                state = apply_gate(state, kind, targets, theta)
            assert abs(state.norm() - 1.0) < 1e-9

    def test_gate_then_inverse_restores_state(self):
        rng = np.random.default_rng(3)
        theta = 1.234
        inverse_pairs = [
            ("H", [0], None, "H", [0], None),
            ("X", [1], None, "X", [1], None),
            ("RY", [2], theta, "RY", [2], -theta),
            ("RX", [0], theta, "RX", [0], -theta),
            ("RZ", [1], theta, "RZ", [1], -theta),
            ("CNOT", [0, 2], None, "CNOT", [0, 2], None),
        ]
        state = random_state(rng, 3)
        for k1, t1, a1, k2, t2, a2 in inverse_pairs:
            out = apply_gate(apply_gate(state, k1, t1, a1), k2, t2, a2)
            np.testing.assert_allclose(out.amplitudes, state.amplitudes,
                                       atol=1e-10)

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(11)
        for n_qubits in (1, 2, 4, 6):
            for _ in range(5):
                gates = random_gate_sequence(rng, n_qubits, 25)
                state = init_state(n_qubits)
                for kind, targets, theta in gates:
                    state = apply_gate(state, kind, targets, theta)
                expected = oracles.dense_simulate(n_qubits, gates)
                np.testing.assert_allclose(state.amplitudes, expected,
                                           atol=1e-10)


class TestGateMatrix:
    def test_all_kinds_unitary(self):
        for kind in sorted(GATE_NAMES):
            theta = 0.37 if kind in ROTATION_GATES else None
            mat = gate_matrix(kind, theta)
            np.testing.assert_allclose(mat @ mat.conj().T,
                                       np.eye(mat.shape[0]), atol=1e-12)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            gate_matrix("RQ")


class TestExpectation:
    def test_z_on_ground(self):
        assert expectation(init_state(1), pauli_z(0)) == pytest.approx(1.0)

    def test_z_on_plus(self):
        state = apply_gate(init_state(1), "H", [0])
        assert expectation(state, pauli_z(0)) == pytest.approx(0.0, abs=1e-12)

    def test_zz_on_bell(self):
        state = apply_gate(apply_gate(init_state(2), "H", [0]), "CNOT", [0, 1])
        assert expectation(state, pauli_z(0, 1)) == pytest.approx(1.0)

    def test_random_pauli_string_matches_dense_oracle(self):
        rng = np.random.default_rng(23)
        n_qubits = 6
        for _ in range(10):
            state = random_state(rng, n_qubits)
            n_factors = int(rng.integers(1, n_qubits + 1))
            qubits = rng.choice(n_qubits, size=n_factors, replace=False)
            factors = tuple(
                (int(q), "XYZ"[rng.integers(3)]) for q in sorted(qubits))
            got = expectation(state, ObservableSpec(factors))
            want = oracles.dense_expectation(state.amplitudes, n_qubits, factors)
            assert abs(got - want) < 1e-9

    def test_bounded_by_one(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            state = random_state(rng, 4)
            factors = tuple((q, "XYZ"[rng.integers(3)]) for q in range(4))
            assert abs(expectation(state, ObservableSpec(factors))) <= 1 + 1e-10

    def test_invalid_qubit_index(self):
        with pytest.raises(ValueError):
            expectation(init_state(2), pauli_z(2))

    def test_duplicate_factor_rejected(self):
        with pytest.raises(ValueError):
            ObservableSpec(((0, "Z"), (0, "X")))


class TestBasisProbabilities:
    def test_ground(self):
        np.testing.assert_array_equal(basis_probabilities(init_state(1)), [1, 0])

    def test_bell(self):
        state = apply_gate(apply_gate(init_state(2), "H", [0]), "CNOT", [0, 1])
        np.testing.assert_allclose(basis_probabilities(state),
                                   [0.5, 0, 0, 0.5], atol=1e-12)

    def test_random_state_modulus_square(self):
        rng = np.random.default_rng(9)
        state = random_state(rng, 5)
        np.testing.assert_allclose(basis_probabilities(state),
                                   np.abs(state.amplitudes) ** 2, atol=1e-12)
        assert abs(basis_probabilities(state).sum() - 1.0) < 1e-10


class TestSampleShots:
    def test_deterministic_outcome(self):
        counts = sample_shots(init_state(3), 50, np.random.default_rng(0))
        assert counts == {"000": 50}

    def test_bell_counts_within_three_sigma(self):
        state = apply_gate(apply_gate(init_state(2), "H", [0]), "CNOT", [0, 1])
        shots = 100_000
        counts = sample_shots(state, shots, np.random.default_rng(42))
        sigma = np.sqrt(0.25 * shots)
        assert set(counts) == {"00", "11"}
        assert abs(counts["00"] - shots / 2) < 3 * sigma
        assert abs(counts["11"] - shots / 2) < 3 * sigma
        assert sum(counts.values()) == shots

    def test_same_seed_same_counts(self):
        rng = np.random.default_rng(123)
        state = random_state(rng, 3)
        c1 = sample_shots(state, 1000, np.random.default_rng(7))
        c2 = sample_shots(state, 1000, np.random.default_rng(7))
        assert c1 == c2

    def test_zero_shots_rejected(self):
        with pytest.raises(ValueError):
            sample_shots(init_state(1), 0, np.random.default_rng(0))
