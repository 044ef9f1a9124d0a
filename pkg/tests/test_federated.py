"""Federated averaging: exact aggregation laws and end-to-end improvement."""

import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from qmlkit.circuit import build_layered
from qmlkit.datasets import make_blobs
from qmlkit.federated import eval_mse, fed_avg, fed_round, run_federated
from qmlkit.models import train_vqc, vqc_init
from qmlkit.statevec import pauli_z


def small_model(seed=0):
    circuit = build_layered(2, 2, 2, observables=(pauli_z(0),))
    return vqc_init(circuit, seed)


def quarter_shards(X, y, k=4):
    return [(X[i::k], y[i::k]) for i in range(k)]


# fed_avg laws


def test_identity_exact_any_k():
    rng = np.random.default_rng(0)
    theta = rng.normal(size=17)
    for k in (1, 2, 3, 5, 7):
        out = fed_avg([theta] * k)
        assert np.array_equal(out, theta)


def test_identity_exact_nonuniform_weights():
    theta = np.random.default_rng(1).normal(size=9)
    out = fed_avg([theta, theta, theta], weights=[0.2, 0.5, 0.3])
    assert np.array_equal(out, theta)


def test_permutation_equivariant_exact():
    rng = np.random.default_rng(2)
    vectors = [rng.normal(size=11) for _ in range(5)]
    raw = rng.random(5)
    weights = raw / raw.sum()
    base = fed_avg(vectors, weights)
    for seed in range(10):
        perm = np.random.default_rng(seed).permutation(5)
        permuted = fed_avg([vectors[i] for i in perm], weights[perm])
        assert np.array_equal(permuted, base)


def test_uniform_mean_of_zero_and_one():
    out = fed_avg([np.zeros(4), np.ones(4)])
    assert np.array_equal(out, np.full(4, 0.5))


def test_degenerate_weights_pick_first():
    a, b = np.array([1.0, -2.0, 3.0]), np.array([9.0, 9.0, 9.0])
    assert np.array_equal(fed_avg([a, b], weights=[1.0, 0.0]), a)


def test_weighted_mean_matches_direct_formula():
    rng = np.random.default_rng(3)
    vectors = [rng.normal(size=6) for _ in range(4)]
    raw = rng.random(4)
    weights = raw / raw.sum()
    expected = sum(w * v for w, v in zip(weights, vectors))
    assert np.allclose(fed_avg(vectors, weights), expected, atol=1e-14)


def test_fed_avg_validation():
    with pytest.raises(ValueError):
        fed_avg([])
    with pytest.raises(ValueError):
        fed_avg([np.zeros(3), np.zeros(4)])
    with pytest.raises(ValueError):
        fed_avg([np.zeros(3), np.zeros(3)], weights=[0.5])
    with pytest.raises(ValueError):
        fed_avg([np.zeros(3), np.zeros(3)], weights=[-0.1, 1.1])
    with pytest.raises(ValueError):
        fed_avg([np.zeros(3), np.zeros(3)], weights=[0.6, 0.6])


# fed_round


def test_single_client_equals_local_training():
    X, y = make_blobs(6, seed=4)
    model = small_model()
    direct, _ = train_vqc(model, X, y, steps=5, lr=0.1)
    fed, losses = fed_round(model, [(X, y)], epochs=5, lr=0.1)
    assert np.array_equal(fed.theta, direct.theta)
    assert np.array_equal(fed.output_scale, direct.output_scale)
    assert np.array_equal(fed.output_bias, direct.output_bias)
    assert len(losses) == 1 and losses[0] is not None


def test_identical_shards_equal_single_client():
    X, y = make_blobs(6, seed=5)
    model = small_model()
    direct, _ = train_vqc(model, X, y, steps=3, lr=0.1)
    fed, _ = fed_round(model, [(X, y)] * 3, epochs=3, lr=0.1)
    assert np.array_equal(fed.theta, direct.theta)


def test_empty_shard_skipped_with_warning():
    X, y = make_blobs(6, seed=6)
    empty = (np.zeros((0, 2)), np.zeros(0))
    model = small_model()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        fed, losses = fed_round(model, [(X, y), empty], epochs=2, lr=0.1)
    assert any("client 1" in str(w.message) for w in caught)
    assert losses[1] is None and losses[0] is not None
    solo, _ = fed_round(model, [(X, y)], epochs=2, lr=0.1)
    assert np.array_equal(fed.theta, solo.theta)


def test_all_shards_empty_is_an_error():
    empty = (np.zeros((0, 2)), np.zeros(0))
    with pytest.raises(ValueError):
        fed_round(small_model(), [empty, empty], epochs=1, lr=0.1)


def test_round_deterministic_and_thread_mapper_agrees():
    X, y = make_blobs(8, seed=7)
    shards = quarter_shards(X, y)
    model = small_model()
    serial_1, _ = fed_round(model, shards, epochs=3, lr=0.1)
    serial_2, _ = fed_round(model, shards, epochs=3, lr=0.1)
    assert np.array_equal(serial_1.theta, serial_2.theta)
    with ThreadPoolExecutor(max_workers=4) as pool:
        threaded, _ = fed_round(model, shards, epochs=3, lr=0.1,
                                mapper=pool.map)
    assert np.array_equal(threaded.theta, serial_1.theta)


# full simulation


def test_disjoint_shards_improve_global_loss():
    X, y = make_blobs(8, seed=8)
    model = small_model(seed=1)

    # separability oracle: direct central training must work first
    direct, curve = train_vqc(model, X, y, steps=40, lr=0.2)
    assert eval_mse(direct, X, y) < 0.5 * curve[0]

    shards = quarter_shards(X, y)
    trained, history = run_federated(model, shards, rounds=10, epochs=4,
                                     lr=0.2, eval_set=(X, y))
    evals = [row["loss"] for row in history if row["client"] == -1]
    assert len(evals) == 11
    assert evals[-1] < evals[0]


def test_history_rows_per_client():
    X, y = make_blobs(4, seed=9)
    shards = quarter_shards(X, y, k=2)
    _, history = run_federated(small_model(), shards, rounds=3, epochs=2,
                               lr=0.1)
    client_rows = [row for row in history if row["client"] >= 0]
    assert len(client_rows) == 6
    assert {row["round"] for row in client_rows} == {1, 2, 3}
