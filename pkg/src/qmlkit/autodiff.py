"""Analytic gradients for circuit expectations, plus first-order optimizers.

Rotation-angle derivatives use the two-point shift rule with shift pi/2,
which is exact for RX/RY/RZ generators. When one slot feeds several gates
the rule is applied per gate occurrence and summed, which again gives the
exact derivative. A central finite difference is provided as the
independent check.

All shifted evaluations of one gradient are packed into a single batched
simulation, so a full Jacobian costs one pass over the gate list.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import INPUT, VAR, ParamCircuit, measure_batch, op_angles, \
    run_batch, simulate_from_op_angles
from .statevec import ObservableSpec

_SHIFT = np.pi / 2.0


def _slot_columns(circuit: ParamCircuit, kind: str) -> list[tuple[int, int]]:
    """(angle column, slot index) for every op bound to the given slot kind.

    Columns are indexed over parameterized ops only, matching the layout of
    ``op_angles``.
    """
    pairs = []
    col = 0
    for op in circuit.ops:
        if op.param is None:
            continue
        if op.param.kind == kind:
            pairs.append((col, op.param.index))
        col += 1
    return pairs


def _shift_rule_jacobian(circuit: ParamCircuit, base: np.ndarray,
                         pairs: list[tuple[int, int]], n_slots: int,
                         observables) -> np.ndarray:
    """Jacobian (n_obs, n_slots) of the expectations at one base angle row."""
    n_obs = len(circuit.observables if observables is None else observables)
    jac = np.zeros((n_obs, n_slots))
    if not pairs:
        return jac
    rows = np.repeat(base, 2 * len(pairs), axis=0)
    for i, (col, _) in enumerate(pairs):
        rows[2 * i, col] += _SHIFT
        rows[2 * i + 1, col] -= _SHIFT
    outs = measure_batch(circuit, simulate_from_op_angles(circuit, rows),
                         observables)
    for i, (_, slot) in enumerate(pairs):
        jac[:, slot] += 0.5 * (outs[2 * i] - outs[2 * i + 1])
    return jac


def param_shift_jacobian(circuit: ParamCircuit, x, theta, observables=None,
                         wrt: str = VAR) -> np.ndarray:
    """Exact Jacobian of circuit outputs w.r.t. variational slots
    (``wrt="var"``) or input slots (``wrt="input"``)."""
    if wrt not in (VAR, INPUT):
        raise ValueError(f"wrt must be 'var' or 'input', got {wrt!r}")
    base = op_angles(circuit, x, theta)
    if base.shape[0] != 1:
        raise ValueError("param_shift_jacobian takes a single (x, theta) point")
    n_slots = circuit.n_params if wrt == VAR else circuit.input_dim
    return _shift_rule_jacobian(circuit, base, _slot_columns(circuit, wrt),
                                n_slots, observables)


def value_and_jacobians(circuit: ParamCircuit, x, theta, observables=None,
                        inputs: bool = False):
    """One batched pass returning (values, var Jacobian[, input Jacobian]).

    Values have shape (n_obs,); Jacobians (n_obs, n_slots).
    """
    base = op_angles(circuit, x, theta)
    var_pairs = _slot_columns(circuit, VAR)
    in_pairs = _slot_columns(circuit, INPUT) if inputs else []
    pairs = var_pairs + in_pairs
    rows = np.repeat(base, 1 + 2 * len(pairs), axis=0)
    for i, (col, _) in enumerate(pairs):
        rows[1 + 2 * i, col] += _SHIFT
        rows[2 + 2 * i, col] -= _SHIFT
    outs = measure_batch(circuit, simulate_from_op_angles(circuit, rows),
                         observables)
    n_obs = outs.shape[1]
    value = outs[0]
    jac_var = np.zeros((n_obs, circuit.n_params))
    for i, (_, slot) in enumerate(var_pairs):
        jac_var[:, slot] += 0.5 * (outs[1 + 2 * i] - outs[2 + 2 * i])
    if not inputs:
        return value, jac_var
    jac_in = np.zeros((n_obs, circuit.input_dim))
    offset = len(var_pairs)
    for i, (_, slot) in enumerate(in_pairs):
        jac_in[:, slot] += 0.5 * (outs[1 + 2 * (offset + i)]
                                  - outs[2 + 2 * (offset + i)])
    return value, jac_var, jac_in


def batched_value_and_jacobian(circuit: ParamCircuit, X, theta,
                               observables=None, inputs: bool = False):
    """Per-row values and var-slot Jacobians for a whole input batch.

    Returns (values, jac_var) with shapes (B, n_obs) and
    (B, n_obs, n_params); with ``inputs=True`` additionally the input-slot
    Jacobian of shape (B, n_obs, input_dim). One simulation pass total.
    """
    base = op_angles(circuit, X, theta)
    batch = base.shape[0]
    var_pairs = _slot_columns(circuit, VAR)
    in_pairs = _slot_columns(circuit, INPUT) if inputs else []
    pairs = var_pairs + in_pairs
    stride = 1 + 2 * len(pairs)
    rows = np.repeat(base, stride, axis=0)
    for i, (col, _) in enumerate(pairs):
        rows[1 + 2 * i::stride, col] += _SHIFT
        rows[2 + 2 * i::stride, col] -= _SHIFT
    outs = measure_batch(circuit, simulate_from_op_angles(circuit, rows),
                         observables)
    outs = outs.reshape(batch, stride, outs.shape[1])
    values = outs[:, 0, :]
    jac_var = np.zeros((batch, outs.shape[2], circuit.n_params))
    for i, (_, slot) in enumerate(var_pairs):
        jac_var[:, :, slot] += 0.5 * (outs[:, 1 + 2 * i, :]
                                      - outs[:, 2 + 2 * i, :])
    if not inputs:
        return values, jac_var
    jac_in = np.zeros((batch, outs.shape[2], circuit.input_dim))
    offset = len(var_pairs)
    for i, (_, slot) in enumerate(in_pairs):
        jac_in[:, :, slot] += 0.5 * (outs[:, 1 + 2 * (offset + i), :]
                                     - outs[:, 2 + 2 * (offset + i), :])
    return values, jac_var, jac_in


def probability_jacobian(circuit: ParamCircuit, x, theta,
                         first_m: int | None = None):
    """Basis probabilities and their var-slot Jacobian by the shift rule.

    Probabilities are projector expectations, so the two-point rule applies
    unchanged. Returns (p, jac) with shapes (M,) and (M, n_params) where
    M = first_m or the full 2^n. One simulation pass.
    """
    base = op_angles(circuit, x, theta)
    if base.shape[0] != 1:
        raise ValueError("probability_jacobian takes a single (x, theta) point")
    pairs = _slot_columns(circuit, VAR)
    rows = np.repeat(base, 1 + 2 * len(pairs), axis=0)
    for i, (col, _) in enumerate(pairs):
        rows[1 + 2 * i, col] += _SHIFT
        rows[2 + 2 * i, col] -= _SHIFT
    probs = np.abs(simulate_from_op_angles(circuit, rows)) ** 2
    m = probs.shape[1] if first_m is None else first_m
    p = probs[0, :m]
    jac = np.zeros((m, circuit.n_params))
    for i, (_, slot) in enumerate(pairs):
        jac[:, slot] += 0.5 * (probs[1 + 2 * i, :m] - probs[2 + 2 * i, :m])
    return p, jac


def param_shift_grad(circuit: ParamCircuit, x, theta, obs: ObservableSpec,
                     slot: int) -> float:
    """d<obs>/d(theta[slot]) by the shift rule: for a slot feeding a single
    rotation this is (f(theta_k + pi/2) - f(theta_k - pi/2)) / 2."""
    if slot < 0 or slot >= circuit.n_params:
        raise ValueError(f"slot {slot} out of range (n_params={circuit.n_params})")
    jac = param_shift_jacobian(circuit, x, theta, observables=(obs,))
    return float(jac[0, slot])


def finite_diff_grad(circuit: ParamCircuit, x, theta, obs: ObservableSpec,
                     slot: int, h: float = 1e-5) -> float:
    """Central finite difference in theta[slot]; the independent gradient
    oracle."""
    if h <= 0:
        raise ValueError(f"h must be > 0, got {h}")
    theta = np.zeros(circuit.n_params) if theta is None else \
        np.asarray(theta, dtype=np.float64)
    plus, minus = theta.copy(), theta.copy()
    plus[slot] += h
    minus[slot] -= h
    outs = run_batch(circuit, x, np.stack([plus, minus]), observables=(obs,))
    return float((outs[0, 0] - outs[1, 0]) / (2.0 * h))


# --- optimizers ---------------------------------------------------------------


def sgd_step(theta: np.ndarray, grad: np.ndarray, lr: float) -> np.ndarray:
    """Plain gradient descent step ``theta - lr * grad``."""
    theta = np.asarray(theta, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if theta.shape != grad.shape:
        raise ValueError(f"shape mismatch: {theta.shape} vs {grad.shape}")
    if lr < 0:
        raise ValueError(f"lr must be >= 0, got {lr}")
    return theta - lr * grad


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @staticmethod
    def zeros(n: int) -> "AdamState":
        return AdamState(np.zeros(n), np.zeros(n))


def adam_step(state: AdamState, theta: np.ndarray, grad: np.ndarray,
              lr: float = 0.001, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> tuple[AdamState, np.ndarray]:
    """Adam update with bias correction; returns (new state, new theta)."""
    theta = np.asarray(theta, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if theta.shape != grad.shape or theta.shape != state.m.shape:
        raise ValueError(
            f"shape mismatch: theta {theta.shape}, grad {grad.shape}, "
            f"state {state.m.shape}")
    if lr < 0:
        raise ValueError(f"lr must be >= 0, got {lr}")
    t = state.t + 1
    m = beta1 * state.m + (1 - beta1) * grad
    v = beta2 * state.v + (1 - beta2) * grad * grad
    m_hat = m / (1 - beta1 ** t)
    v_hat = v / (1 - beta2 ** t)
    return AdamState(m, v, t), theta - lr * m_hat / (np.sqrt(v_hat) + eps)


@dataclass
class Adam:
    """Stateful convenience wrapper around ``adam_step``."""

    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    state: AdamState | None = None

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        if self.state is None:
            self.state = AdamState.zeros(np.asarray(theta).size)
        self.state, new_theta = adam_step(self.state, theta, grad, self.lr,
                                          self.beta1, self.beta2, self.eps)
        return new_theta
