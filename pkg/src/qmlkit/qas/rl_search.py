"""RL-based architecture search: an agent builds a circuit gate by gate.

The builder MDP is episodic: each step appends one operation from a fixed
placement set, the observation is the per-qubit Pauli-Z profile of the
partial circuit on |0...0>, and the only reward is the task metric once the
op budget is reached. A tabular Q-learner over (op count, rounded
observation) keys is enough at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..circuit import GateOp, ParamCircuit, run
from ..rl import epsilon_at, epsilon_greedy
from ..statevec import pauli_z
from .fitness import QasTask, task_metric

__all__ = ["CircuitBuilderEnv", "bell_actions", "builder_observation",
           "qas_env_step", "qas_rl_train"]


@dataclass(frozen=True)
class CircuitBuilderEnv:
    """Gate-placement MDP: fixed action set, op budget, terminal task."""

    n_qubits: int
    actions: tuple[GateOp, ...]
    task: QasTask
    budget: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "actions", tuple(self.actions))
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        if not self.actions:
            raise ValueError("need at least one action")
        if self.budget < 0:
            raise ValueError("budget must be >= 0")
        for i, op in enumerate(self.actions):
            if any(q >= self.n_qubits for q in op.targets):
                raise ValueError(f"action {i} targets a qubit outside "
                                 f"0..{self.n_qubits - 1}")
            if op.param is not None and op.param.kind != "const":
                raise ValueError(f"action {i}: builder gates must be fixed "
                                 "(const angles only)")

    def circuit(self, ops: tuple[GateOp, ...]) -> ParamCircuit:
        return ParamCircuit(
            n_qubits=self.n_qubits, ops=ops,
            observables=tuple(pauli_z(q) for q in range(self.n_qubits)))


def bell_actions() -> tuple[GateOp, ...]:
    """The four-placement set of the Bell builder task."""
    return (GateOp("H", (0,)), GateOp("H", (1,)),
            GateOp("CNOT", (0, 1)), GateOp("CNOT", (1, 0)))


def builder_observation(env: CircuitBuilderEnv,
                        ops: tuple[GateOp, ...]) -> np.ndarray:
    """Per-qubit Z expectations of the partial circuit on |0...0>."""
    return run(env.circuit(ops), None, None)


def qas_env_step(env: CircuitBuilderEnv, ops: tuple[GateOp, ...],
                 action: int) -> tuple[tuple[GateOp, ...], np.ndarray,
                                       float, bool]:
    """Append one action; returns (ops, observation, reward, done).

    Reward is the task metric exactly at termination (op count reaches the
    budget) and zero otherwise. An action index outside the placement set is
    rejected: zero reward, state unchanged, episode continues.
    """
    if len(ops) >= env.budget:
        raise ValueError("episode already at the op budget")
    if not 0 <= action < len(env.actions):
        return ops, builder_observation(env, ops), 0.0, False
    new_ops = ops + (env.actions[action],)
    done = len(new_ops) == env.budget
    reward = task_metric(env.circuit(new_ops), env.task) if done else 0.0
    return new_ops, builder_observation(env, new_ops), reward, done


def _key(step: int, obs: np.ndarray) -> tuple:
    return (step, tuple(np.round(obs, 6)))


def qas_rl_train(env: CircuitBuilderEnv, episodes: int, seed: int,
                 alpha: float = 0.5, gamma: float = 1.0
                 ) -> tuple[ParamCircuit, float, list[float]]:
    """Tabular Q-learning over the builder MDP.

    Returns (best circuit found, its reward, per-episode terminal rewards).
    The Q-table keys on (op count, rounded observation); epsilon anneals
    with the shared schedule. Deterministic per seed.
    """
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    rng = np.random.default_rng(seed)
    n_actions = len(env.actions)
    q: dict[tuple, np.ndarray] = {}
    best_ops: tuple[GateOp, ...] = ()
    best_reward = -np.inf
    curve = []
    for episode in range(episodes):
        eps = epsilon_at(episode, episodes)
        ops: tuple[GateOp, ...] = ()
        obs = builder_observation(env, ops)
        key = _key(0, obs)
        reward = 0.0
        while len(ops) < env.budget:
            qvals = q.setdefault(key, np.zeros(n_actions))
            a = epsilon_greedy(qvals, eps, rng)
            ops, obs, reward, done = qas_env_step(env, ops, a)
            next_key = _key(len(ops), obs)
            if done:
                target = reward
            else:
                target = gamma * float(
                    np.max(q.setdefault(next_key, np.zeros(n_actions))))
            qvals[a] += alpha * (target - qvals[a])
            key = next_key
        if env.budget == 0:
            reward = task_metric(env.circuit(()), env.task)
        curve.append(float(reward))
        if reward > best_reward:
            best_reward, best_ops = float(reward), ops
    return env.circuit(best_ops), best_reward, curve
