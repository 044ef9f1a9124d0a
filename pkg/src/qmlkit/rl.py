"""Quantum reinforcement learning on a small deterministic gridworld.

The environment is a Frozen-Lake-style grid: the agent walks from a start
cell to a goal cell, falling into holes ends the episode with zero reward,
reaching the goal pays +1. Deep-Q training drives a VQC whose input is the
cell index encoded as a computational basis state: qubit i carries bit
n_qubits-1-i of the index, so the prepared basis state's index equals the
cell index. Q-values for the four actions are read from per-qubit Pauli-Z
expectations through an affine readout. A frozen target copy stabilizes the
bootstrap targets and is refreshed every ``target_period`` updates.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from .autodiff import AdamState, adam_step, batched_value_and_jacobian
from .circuit import Binding, GateOp, ParamCircuit, run, run_batch, \
    variational_layer_ops
from .models import VqcModel
from .statevec import pauli_z

__all__ = [
    "Action",
    "GridEnv",
    "Transition",
    "ReplayBuffer",
    "QAgent",
    "frozen_lake_4x4",
    "encode_discrete_state",
    "qagent_init",
    "q_values",
    "epsilon_greedy",
    "epsilon_at",
    "bellman_grads",
    "dqn_update",
    "greedy_policy",
    "greedy_success",
    "train_qrl",
]

# action indices; moves are (row delta, col delta)
UP, DOWN, LEFT, RIGHT = 0, 1, 2, 3
Action = int
_MOVES = {UP: (-1, 0), DOWN: (1, 0), LEFT: (0, -1), RIGHT: (0, 1)}
N_ACTIONS = 4


@dataclass(frozen=True)
class GridEnv:
    """Rectangular gridworld; cells are indexed row-major from 0."""

    width: int
    height: int
    holes: frozenset[int]
    goal: int
    start: int = 0
    step_limit: int = 100
    slippery: bool = False

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError("grid dimensions must be positive")
        cells = self.width * self.height
        special = {self.start, self.goal} | set(self.holes)
        for cell in special:
            if not 0 <= cell < cells:
                raise ValueError(f"cell {cell} outside 0..{cells - 1}")
        if self.goal == self.start or self.goal in self.holes \
                or self.start in self.holes:
            raise ValueError("start, goal, and holes must be distinct")
        if self.step_limit < 1:
            raise ValueError("step_limit must be >= 1")

    @property
    def n_states(self) -> int:
        return self.width * self.height

    def reset(self) -> int:
        return self.start

    def _move(self, s: int, a: Action) -> int:
        row, col = divmod(s, self.width)
        dr, dc = _MOVES[a]
        nr, nc = row + dr, col + dc
        if 0 <= nr < self.height and 0 <= nc < self.width:
            return nr * self.width + nc
        return s  # bumping the wall keeps the agent in place

    def step(self, s: int, a: Action,
             rng: np.random.Generator | None = None) -> tuple[int, float, bool]:
        """(next state, reward, done). Slippery mode needs an rng and moves
        perpendicular to the chosen direction with probability 1/3 each."""
        if a not in _MOVES:
            raise ValueError(f"unknown action {a}")
        if s in self.holes or s == self.goal:
            raise ValueError(f"stepping from terminal state {s}")
        if self.slippery:
            if rng is None:
                raise ValueError("slippery mode requires an rng")
            perp = {UP: (LEFT, RIGHT), DOWN: (LEFT, RIGHT),
                    LEFT: (UP, DOWN), RIGHT: (UP, DOWN)}[a]
            a = int(rng.choice([a, perp[0], perp[1]]))
        s_next = self._move(s, a)
        if s_next == self.goal:
            return s_next, 1.0, True
        if s_next in self.holes:
            return s_next, 0.0, True
        return s_next, 0.0, False


def frozen_lake_4x4(slippery: bool = False, step_limit: int = 100) -> GridEnv:
    """The canonical 4x4 lake: holes at 5, 7, 11, 12; goal at 15."""
    return GridEnv(width=4, height=4, holes=frozenset({5, 7, 11, 12}),
                   goal=15, start=0, step_limit=step_limit, slippery=slippery)


@dataclass(frozen=True)
class Transition:
    s: int
    a: Action
    r: float
    s_next: int
    done: bool


class ReplayBuffer:
    """Fixed-capacity FIFO transition store."""

    def __init__(self, capacity: int) -> None:
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._items: deque[Transition] = deque(maxlen=capacity)

    def push(self, t: Transition) -> None:
        self._items.append(t)

    def sample(self, batch_size: int, rng: np.random.Generator
               ) -> list[Transition]:
        if not self._items:
            raise ValueError("cannot sample from an empty buffer")
        k = min(batch_size, len(self._items))
        idx = rng.choice(len(self._items), size=k, replace=False)
        return [self._items[int(i)] for i in idx]

    def __len__(self) -> int:
        return len(self._items)


def encode_discrete_state(s: int, n_qubits: int) -> tuple[GateOp, ...]:
    """X-gate prefix preparing basis state |s> on n_qubits.

    Qubit i carries bit n_qubits-1-i of s, so the prepared state's basis
    index equals s exactly.
    """
    if not 0 <= s < 2 ** n_qubits:
        raise ValueError(f"state {s} needs more than {n_qubits} qubits")
    return tuple(GateOp("X", (q,)) for q in range(n_qubits)
                 if (s >> (n_qubits - 1 - q)) & 1)


def state_angles(s: int, n_qubits: int) -> np.ndarray:
    """Angle-encoding form of the basis prefix: pi where the bit is set.

    RX(pi) equals X up to a global phase, so feeding these angles into an
    RX-per-qubit encoding layer prepares the same physical state as
    ``encode_discrete_state`` while letting mixed-state batches share one
    circuit (and therefore one batched simulation pass).
    """
    if not 0 <= s < 2 ** n_qubits:
        raise ValueError(f"state {s} needs more than {n_qubits} qubits")
    bits = [(s >> (n_qubits - 1 - q)) & 1 for q in range(n_qubits)]
    return np.pi * np.array(bits, dtype=np.float64)


@dataclass
class QAgent:
    """Deep-Q agent: live VQC, frozen target copy, and training knobs.

    The model circuit starts with one RX encoding slot per qubit; feeding
    ``state_angles(s, n)`` prepares basis state |s> up to global phase, so
    one circuit serves every state and transition batches simulate in a
    single pass.
    """

    q_model: VqcModel
    target: VqcModel
    gamma: float = 0.95
    target_period: int = 20
    buffer: ReplayBuffer = field(default_factory=lambda: ReplayBuffer(2000))
    n_qubits: int = 4
    update_count: int = 0
    opt_state: AdamState | None = None

    def circuit_for(self, s: int) -> ParamCircuit:
        """Reference form of the state-s circuit: explicit X-gate prefix in
        place of the encoding layer. Same physical state; used by tests to
        cross-check q_values."""
        base = self.q_model.circuit
        return ParamCircuit(
            n_qubits=base.n_qubits,
            ops=encode_discrete_state(s, base.n_qubits)
            + base.ops[base.n_qubits:],
            observables=base.observables,
            input_dim=0, n_params=base.n_params)


def qagent_init(n_qubits: int, n_layers: int, seed: int, gamma: float = 0.95,
                target_period: int = 20, buffer_capacity: int = 2000,
                theta_scale: float = 1.0) -> QAgent:
    """Agent over n_qubits with four distinct Pauli-Z readouts.

    Angles start uniform in [-pi*theta_scale, pi*theta_scale]. The
    full-spread default matters: near zero the circuit is the identity, so
    basis-encoded states read out as structured hard +-1 patterns and
    gradient descent first collapses the readout scale to erase them,
    killing the angle gradients with it. A well-mixed start keeps early
    Q-values small and the readout healthy.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must be in [0, 1], got {gamma}")
    # four distinct readouts: single-qubit Zs first, then ZZ pairs
    candidates = [pauli_z(q) for q in range(n_qubits)]
    candidates += [pauli_z(i, j) for i in range(n_qubits)
                   for j in range(i + 1, n_qubits)]
    if len(candidates) < N_ACTIONS:
        raise ValueError(f"n_qubits={n_qubits} cannot host four distinct "
                         "action readouts; need at least 3")
    obs = tuple(candidates[:N_ACTIONS])
    encoding = [GateOp("RX", (q,), Binding.input_slot(q))
                for q in range(n_qubits)]
    layers, n_params = variational_layer_ops(n_qubits, n_layers)
    circuit = ParamCircuit(n_qubits=n_qubits, ops=tuple(encoding + layers),
                           observables=obs, input_dim=n_qubits,
                           n_params=n_params)
    rng = np.random.default_rng(seed)
    theta = rng.uniform(-np.pi * theta_scale, np.pi * theta_scale,
                        size=n_params)
    model = VqcModel(circuit, theta, np.ones(N_ACTIONS), np.zeros(N_ACTIONS))
    return QAgent(q_model=model, target=model, gamma=gamma,
                  target_period=target_period,
                  buffer=ReplayBuffer(buffer_capacity), n_qubits=n_qubits)


def q_values(agent: QAgent, s: int, model: VqcModel | None = None) -> np.ndarray:
    """Q(s, .) for all four actions under the live (or given) model."""
    model = agent.q_model if model is None else model
    x = state_angles(s, agent.n_qubits)
    return model.output_scale * run(model.circuit, x, model.theta) \
        + model.output_bias


def epsilon_greedy(qvals: np.ndarray, epsilon: float,
                   rng: np.random.Generator) -> Action:
    """Argmax with lowest-index tie-break, or a uniform random action."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    if rng.random() < epsilon:
        return int(rng.integers(len(qvals)))
    return int(np.argmax(qvals))


def epsilon_at(episode: int, episodes: int, start: float = 1.0,
               end: float = 0.05, anneal_frac: float = 0.6) -> float:
    """Linear anneal from start to end over the first anneal_frac of
    episodes, constant afterwards."""
    horizon = max(1, int(episodes * anneal_frac))
    if episode >= horizon:
        return end
    return start + (end - start) * episode / horizon


def bellman_grads(agent: QAgent, batch: list[Transition]
                  ) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Bellman MSE on the batch and its gradients w.r.t. (theta, scale, bias).

    Targets come from the frozen copy: y = r + gamma * max_a Q_target(s', a),
    or y = r on terminal transitions. Angle gradients go through the shift
    rule; the whole batch simulates in one pass.
    """
    if not batch:
        raise ValueError("batch must not be empty")
    model = agent.q_model
    n = agent.n_qubits

    # bootstrap targets: one batched pass over the distinct next states
    targets = np.array([t.r for t in batch])
    live = [i for i, t in enumerate(batch) if not t.done]
    if live and agent.gamma > 0.0:
        distinct = sorted({batch[i].s_next for i in live})
        rows = np.stack([state_angles(s, n) for s in distinct])
        outs = run_batch(agent.target.circuit, rows, agent.target.theta)
        qmax = {s: float(np.max(agent.target.output_scale * outs[j]
                                + agent.target.output_bias))
                for j, s in enumerate(distinct)}
        for i in live:
            targets[i] += agent.gamma * qmax[batch[i].s_next]

    # gradient of the Bellman MSE: one shift-rule pass over the whole batch
    X = np.stack([state_angles(t.s, n) for t in batch])
    expvals, jac = batched_value_and_jacobian(model.circuit, X, model.theta)
    actions = np.array([t.a for t in batch])
    rows_idx = np.arange(len(batch))
    q_sa = model.output_scale[actions] * expvals[rows_idx, actions] \
        + model.output_bias[actions]
    resid = q_sa - targets
    loss = float(np.mean(resid ** 2))
    dq = 2.0 * resid / len(batch)
    d_theta = np.einsum("b,b,bp->p", dq, model.output_scale[actions],
                        jac[rows_idx, actions])
    d_scale = np.zeros_like(model.output_scale)
    d_bias = np.zeros_like(model.output_bias)
    np.add.at(d_scale, actions, dq * expvals[rows_idx, actions])
    np.add.at(d_bias, actions, dq)
    return loss, d_theta, d_scale, d_bias


def dqn_update(agent: QAgent, batch: list[Transition], lr: float) -> QAgent:
    """One Adam step on the batch's Bellman MSE over (theta, scale, bias).

    The optimizer state lives on the agent and spans all three parameter
    groups; every ``target_period`` updates the frozen target copy is
    refreshed. Adam rather than plain descent: the reward is sparse and the
    angle gradients are orders of magnitude smaller than the readout's, so
    unnormalized steps stall.
    """
    _, d_theta, d_scale, d_bias = bellman_grads(agent, batch)
    model = agent.q_model
    n_p = model.theta.size
    flat = np.concatenate([model.theta, model.output_scale,
                           model.output_bias])
    grad = np.concatenate([d_theta, d_scale, d_bias])
    if agent.opt_state is None:
        agent.opt_state = AdamState.zeros(flat.size)
    agent.opt_state, flat = adam_step(agent.opt_state, flat, grad, lr=lr)
    agent.q_model = replace(model,
                            theta=flat[:n_p],
                            output_scale=flat[n_p:n_p + N_ACTIONS],
                            output_bias=flat[n_p + N_ACTIONS:])
    agent.update_count += 1
    if agent.update_count % agent.target_period == 0:
        agent.target = agent.q_model
    return agent


def greedy_policy(agent: QAgent, env: GridEnv) -> dict[int, Action]:
    """Greedy action per non-terminal state."""
    policy = {}
    for s in range(env.n_states):
        if s in env.holes or s == env.goal:
            continue
        policy[s] = int(np.argmax(q_values(agent, s)))
    return policy


def greedy_success(agent: QAgent, env: GridEnv) -> bool:
    """Does the greedy policy reach the goal from the start?"""
    s = env.reset()
    for _ in range(env.step_limit):
        a = int(np.argmax(q_values(agent, s)))
        s, r, done = env.step(s, a)
        if done:
            return r > 0.0
    return False


def train_qrl(env: GridEnv, agent: QAgent, episodes: int, seed: int,
              lr: float = 0.05, batch_size: int = 16, warmup: int = 32,
              train_every: int = 1, eval_every: int = 25,
              stop_when_solved: bool = False
              ) -> tuple[QAgent, list[dict]]:
    """Deep-Q training loop; returns (agent, per-episode log rows).

    Rows carry episode, return, length, and epsilon. With
    ``stop_when_solved`` the loop ends early once the greedy policy reaches
    the goal (checked every ``eval_every`` episodes), so the log then holds
    only the episodes actually run.
    """
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    if env.n_states > 2 ** agent.n_qubits:
        raise ValueError(
            f"{env.n_states} states need more than {agent.n_qubits} qubits")
    rng = np.random.default_rng(seed)
    log = []
    for episode in range(episodes):
        eps = epsilon_at(episode, episodes)
        s = env.reset()
        ep_return, length = 0.0, 0
        for _ in range(env.step_limit):
            a = epsilon_greedy(q_values(agent, s), eps, rng)
            s_next, r, done = env.step(s, a, rng)
            agent.buffer.push(Transition(s, a, r, s_next, done))
            ep_return += r
            length += 1
            s = s_next
            if len(agent.buffer) >= warmup and length % train_every == 0:
                dqn_update(agent, agent.buffer.sample(batch_size, rng), lr)
            if done:
                break
        log.append({"episode": episode, "return": ep_return,
                    "length": length, "epsilon": eps})
        if stop_when_solved and (episode + 1) % eval_every == 0 \
                and greedy_success(agent, env):
            break
    return agent, log
