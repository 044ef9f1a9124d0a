"""Fitness evaluation for architecture-search candidates.

Three task kinds: fidelity against a target state, supervised accuracy
after a short training budget, and mean reinforcement-learning return. The
score subtracts ``depth_penalty`` per non-empty block so search can trade
metric against circuit size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..autodiff import Adam
from ..circuit import ParamCircuit, final_state
from ..models import VqcModel, train_vqc, vqc_forward_batch
from ..rl import GridEnv, QAgent, ReplayBuffer, train_qrl
from ..statevec import Statevector
from .blocks import BlockLibrary, Genome, decode, enumerate_genomes

__all__ = ["QasTask", "fidelity", "task_metric", "fitness",
           "brute_force_best"]

KINDS = ("state-fidelity", "supervised", "rl")


@dataclass(frozen=True)
class QasTask:
    """What a candidate circuit is scored on.

    budget caps the per-candidate optimizer steps (or RL episodes);
    depth_penalty is subtracted once per non-empty block.
    """

    kind: str
    target: Statevector | None = None
    dataset: tuple | None = None
    env: GridEnv | None = None
    budget: int = 30
    depth_penalty: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown task kind {self.kind!r}")
        if self.depth_penalty < 0:
            raise ValueError("depth_penalty must be >= 0")
        if self.budget < 0:
            raise ValueError("budget must be >= 0")
        if self.kind == "state-fidelity":
            if self.target is None:
                raise ValueError("state-fidelity task needs a target state")
            if abs(self.target.norm() - 1.0) > 1e-9:
                raise ValueError("fidelity target must be normalized")
        if self.kind == "supervised" and self.dataset is None:
            raise ValueError("supervised task needs a dataset")
        if self.kind == "rl" and self.env is None:
            raise ValueError("rl task needs an environment")


def fidelity(circuit: ParamCircuit, target: Statevector,
             theta=None) -> float:
    """|<target|psi>|^2 for the circuit's output state."""
    psi = final_state(circuit, None, theta)
    if psi.n_qubits != target.n_qubits:
        raise ValueError(f"circuit has {psi.n_qubits} qubits, "
                         f"target {target.n_qubits}")
    return float(np.abs(np.vdot(target.amplitudes, psi.amplitudes)) ** 2)


def _trained_fidelity(circuit: ParamCircuit, target: Statevector,
                      budget: int, seed: int) -> float:
    """Best fidelity after a short Adam run; central differences suffice at
    this scale and keep the projector observable out of the shift-rule path."""
    if circuit.n_params == 0 or budget == 0:
        return fidelity(circuit, target)
    rng = np.random.default_rng(seed)
    theta = rng.uniform(-np.pi, np.pi, size=circuit.n_params)
    adam = Adam(lr=0.1)
    h = 1e-6
    best = fidelity(circuit, target, theta)
    for _ in range(budget):
        grad = np.empty(circuit.n_params)
        for k in range(circuit.n_params):
            tp, tm = theta.copy(), theta.copy()
            tp[k] += h
            tm[k] -= h
            grad[k] = (fidelity(circuit, target, tp)
                       - fidelity(circuit, target, tm)) / (2 * h)
        theta = adam.step(theta, -grad)
        best = max(best, fidelity(circuit, target, theta))
    return best


def _supervised_accuracy(circuit: ParamCircuit, dataset, budget: int,
                         seed: int) -> float:
    from ..statevec import pauli_z
    X, y = dataset
    single = ParamCircuit(circuit.n_qubits, circuit.ops,
                          (pauli_z(0),), circuit.input_dim, circuit.n_params)
    rng = np.random.default_rng(seed)
    model = VqcModel(single, rng.uniform(-np.pi, np.pi, single.n_params),
                     np.ones(1), np.zeros(1))
    if budget > 0 and single.n_params > 0:
        model, _ = train_vqc(model, X, y, steps=budget, lr=0.1)
    pred = vqc_forward_batch(model, X)[:, 0]
    signs = np.where(pred >= 0, 1.0, -1.0)
    return float(np.mean(signs == np.asarray(y, dtype=np.float64)))


def _rl_return(circuit: ParamCircuit, env: GridEnv, budget: int,
               seed: int) -> float:
    if circuit.input_dim != circuit.n_qubits:
        raise ValueError("rl tasks need one input slot per qubit "
                         "(basis-state encoding layer)")
    if len(circuit.observables) < 4:
        raise ValueError("rl tasks need at least four observables")
    rng = np.random.default_rng(seed)
    theta = rng.uniform(-np.pi, np.pi, size=circuit.n_params)
    model = VqcModel(circuit, theta, np.ones(4), np.zeros(4))
    agent = QAgent(q_model=model, target=model,
                   buffer=ReplayBuffer(2000), n_qubits=circuit.n_qubits)
    _, log = train_qrl(env, agent, episodes=max(1, budget), seed=seed,
                       lr=0.02)
    return float(np.mean([row["return"] for row in log]))


def task_metric(circuit: ParamCircuit, task: QasTask, seed: int = 0) -> float:
    """Raw task score of one circuit, before any depth penalty."""
    if task.kind == "state-fidelity":
        return _trained_fidelity(circuit, task.target, task.budget, seed)
    if task.kind == "supervised":
        return _supervised_accuracy(circuit, task.dataset, task.budget, seed)
    return _rl_return(circuit, task.env, task.budget, seed)


def fitness(genome: Genome, library: BlockLibrary, task: QasTask,
            seed: int = 0) -> float:
    """Task metric minus the depth penalty; deterministic per seed."""
    score = task_metric(decode(genome, library), task, seed)
    depth = sum(1 for pos, block_id in enumerate(genome)
                if not library.slots[pos][block_id].is_empty)
    return score - task.depth_penalty * depth


def brute_force_best(library: BlockLibrary, task: QasTask,
                     seed: int = 0) -> tuple[float, Genome]:
    """Exhaustive optimum over every genome; the oracle search is scored
    against. Refuses libraries beyond desk scale."""
    if library.n_genomes > 1024:
        raise ValueError(f"{library.n_genomes} genomes is past enumeration "
                         "scale (limit 1024)")
    best_score, best_genome = -np.inf, None
    for genome in enumerate_genomes(library):
        score = fitness(genome, library, task, seed)
        if score > best_score:
            best_score, best_genome = score, genome
    return best_score, best_genome
