"""Quantum architecture search: evolutionary, RL-based, and differentiable."""

from .blocks import (
    Block,
    BlockLibrary,
    bell_library,
    decode,
    enumerate_genomes,
    mutate,
    random_genome,
)
from .fitness import QasTask, brute_force_best, fidelity, fitness
from .evolve import EvolveConfig, evolve
from .rl_search import CircuitBuilderEnv, qas_env_step, qas_rl_train
from .diffqas import (
    StructuralWeights,
    diffqas_forward,
    diffqas_loss_and_grads,
    diffqas_train,
    softmax_weights,
)

__all__ = [
    "Block", "BlockLibrary", "bell_library", "decode", "enumerate_genomes",
    "mutate", "random_genome",
    "QasTask", "fitness", "fidelity", "brute_force_best",
    "EvolveConfig", "evolve",
    "CircuitBuilderEnv", "qas_env_step", "qas_rl_train",
    "StructuralWeights", "softmax_weights", "diffqas_forward",
    "diffqas_loss_and_grads", "diffqas_train",
]
