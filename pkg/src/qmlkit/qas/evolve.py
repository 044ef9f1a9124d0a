"""Evolutionary genome search: tournament selection, point mutation, elitism."""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial

import numpy as np

from .blocks import BlockLibrary, Genome, mutate, random_genome
from .fitness import QasTask, fitness

__all__ = ["EvolveConfig", "evolve"]


@dataclass(frozen=True)
class EvolveConfig:
    population: int = 20
    generations: int = 30
    mutation_rate: float = 0.9
    elitism: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population < 2:
            raise ValueError("population must be >= 2")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must be in [0, 1]")


def _tournament(scores: list[float], rng: np.random.Generator) -> int:
    """Size-2 tournament; ties go to the lower index."""
    i, j = rng.integers(len(scores)), rng.integers(len(scores))
    i, j = int(i), int(j)
    if scores[i] == scores[j]:
        return min(i, j)
    return i if scores[i] > scores[j] else j


def evolve(library: BlockLibrary, task: QasTask, config: EvolveConfig,
           mapper=map) -> tuple[Genome, float, list[dict]]:
    """Search the library for the best genome.

    Returns (best-ever genome, its fitness, per-generation history rows with
    generation, best, mean, and best_ever). Fitness calls share the master
    seed, so they are independent of evaluation order and ``mapper`` may be
    a thread-pool map. The search itself is deterministic per config seed.
    """
    rng = np.random.default_rng(config.seed)
    evaluate = partial(fitness, library=library, task=task, seed=config.seed)
    population = [random_genome(library, rng)
                  for _ in range(config.population)]
    best_genome: Genome | None = None
    best_score = -np.inf
    history = []
    for generation in range(config.generations):
        scores = list(mapper(evaluate, population))
        gen_best = int(np.argmax(scores))
        if scores[gen_best] > best_score:
            best_score = scores[gen_best]
            best_genome = population[gen_best]
        history.append({"generation": generation,
                        "best": float(scores[gen_best]),
                        "mean": float(np.mean(scores)),
                        "best_ever": float(best_score)})
        if generation == config.generations - 1:
            break
        offspring = []
        if config.elitism:
            offspring.append(population[gen_best])
        while len(offspring) < config.population:
            parent = population[_tournament(scores, rng)]
            child = parent
            if rng.random() < config.mutation_rate:
                child = mutate(parent, library, rng)
            offspring.append(child)
        population = offspring
    return best_genome, float(best_score), history
