"""Genetic algorithm over (adjacency, weights, beta) genomes.

Each generation keeps the 20 fittest unchanged, fills 15 slots with duplicates
of the top 10 (each mutated with 10% probability) and 15 by mating random
pairs from those 35.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import WEIGHT_HIGH, WEIGHT_LOW, IsingGenome

TAG_INIT = "init"
TAG_COPY = "copy"
TAG_MUTATE = "mutate"
TAG_MATE = "mate"

BETA_MIN = 1e-6


@dataclass
class GAConfig:
    n_elite: int = 20
    n_mutants: int = 15
    n_mated: int = 15
    n_duplicated: int = 10      # top ranks cycled into the mutant slots
    mutation_prob: float = 0.10
    beta_noise_sigma: float = 0.02
    edge_flip_prob: float = 0.5
    weight_low: float = WEIGHT_LOW
    weight_high: float = WEIGHT_HIGH

    @property
    def population_size(self) -> int:
        return self.n_elite + self.n_mutants + self.n_mated

    def validate(self) -> None:
        if min(self.n_elite, self.n_mutants, self.n_mated, self.n_duplicated) < 0:
            raise ValueError("GA slot counts must be non-negative")
        if self.n_duplicated == 0 and self.n_mutants > 0:
            raise ValueError("n_duplicated must be positive when mutant slots exist")
        for name in ("mutation_prob", "edge_flip_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be a probability")
        if self.beta_noise_sigma < 0:
            raise ValueError("beta_noise_sigma must be >= 0")


def mutate(genome: IsingGenome, rng: np.random.Generator, config: GAConfig) -> IsingGenome:
    """Composite mutation: maybe toggle one admissible edge, resample one
    existing edge weight from U(-2, 2), multiply beta by N(1, sigma) noise.

    Draw order: edge-toggle gate uniform; toggled entry index if gated; the
    resampled edge index and its new weight; the beta noise normal.
    """
    out = genome.copy()
    if rng.random() < config.edge_flip_prob:
        allowed = np.flatnonzero(genome.mask.ravel())
        if allowed.shape[0] > 0:
            pick = allowed[rng.integers(0, allowed.shape[0])]
            i, j = divmod(int(pick), genome.n)
            out.adjacency[i, j] = not out.adjacency[i, j]
    edges = np.flatnonzero(out.adjacency.ravel())
    if edges.shape[0] > 0:
        pick = edges[rng.integers(0, edges.shape[0])]
        i, j = divmod(int(pick), genome.n)
        out.weights[i, j] = rng.uniform(config.weight_low, config.weight_high)
    out.beta = max(float(out.beta * rng.normal(1.0, config.beta_noise_sigma)), BETA_MIN)
    return out


def mate_with(parent_a: IsingGenome, parent_b: IsingGenome, w: float, pick: np.ndarray) -> IsingGenome:
    """Offspring from a fixed mixing weight and per-entry adjacency choices.

    J and beta are the w-weighted averages; adjacency entry (i, j) comes from
    parent a where pick[i, j] < w, else from parent b.
    """
    if parent_a.n != parent_b.n or not np.array_equal(parent_a.mask, parent_b.mask):
        raise ValueError("parents must share dimensions and topology mask")
    child = parent_a.copy()
    child.weights = w * parent_a.weights + (1.0 - w) * parent_b.weights
    child.beta = max(float(w * parent_a.beta + (1.0 - w) * parent_b.beta), BETA_MIN)
    child.adjacency = np.where(pick < w, parent_a.adjacency, parent_b.adjacency)
    return child


def mate(parent_a: IsingGenome, parent_b: IsingGenome, rng: np.random.Generator) -> IsingGenome:
    """Weighted-average offspring with w ~ U(0, 1).

    Draws w, then a full NxN uniform matrix for the adjacency choices.
    """
    w = rng.random()
    pick = rng.random((parent_a.n, parent_a.n))
    return mate_with(parent_a, parent_b, w, pick)


def next_generation(
    population: list[IsingGenome],
    fitness: np.ndarray,
    rng: np.random.Generator,
    config: GAConfig,
) -> tuple[list[IsingGenome], list[str]]:
    """One GA step; returns the new population and the operator tag per slot.

    Ranking is by fitness descending with ties broken by prior index.  Mate
    parents are two distinct individuals drawn uniformly from the elite and
    mutant slots.
    """
    config.validate()
    if len(population) != config.population_size:
        raise ValueError(f"population size must be {config.population_size}, got {len(population)}")
    fitness = np.asarray(fitness, dtype=float)
    order = np.argsort(-fitness, kind="stable")

    new_pop: list[IsingGenome] = []
    tags: list[str] = []
    for r in range(config.n_elite):
        new_pop.append(population[order[r]].copy())
        tags.append(TAG_COPY)
    for k in range(config.n_mutants):
        src = population[order[k % config.n_duplicated]].copy()
        if rng.random() < config.mutation_prob:
            src = mutate(src, rng, config)
        new_pop.append(src)
        tags.append(TAG_MUTATE)
    pool = config.n_elite + config.n_mutants
    for _ in range(config.n_mated):
        a = int(rng.integers(0, pool))
        b = int(rng.integers(0, pool - 1))
        if b >= a:
            b += 1
        new_pop.append(mate(new_pop[a], new_pop[b], rng))
        tags.append(TAG_MATE)
    return new_pop, tags
