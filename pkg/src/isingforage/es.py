"""Natural-evolution-strategy variant with elitism and sparse perturbations.

The search distribution is an isotropic Gaussian over a flat parameter vector
(plus an optional scalar beta channel evolving 10x slower).  The mean update
is taken relative to the best individual of the generation:

    mean' = x_best + alpha / (n * sigma) * sum_i F_i * (x_i - x_best)

with F the rank-normalized fitness.  The top n_elite individuals re-enter the
next evaluation batch unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TAG_ELITE = "elite"
TAG_SAMPLED = "sampled"

BETA_FLOOR = 1e-3


@dataclass
class ESConfig:
    alpha: float = 0.1            # learning rate
    sigma: float = 0.1            # search std of the parameter channel
    sigma_beta: float | None = None   # defaults to 0.1 * sigma
    n: int = 50                   # individuals per generation
    n_elite: int = 6
    sparsity: float = 0.5         # fraction of perturbation entries zeroed
    bounds: tuple[float, float] | None = (-2.0, 2.0)
    evolve_beta: bool = True

    def beta_sigma(self) -> float:
        return 0.1 * self.sigma if self.sigma_beta is None else self.sigma_beta

    def validate(self) -> None:
        if not (self.alpha > 0 and self.sigma > 0):
            raise ValueError("alpha and sigma must be positive")
        if not 0.0 <= self.sparsity <= 1.0:
            raise ValueError("sparsity must be in [0, 1]")
        if not 0 <= self.n_elite < self.n:
            raise ValueError("need 0 <= n_elite < n")


@dataclass
class SearchDistribution:
    mean: np.ndarray
    mean_beta: float | None = None


@dataclass
class ESState:
    dist: SearchDistribution
    elite_vectors: np.ndarray | None = None   # (k, d)
    elite_betas: np.ndarray | None = None     # (k,)
    generation: int = 0


@dataclass
class PopulationSample:
    vectors: np.ndarray          # (n, d)
    betas: np.ndarray | None     # (n,)
    tags: list = field(default_factory=list)


def sample_population(state: ESState, rng: np.random.Generator, config: ESConfig) -> PopulationSample:
    """Stored elites first, then n - k fresh draws mean + sigma * eps.

    Perturbation entries are independently zeroed with probability `sparsity`
    before scaling.  Draw order: the (m, d) standard normals, the (m, d)
    sparsity uniforms, then m beta normals when beta evolves.
    """
    config.validate()
    d = state.dist.mean.shape[0]
    k = 0 if state.elite_vectors is None else state.elite_vectors.shape[0]
    m = config.n - k
    eps = rng.standard_normal((m, d))
    keep = rng.random((m, d)) >= config.sparsity
    eps = np.where(keep, eps, 0.0)
    fresh = state.dist.mean[None, :] + config.sigma * eps

    vectors = np.empty((config.n, d))
    if k:
        vectors[:k] = state.elite_vectors
    vectors[k:] = fresh

    betas = None
    if config.evolve_beta:
        if state.dist.mean_beta is None:
            raise ValueError("distribution has no beta channel")
        beta_eps = rng.standard_normal(m)
        betas = np.empty(config.n)
        if k:
            betas[:k] = state.elite_betas
        betas[k:] = np.maximum(state.dist.mean_beta + config.beta_sigma() * beta_eps, BETA_FLOOR)

    tags = [TAG_ELITE] * k + [TAG_SAMPLED] * m
    return PopulationSample(vectors=vectors, betas=betas, tags=tags)


def rank_fitness(raw) -> np.ndarray:
    """Midrank the fitness values, then center and scale to unit std.

    Invariant under strictly monotone transforms of the input; all-equal input
    returns zeros.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.shape[0] < 2:
        raise ValueError("need at least 2 fitness values to rank")
    order = np.argsort(raw, kind="stable")
    ranks = np.empty(raw.shape[0])
    i = 0
    while i < raw.shape[0]:
        j = i
        while j + 1 < raw.shape[0] and raw[order[j + 1]] == raw[order[i]]:
            j += 1
        mid = 0.5 * (i + j) + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mid
        i = j + 1
    std = ranks.std()
    if std == 0.0:
        return np.zeros_like(ranks)
    return (ranks - ranks.mean()) / std


def update_mean(
    state: ESState,
    sample: PopulationSample,
    raw_fitness: np.ndarray,
    config: ESConfig,
) -> ESState:
    """Gradient step relative to the best individual; refresh the elite set."""
    raw_fitness = np.asarray(raw_fitness, dtype=float)
    ranked = rank_fitness(raw_fitness)
    best = int(np.argmax(raw_fitness))
    x_best = sample.vectors[best]

    eps_rel = sample.vectors - x_best[None, :]
    mean = x_best + (config.alpha / (config.n * config.sigma)) * (ranked @ eps_rel)
    if config.bounds is not None:
        mean = np.clip(mean, config.bounds[0], config.bounds[1])

    mean_beta = state.dist.mean_beta
    if config.evolve_beta and sample.betas is not None:
        beta_best = sample.betas[best]
        beta_rel = sample.betas - beta_best
        mean_beta = float(beta_best + (config.alpha / (config.n * config.beta_sigma())) * (ranked @ beta_rel))
        mean_beta = max(mean_beta, BETA_FLOOR)

    elite_order = np.argsort(-raw_fitness, kind="stable")[: config.n_elite]
    return ESState(
        dist=SearchDistribution(mean=mean, mean_beta=mean_beta),
        elite_vectors=sample.vectors[elite_order].copy() if config.n_elite else None,
        elite_betas=sample.betas[elite_order].copy() if (config.n_elite and sample.betas is not None) else None,
        generation=state.generation + 1,
    )


def run_es_generation(
    state: ESState,
    evaluate,
    rng: np.random.Generator,
    config: ESConfig,
) -> tuple[ESState, PopulationSample, np.ndarray]:
    """sample -> evaluate (whole batch at once) -> rank -> update.

    `evaluate` maps a PopulationSample to one raw fitness per individual; for
    embodied runs that is a single shared-world lifetime.
    """
    sample = sample_population(state, rng, config)
    raw = np.asarray(evaluate(sample), dtype=float)
    if raw.shape[0] != config.n:
        raise ValueError("evaluator must return one fitness per individual")
    new_state = update_mean(state, sample, raw, config)
    return new_state, sample, raw
