"""Black-box benchmark functions and the GA-vs-ES comparison harness.

All objectives are evaluated at z = x + c with a translation c drawn from
N(0, 1) per run, randomizing the optimum's location.  Losses are minimized;
the comparison tracks best-so-far loss per generation, normalized per
function/algorithm by the median across runs of each run's maximum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .es import ESConfig, ESState, SearchDistribution, run_es_generation
from .ga import GAConfig
from .rng import STREAM_BENCHMARK, child_rng

FUNCTIONS = ("rastrigin", "rosenbrock", "sphere")


@dataclass
class BenchmarkObjective:
    kind: str
    dim: int = 50
    amplitude: float = 10.0      # Rastrigin A
    translation: np.ndarray | None = None   # c, added to x before evaluating

    def validate(self) -> None:
        if self.kind not in FUNCTIONS:
            raise ValueError(f"unknown benchmark function {self.kind!r}")
        if self.translation is not None and self.translation.shape != (self.dim,):
            raise ValueError("translation length must equal dim")


def make_objective(kind: str, dim: int, rng: np.random.Generator, amplitude: float = 10.0) -> BenchmarkObjective:
    obj = BenchmarkObjective(kind=kind, dim=dim, amplitude=amplitude, translation=rng.standard_normal(dim))
    obj.validate()
    return obj


def evaluate(objective: BenchmarkObjective, x: np.ndarray) -> float:
    """Loss at a single point."""
    return float(evaluate_batch(objective, np.asarray(x, dtype=float)[None, :])[0])


def evaluate_batch(objective: BenchmarkObjective, xs: np.ndarray) -> np.ndarray:
    """Loss for each row of xs."""
    xs = np.asarray(xs, dtype=float)
    if xs.shape[1] != objective.dim:
        raise ValueError(f"points have dimension {xs.shape[1]}, objective expects {objective.dim}")
    z = xs if objective.translation is None else xs + objective.translation[None, :]
    if objective.kind == "sphere":
        return np.sum(z * z, axis=1)
    if objective.kind == "rastrigin":
        a = objective.amplitude
        return a * objective.dim + np.sum(z * z - a * np.cos(2.0 * np.pi * z), axis=1)
    if objective.kind == "rosenbrock":
        zi = z[:, :-1]
        zj = z[:, 1:]
        return np.sum(100.0 * (zj - zi * zi) ** 2 + (1.0 - zi) ** 2, axis=1)
    raise ValueError(f"unknown benchmark function {objective.kind!r}")


def ga_vector_generation(
    population: np.ndarray,
    loss: np.ndarray,
    rng: np.random.Generator,
    config: GAConfig,
) -> np.ndarray:
    """GA step on unbounded real vectors.

    Same 20/15/15 slot structure as the genome GA; mutation redraws one
    coordinate from N(current, 1), mating is a scalar-weighted average.
    """
    config.validate()
    if population.shape[0] != config.population_size:
        raise ValueError(f"population size must be {config.population_size}")
    order = np.argsort(loss, kind="stable")   # ascending loss = fitness descending
    out = np.empty_like(population)
    out[: config.n_elite] = population[order[: config.n_elite]]
    for k in range(config.n_mutants):
        row = config.n_elite + k
        out[row] = population[order[k % config.n_duplicated]]
        if rng.random() < config.mutation_prob:
            i = int(rng.integers(0, population.shape[1]))
            out[row, i] = out[row, i] + rng.standard_normal()
    pool = config.n_elite + config.n_mutants
    for k in range(config.n_mated):
        row = pool + k
        a = int(rng.integers(0, pool))
        b = int(rng.integers(0, pool - 1))
        if b >= a:
            b += 1
        w = rng.random()
        out[row] = w * out[a] + (1.0 - w) * out[b]
    return out


@dataclass
class ComparisonResult:
    functions: list
    algorithms: list
    budget: int
    n_runs: int
    best_so_far: dict = field(default_factory=dict)   # (function, algorithm) -> (n_runs, budget+1)
    normalized: dict = field(default_factory=dict)    # same keys, divided by median-of-max

    def generations_to(self, function: str, algorithm: str, level: float) -> np.ndarray:
        """First generation per run at which the normalized loss drops below
        `level`; runs that never reach it count as budget + 1."""
        curves = self.normalized[(function, algorithm)]
        hits = np.full(curves.shape[0], self.budget + 1, dtype=float)
        for r in range(curves.shape[0]):
            below = np.flatnonzero(curves[r] < level)
            if below.shape[0]:
                hits[r] = below[0]
        return hits


def _run_ga(objective: BenchmarkObjective, budget: int, rng: np.random.Generator, config: GAConfig) -> np.ndarray:
    pop = rng.standard_normal((config.population_size, objective.dim))
    best = np.empty(budget + 1)
    loss = evaluate_batch(objective, pop)
    best[0] = loss.min()
    for g in range(1, budget + 1):
        pop = ga_vector_generation(pop, loss, rng, config)
        loss = evaluate_batch(objective, pop)
        best[g] = min(best[g - 1], loss.min())
    return best


def _run_es(objective: BenchmarkObjective, budget: int, rng: np.random.Generator, config: ESConfig) -> np.ndarray:
    state = ESState(dist=SearchDistribution(mean=np.zeros(objective.dim), mean_beta=None))

    def eval_sample(sample):
        return -evaluate_batch(objective, sample.vectors)

    best = np.empty(budget + 1)
    best[0] = evaluate(objective, state.dist.mean)
    cur = best[0]
    for g in range(1, budget + 1):
        state, sample, raw = run_es_generation(state, eval_sample, rng, config)
        cur = min(cur, float(-raw.max()))
        best[g] = cur
    return best


def run_comparison(
    functions=FUNCTIONS,
    dim: int = 50,
    n_runs: int = 25,
    budget: int = 10_000,
    seed: int = 0,
    ga_config: GAConfig | None = None,
    es_config: ESConfig | None = None,
) -> ComparisonResult:
    """Best-so-far loss curves for both algorithms on translated objectives.

    Per run index the two algorithms face the same translation; every run has
    its own derived streams, so runs are independent and reproducible.
    """
    ga_config = ga_config or GAConfig()
    es_config = es_config or ESConfig(alpha=0.1, sigma=0.1, bounds=None, evolve_beta=False)
    result = ComparisonResult(functions=list(functions), algorithms=["ga", "es"], budget=budget, n_runs=n_runs)
    for fi, kind in enumerate(functions):
        ga_curves = np.empty((n_runs, budget + 1))
        es_curves = np.empty((n_runs, budget + 1))
        for r in range(n_runs):
            obj = make_objective(kind, dim, child_rng(seed, STREAM_BENCHMARK, fi, r, 0))
            ga_curves[r] = _run_ga(obj, budget, child_rng(seed, STREAM_BENCHMARK, fi, r, 1), ga_config)
            es_curves[r] = _run_es(obj, budget, child_rng(seed, STREAM_BENCHMARK, fi, r, 2), es_config)
        for alg, curves in (("ga", ga_curves), ("es", es_curves)):
            result.best_so_far[(kind, alg)] = curves
            norm = float(np.median(curves.max(axis=1)))
            result.normalized[(kind, alg)] = curves / norm
    return result
