"""Post-hoc resilience and statistics over evolved populations.

Generalizability compares per-step energy growth between the training horizon
and an extended one; genetic perturbation adds +-f_pert to every weight and
tracks the fitness decay; the Mann-Whitney test compares distance-to-
criticality samples between tasks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .network import WEIGHT_HIGH, WEIGHT_LOW, IsingGenome
from .world import WorldConfig, run_lifetime


@dataclass
class GeneralizabilityResult:
    gamma_t: float
    t_train: int
    t_extend: int
    mean_energy_train: float
    mean_energy_extend: float


def gamma_from_traces(trace_train: np.ndarray, trace_extend: np.ndarray) -> GeneralizabilityResult:
    """Ratio of per-step energy growth at the extended vs training horizon.

    Growth at horizon T is (mean of E over t=0..T minus E(0)) / T, so exactly
    linear traces give gamma = 1 at any pair of horizons and saturating traces
    give gamma < 1.  When neither horizon shows any growth (a static agent)
    the ratio is defined as 1: stretching the lifespan changes nothing.
    """
    trace_train = np.asarray(trace_train, dtype=float)
    trace_extend = np.asarray(trace_extend, dtype=float)
    t_train = trace_train.shape[0] - 1
    t_extend = trace_extend.shape[0] - 1
    if t_train < 1 or t_extend < 1:
        raise ValueError("traces must cover at least one step")
    mean_train = float(trace_train.mean())
    mean_extend = float(trace_extend.mean())
    g_train = (mean_train - float(trace_train[0])) / t_train
    g_extend = (mean_extend - float(trace_extend[0])) / t_extend
    if g_train == 0.0 and g_extend == 0.0:
        gamma = 1.0
    elif g_train == 0.0:
        gamma = math.inf if g_extend > 0 else -math.inf
    else:
        gamma = g_extend / g_train
    return GeneralizabilityResult(
        gamma_t=gamma,
        t_train=t_train,
        t_extend=t_extend,
        mean_energy_train=mean_train,
        mean_energy_extend=mean_extend,
    )


def generalizability(
    genomes: list[IsingGenome],
    config: WorldConfig,
    rng_factory,
    t_train: int = 2000,
    t_extend: int = 50_000,
) -> GeneralizabilityResult:
    """Run the population at both horizons (identical world seeds) and compare
    the growth of the population-mean energy.

    `rng_factory` must return a fresh, identically-seeded generator on each
    call so the extended run replays the training run's world.
    """
    results = []
    for horizon in (t_train, t_extend):
        cfg = WorldConfig(**{**config.__dict__, "lifespan": int(horizon)})
        res = run_lifetime(genomes, cfg, rng_factory())
        results.append(res.energy_trace.mean(axis=1))
    return gamma_from_traces(results[0], results[1])


def perturb_genome(genome: IsingGenome, f_pert: float, rng: np.random.Generator) -> IsingGenome:
    """Add +-f_pert (independent fair signs) to every existing edge weight.

    Results are clamped to the weight bounds; adjacency and beta untouched.
    """
    if f_pert < 0:
        raise ValueError("f_pert must be >= 0")
    out = genome.copy()
    if f_pert == 0.0:
        return out
    signs = np.where(rng.random(genome.weights.shape) < 0.5, -1.0, 1.0)
    perturbed = genome.weights + f_pert * signs
    out.weights = np.where(genome.adjacency, np.clip(perturbed, WEIGHT_LOW, WEIGHT_HIGH), genome.weights)
    return out


def default_f_pert_grid(n_points: int = 12, low: float = 0.01, high: float = 2.0) -> np.ndarray:
    """Log-spaced perturbation magnitudes plus the f_pert = 0 control."""
    return np.concatenate([[0.0], np.logspace(math.log10(low), math.log10(high), n_points)])


@dataclass
class PerturbationSweep:
    f_pert: np.ndarray
    mean_fitness: np.ndarray
    alpha_fit: float | None = None


@dataclass
class DecayFit:
    alpha: float          # slope of ln(fitness - baseline) vs f_pert
    log_intercept: float
    used: np.ndarray      # mask of grid points that entered the fit


def decay_exponent(sweep: PerturbationSweep, baseline: float = 0.0) -> DecayFit:
    """Least-squares exponential-decay slope of mean fitness vs f_pert.

    Points with non-positive fitness after the baseline shift are excluded
    (flagged in `used`); at least 4 usable magnitudes are required.
    """
    f = np.asarray(sweep.f_pert, dtype=float)
    y = np.asarray(sweep.mean_fitness, dtype=float) - baseline
    used = y > 0.0
    if used.sum() < 4:
        raise ValueError("need at least 4 magnitudes with positive shifted fitness")
    coef = np.polyfit(f[used], np.log(y[used]), 1)
    return DecayFit(alpha=float(coef[0]), log_intercept=float(coef[1]), used=used)


def operator_histogram(
    generations: np.ndarray,
    fitness: np.ndarray,
    lineage: np.ndarray,
    gen_lo: int,
    gen_hi: int,
) -> dict:
    """Fitness samples per lineage operator within [gen_lo, gen_hi].

    Inputs are the per-agent columns of a generations log.  Raises when the
    window is not fully covered by the logged range.
    """
    generations = np.asarray(generations)
    if gen_lo > gen_hi:
        raise ValueError("empty generation window")
    if generations.size == 0 or gen_lo < generations.min() or gen_hi > generations.max():
        raise ValueError(f"window [{gen_lo}, {gen_hi}] outside the logged range")
    sel = (generations >= gen_lo) & (generations <= gen_hi)
    fitness = np.asarray(fitness, dtype=float)[sel]
    lineage = np.asarray(lineage)[sel]
    return {tag: fitness[lineage == tag] for tag in np.unique(lineage)}


def _rank_sum_counts(scaled_ranks: np.ndarray, n1: int) -> tuple[np.ndarray, int]:
    """Number of n1-subsets of the pooled (scaled, integer) midranks reaching
    each possible rank sum.  Counting DP over items; exact also under ties."""
    total = int(scaled_ranks.sum())
    # ways[k][s] = number of k-subsets summing to s
    ways = np.zeros((n1 + 1, total + 1))
    ways[0, 0] = 1.0
    for r in scaled_ranks:
        r = int(r)
        for k in range(n1, 0, -1):
            ways[k, r:] += ways[k - 1, : total + 1 - r]
    return ways[n1], total


def mann_whitney_u(a, b, alternative: str = "greater") -> tuple[float, float]:
    """One-sided Mann-Whitney U test.

    Returns (U, p) where U counts pairs (a_i, b_j) with a_i > b_j (ties count
    one half).  `alternative="greater"` tests whether a tends larger than b,
    `"less"` the reverse.  For n1*n2 <= 200 the p-value comes from the exact
    permutation distribution of the rank sum (tie-aware); larger samples use
    the tie-corrected normal approximation with continuity correction.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    if alternative not in ("greater", "less"):
        raise ValueError(f"unsupported alternative {alternative!r}")
    n1, n2 = a.size, b.size
    pooled = np.concatenate([a, b])
    order = np.argsort(pooled, kind="stable")
    ranks = np.empty(n1 + n2)
    i = 0
    tie_sizes = []
    while i < pooled.size:
        j = i
        while j + 1 < pooled.size and pooled[order[j + 1]] == pooled[order[i]]:
            j += 1
        mid = 0.5 * (i + j) + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mid
        tie_sizes.append(j - i + 1)
        i = j + 1
    r_a = float(ranks[:n1].sum())
    u = r_a - n1 * (n1 + 1) / 2.0

    if n1 * n2 <= 200:
        scaled = np.round(ranks * 2).astype(np.int64)   # midranks are multiples of 1/2
        counts, _ = _rank_sum_counts(scaled, n1)
        total_combos = counts.sum()
        target = int(round(r_a * 2))
        sums = np.arange(counts.shape[0])
        if alternative == "greater":
            p = counts[sums >= target].sum() / total_combos
        else:
            p = counts[sums <= target].sum() / total_combos
        return u, float(p)

    n = n1 + n2
    tie_term = sum(t**3 - t for t in tie_sizes)
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if var <= 0:
        return u, 0.5
    mean_u = n1 * n2 / 2.0
    if alternative == "greater":
        z = (u - mean_u - 0.5) / math.sqrt(var)
        p = 0.5 * math.erfc(z / math.sqrt(2.0))
    else:
        z = (u - mean_u + 0.5) / math.sqrt(var)
        p = 0.5 * math.erfc(-z / math.sqrt(2.0))
    return u, float(p)
