"""Heat-capacity estimation and distance-to-criticality measures.

The dynamical regime of a network is located by scanning a multiplicative
scaling c_beta of its inverse temperature and estimating

    C_H(c_beta) = (c_beta * beta)^2 * Var(e)

by annealed Monte Carlo at each grid point.  The grid argmax c_beta_crit
defines the distance to criticality delta = log10(c_beta_crit): negative is
subcritical (ordered), positive supercritical (disordered).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .network import IsingGenome, NeuronClass, topology_mask

PROVENANCE_GEN0 = "generation0"
PROVENANCE_FINAL = "final_generation"
PROVENANCE_THERMALIZED = "thermalized"
PROVENANCE_SYNTHETIC = "synthetic"


@dataclass
class SensorDataset:
    """Pool of observed sensor vectors used to clamp the sensor neurons."""

    samples: np.ndarray      # (n_samples, n_sensors)
    provenance: str = PROVENANCE_SYNTHETIC

    @classmethod
    def from_sensor_log(cls, log: np.ndarray, provenance: str) -> "SensorDataset":
        """Columns 2..5 of a lifetime sensor log are the clamped values."""
        return cls(samples=np.asarray(log, dtype=float)[:, 2:6].copy(), provenance=provenance)

    @classmethod
    def uniform(cls, n_samples: int, n_sensors: int, rng: np.random.Generator) -> "SensorDataset":
        return cls(samples=rng.uniform(-1.0, 1.0, size=(n_samples, n_sensors)))

    def validate(self) -> None:
        if self.samples.ndim != 2 or self.samples.shape[0] == 0:
            raise ValueError("sensor dataset must hold at least one sensor vector")
        if np.abs(self.samples).max() > 1.0 + 1e-9:
            raise ValueError("sensor values must lie in [-1, 1]")


@dataclass
class AnnealingSchedule:
    """Cooling protocol for each grid-point estimate.

    The chain starts at start_scale times the target temperature and cools
    geometrically to the target over n_stages stages before measuring.
    """

    start_scale: float = 20.0
    n_stages: int = 20
    sweeps_per_stage: int = 50
    measurement_sweeps: int = 2000   # per restart chain
    burn_in: int = 0
    refresh_every: int = 0     # sweeps per clamped-sensor block; 0 = one vector per chain
    n_restarts: int = 8        # independent annealed chains averaged per estimate

    def validate(self) -> None:
        if self.start_scale < 1.0:
            raise ValueError("start_scale must be >= 1")
        if self.n_stages < 0 or self.sweeps_per_stage < 0 or self.burn_in < 0:
            raise ValueError("stage counts must be >= 0")
        if self.measurement_sweeps < 1:
            raise ValueError("measurement_sweeps must be >= 1")
        if self.refresh_every < 0:
            raise ValueError("refresh_every must be >= 0")
        if self.n_restarts < 1:
            raise ValueError("n_restarts must be >= 1")


@dataclass
class HeatCapacityCurve:
    grid: np.ndarray          # c_beta values (log spaced)
    values: np.ndarray        # C_H per grid point
    mean_energy: np.ndarray
    var_energy: np.ndarray
    c_beta_crit: float
    delta: float              # log10(c_beta_crit)


@dataclass
class ScalingResult:
    sizes: list
    curves: dict              # size -> list of HeatCapacityCurve
    median_curve: dict        # size -> np.ndarray of median C_H per grid point
    median_peak: dict         # size -> median over the ensemble of max C_H
    median_peak_beta: dict    # size -> median over the ensemble of argmax beta_eff


def default_grid(n_points: int = 60, low: float = -2.0, high: float = 2.0) -> np.ndarray:
    """Log-spaced c_beta grid, 60 points over [1e-2, 1e2] by default."""
    return np.logspace(low, high, n_points)


def estimate_var_energy(
    genome: IsingGenome,
    c_beta: float,
    schedule: AnnealingSchedule,
    rng: np.random.Generator,
    dataset: SensorDataset | None = None,
) -> tuple[float, float]:
    """Annealed MC estimate of (mean, var) of e at effective beta c_beta*beta.

    With a dataset the sensors are clamped: each restart chain draws one
    vector from it (refresh_every > 0 splits the measurement into blocks with
    fresh vectors), and the variance is the within-block average, i.e. energy
    fluctuations at fixed input.  With dataset=None the sensors are
    thermalized as ordinary +-1 spins.
    """
    schedule.validate()
    sensor_idx = genome.sensor_indices()
    if dataset is not None:
        dataset.validate()
        if dataset.samples.shape[1] != sensor_idx.shape[0]:
            raise ValueError("sensor dataset width does not match the sensor count")
        free = genome.free_indices()
        data = np.ascontiguousarray(dataset.samples, dtype=float)
    else:
        free = np.arange(genome.n, dtype=np.int64)
        data = np.empty((0, sensor_idx.shape[0]))
    mean, var = kernels.measure_energy_stats(
        genome.coupling(),
        float(c_beta * genome.beta),
        free,
        sensor_idx,
        data,
        float(schedule.start_scale),
        int(schedule.n_stages),
        int(schedule.sweeps_per_stage),
        int(schedule.burn_in),
        int(schedule.measurement_sweeps),
        int(schedule.refresh_every),
        int(schedule.n_restarts),
        False,
        False,
        rng,
    )
    return float(mean), float(var)


def heat_capacity_curve(
    genome: IsingGenome,
    grid: np.ndarray,
    schedule: AnnealingSchedule,
    rng: np.random.Generator,
    dataset: SensorDataset | None = None,
    threads: int = 1,
) -> HeatCapacityCurve:
    """C_H over the grid; each point uses its own child stream of `rng`.

    The argmax ties break toward the smaller c_beta.
    """
    grid = np.asarray(grid, dtype=float)
    streams = rng.spawn(grid.shape[0])
    means = np.empty(grid.shape[0])
    varis = np.empty(grid.shape[0])

    def one(k: int) -> None:
        means[k], varis[k] = estimate_var_energy(genome, grid[k], schedule, streams[k], dataset)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(one, range(grid.shape[0])))
    else:
        for k in range(grid.shape[0]):
            one(k)

    values = (grid * genome.beta) ** 2 * varis
    best = int(np.argmax(values))  # first occurrence = smaller c_beta on ties
    c_crit = float(grid[best])
    return HeatCapacityCurve(
        grid=grid,
        values=values,
        mean_energy=means,
        var_energy=varis,
        c_beta_crit=c_crit,
        delta=math.log10(c_crit),
    )


def scaling_classes(n: int) -> np.ndarray:
    """1/3 sensors and 1/3 motors (rounded down), the remainder hidden."""
    n_sens = n // 3
    n_mot = n // 3
    return np.array(
        [NeuronClass.SENSOR] * n_sens + [NeuronClass.HIDDEN] * (n - n_sens - n_mot) + [NeuronClass.MOTOR] * n_mot,
        dtype=np.int8,
    )


def random_scaling_genome(n: int, rng: np.random.Generator) -> IsingGenome:
    """Random network for the finite-size analysis.

    Full admissible connectivity, U(-1, 1) weights normalized by the
    Frobenius norm of the (masked) connectivity matrix with a sqrt(n)/1.5
    size compensation, beta = 1.  Plain 1/frobenius alone leaves the
    heat-capacity peak drifting as sqrt(n); the compensation keeps the
    per-spin incident coupling scale fixed so the ensembles of every size
    peak near beta_eff = 1.5.
    """
    classes = scaling_classes(n)
    mask = topology_mask(classes)
    weights = rng.uniform(-1.0, 1.0, size=(n, n))
    weights[~mask] = 0.0
    norm = np.linalg.norm(weights)
    if norm > 0:
        weights = weights * (math.sqrt(n) / (1.5 * norm))
    return IsingGenome(classes=classes, mask=mask, adjacency=mask.copy(), weights=weights, beta=1.0)


def scaling_analysis(
    sizes=(12, 25, 100),
    ensemble_size: int = 20,
    schedule: AnnealingSchedule | None = None,
    rng: np.random.Generator | None = None,
    grid: np.ndarray | None = None,
    sensor_samples: int = 200,
    threads: int = 1,
) -> ScalingResult:
    """Heat-capacity ensembles of random networks at several sizes.

    Sensors are clamped to U(-1, 1) vectors.  Returns per-size curves plus the
    pointwise-median curve and the ensemble medians of peak height/location.
    """
    if rng is None:
        raise ValueError("scaling_analysis needs an rng")
    schedule = schedule or AnnealingSchedule()
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)

    curves: dict = {}
    median_curve: dict = {}
    median_peak: dict = {}
    median_peak_beta: dict = {}
    for n in sizes:
        size_curves = []
        for _ in range(ensemble_size):
            gstream = rng.spawn(1)[0]
            genome = random_scaling_genome(n, gstream)
            dataset = SensorDataset.uniform(sensor_samples, genome.sensor_indices().shape[0], gstream)
            size_curves.append(heat_capacity_curve(genome, grid, schedule, gstream, dataset, threads=threads))
        curves[n] = size_curves
        stacked = np.stack([c.values for c in size_curves])
        median_curve[n] = np.median(stacked, axis=0)
        median_peak[n] = float(np.median([c.values.max() for c in size_curves]))
        # genomes carry beta = 1, so c_beta_crit is the peak effective beta
        median_peak_beta[n] = float(np.median([c.c_beta_crit for c in size_curves]))
    return ScalingResult(
        sizes=list(sizes),
        curves=curves,
        median_curve=median_curve,
        median_peak=median_peak,
        median_peak_beta=median_peak_beta,
    )


@dataclass
class SensorModeComparison:
    grid: np.ndarray
    mean_values: dict = field(default_factory=dict)   # mode -> mean C_H per grid point


def compare_sensor_modes(
    genomes: list[IsingGenome],
    gen0_data: list[SensorDataset],
    final_data: list[SensorDataset],
    schedule: AnnealingSchedule,
    rng: np.random.Generator,
    grid: np.ndarray | None = None,
    threads: int = 1,
) -> SensorModeComparison:
    """Mean heat-capacity curve per sensor handling mode across genomes."""
    if not (len(genomes) == len(gen0_data) == len(final_data)):
        raise ValueError("need one gen-0 and one final dataset per genome")
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    modes = {
        PROVENANCE_THERMALIZED: [None] * len(genomes),
        PROVENANCE_GEN0: gen0_data,
        PROVENANCE_FINAL: final_data,
    }
    out = SensorModeComparison(grid=grid)
    for mode, datasets in modes.items():
        acc = np.zeros(grid.shape[0])
        for genome, dataset in zip(genomes, datasets):
            curve = heat_capacity_curve(genome, grid, schedule, rng.spawn(1)[0], dataset, threads=threads)
            acc += curve.values
        out.mean_values[mode] = acc / len(genomes)
    return out
