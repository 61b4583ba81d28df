"""Experiment orchestration: configuration, evolution loops, persistence.

Every run writes an immutable echo of its fully-resolved config and seed next
to its outputs, and consumes randomness only through per-(replicate,
generation) child streams, so any run can be reproduced or resumed
bit-identically from its directory alone.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import es as es_mod
from . import ga as ga_mod
from .analysis import (
    PerturbationSweep,
    decay_exponent,
    default_f_pert_grid,
    generalizability,
    mann_whitney_u,
    perturb_genome,
)
from .benchmarks import run_comparison
from .criticality import (
    PROVENANCE_FINAL,
    PROVENANCE_GEN0,
    AnnealingSchedule,
    SensorDataset,
    default_grid,
    heat_capacity_curve,
    scaling_analysis,
)
from .es import ESConfig, ESState, SearchDistribution
from .ga import GAConfig
from .network import IsingGenome, standard_classes, topology_mask
from .records import (
    BENCHMARK_COLUMNS,
    CURVE_COLUMNS,
    CURVE_SUMMARY_COLUMNS,
    DELTA_DIST_COLUMNS,
    DELTAS_COLUMNS,
    GAMMA_COLUMNS,
    GENERATIONS_COLUMNS,
    PERTURB_COLUMNS,
    SCALING_COLUMNS,
    SCALING_MEDIAN_COLUMNS,
    SCALING_SUMMARY_COLUMNS,
    SENSOR_COLUMNS,
    SENSOR_MODE_COLUMNS,
    SUMMARY_COLUMNS,
    THERMALIZATION_COLUMNS,
    TRACE_COLUMNS,
    UTEST_COLUMNS,
    GenerationRecord,
    append_csv,
    latest_checkpoint,
    load_checkpoint,
    read_config_echo,
    read_csv,
    read_csv_columns,
    save_checkpoint,
    write_config_echo,
    write_csv,
)
from .rng import STREAM_ANALYSIS, STREAM_EVOLVE, STREAM_INIT, STREAM_LIFETIME, child_rng
from .world import WorldConfig, run_lifetime

EXPERIMENT_KINDS = (
    "evolve_ga",
    "evolve_es",
    "criticality_scan",
    "scaling",
    "sensor_modes",
    "generalize",
    "perturb",
    "benchmark",
    "thermalization_sweep",
    "delta_distribution",
)


class ConfigError(ValueError):
    pass


class ResumeMismatch(RuntimeError):
    pass


@dataclass
class ExperimentConfig:
    kind: str = "evolve_ga"
    name: str = ""
    seed: int = 0
    out_dir: str = "out"
    threads: int = 1
    n_replicates: int = 1
    generations: int = 100
    beta_init: float = 1.0
    n_hidden: int = 4
    checkpoint_interval: int = 100
    top_k: int = 30
    delta_every: int = 0          # 0 = never compute per-generation deltas
    world: WorldConfig = field(default_factory=WorldConfig)
    ga: GAConfig = field(default_factory=GAConfig)
    es: ESConfig = field(default_factory=ESConfig)
    schedule: AnnealingSchedule = field(default_factory=AnnealingSchedule)
    grid_points: int = 60
    grid_low: float = -2.0        # log10 of the smallest c_beta
    grid_high: float = 2.0
    sensor_mode: str = "final"    # criticality_scan: final | gen0 | thermalized
    input_runs: list = field(default_factory=list)
    runs_simple: list = field(default_factory=list)
    runs_hard: list = field(default_factory=list)
    t_train: int = 2000
    t_extend: int = 50_000
    f_pert: list = field(default_factory=list)   # empty = default grid
    n_sign_draws: int = 3
    fit_baseline: float = 0.0
    functions: list = field(default_factory=lambda: ["rastrigin", "rosenbrock", "sphere"])
    benchmark_dim: int = 50
    n_runs: int = 25
    budget: int = 10_000
    record_every: int = 10
    thermalization_steps: list = field(default_factory=lambda: [1, 5, 10, 20, 40])
    sizes: list = field(default_factory=lambda: [12, 25, 100])
    ensemble_size: int = 20
    sensor_samples: int = 200

    def grid(self) -> np.ndarray:
        return default_grid(self.grid_points, self.grid_low, self.grid_high)

    def validate(self) -> None:
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.n_replicates < 1 or self.generations < 1 or self.threads < 1:
            raise ConfigError("n_replicates, generations and threads must be >= 1")
        if self.checkpoint_interval < 1:
            raise ConfigError("checkpoint_interval must be >= 1")
        if self.grid_points < 2 or self.grid_low >= self.grid_high:
            raise ConfigError("need an increasing c_beta grid with >= 2 points")
        if self.sensor_mode not in ("final", "gen0", "thermalized"):
            raise ConfigError(f"unknown sensor_mode {self.sensor_mode!r}")
        try:
            self.world.validate()
            self.ga.validate()
            self.es.validate()
            self.schedule.validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.kind in ("evolve_ga", "evolve_es") and self.world.n_thermalize < 1:
            raise ConfigError("evolution requires at least 1 thermalization sweep")
        if self.kind == "thermalization_sweep":
            if not self.thermalization_steps:
                raise ConfigError("thermalization_steps must be non-empty")
            if any(t < 1 for t in self.thermalization_steps):
                raise ConfigError("thermalization steps must be >= 1")
        if self.kind == "evolve_ga" and self.ga.population_size != self.world.n_agents:
            raise ConfigError("GA slot counts must sum to the number of agents")
        if self.kind == "evolve_es" and self.es.n != self.world.n_agents:
            raise ConfigError("ES sample count must equal the number of agents")
        if self.kind == "delta_distribution" and not (self.runs_simple and self.runs_hard):
            raise ConfigError("delta_distribution needs runs_simple and runs_hard")
        if self.kind in ("criticality_scan", "sensor_modes", "generalize", "perturb") and not self.input_runs:
            raise ConfigError(f"{self.kind} needs input_runs")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["es"]["bounds"] = None if self.es.bounds is None else list(self.es.bounds)
        return json.loads(json.dumps(d))

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        kwargs = {}
        nested = {"world": WorldConfig, "ga": GAConfig, "es": ESConfig, "schedule": AnnealingSchedule}
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for name, sub_cls in nested.items():
            if name in data:
                sub = dict(data.pop(name))
                sub_known = {f.name for f in fields(sub_cls)}
                sub_unknown = set(sub) - sub_known
                if sub_unknown:
                    raise ConfigError(f"unknown {name} config keys: {sorted(sub_unknown)}")
                if name == "es" and sub.get("bounds") is not None:
                    sub["bounds"] = tuple(sub["bounds"])
                kwargs[name] = sub_cls(**sub)
        kwargs.update(data)
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    data.pop("schema", None)
    return ExperimentConfig.from_dict(data)


def _experiment_dir(config: ExperimentConfig) -> Path:
    sub = config.kind if not config.name else f"{config.kind}_{config.name}"
    return Path(config.out_dir) / sub


def _comparable(config_dict: dict) -> dict:
    d = dict(config_dict)
    d.pop("threads", None)   # fan-out width never affects results
    return d


def _init_ga_population(config: ExperimentConfig, replicate: int) -> list[IsingGenome]:
    rng = child_rng(config.seed, STREAM_INIT, replicate)
    classes = standard_classes(n_hidden=config.n_hidden)
    from .network import random_genome

    return [random_genome(classes, config.beta_init, rng) for _ in range(config.world.n_agents)]


def _init_es_state(config: ExperimentConfig, replicate: int) -> ESState:
    rng = child_rng(config.seed, STREAM_INIT, replicate)
    classes = standard_classes(n_hidden=config.n_hidden)
    mask = topology_mask(classes)
    d = int(mask.sum())
    mean = rng.uniform(-1.0, 1.0, size=d)
    return ESState(dist=SearchDistribution(mean=mean, mean_beta=float(config.beta_init)))


def _es_vector_to_genome(vector: np.ndarray, beta: float, classes: np.ndarray, mask: np.ndarray) -> IsingGenome:
    n = classes.shape[0]
    weights = np.zeros((n, n))
    weights[mask] = np.clip(vector, -2.0, 2.0)
    return IsingGenome(classes=classes.copy(), mask=mask, adjacency=mask.copy(), weights=weights, beta=float(beta))


def _es_state_to_dict(state: ESState) -> dict:
    return {
        "mean": state.dist.mean.tolist(),
        "mean_beta": state.dist.mean_beta,
        "elite_vectors": None if state.elite_vectors is None else state.elite_vectors.tolist(),
        "elite_betas": None if state.elite_betas is None else state.elite_betas.tolist(),
        "generation": state.generation,
    }


def _es_state_from_dict(d: dict) -> ESState:
    return ESState(
        dist=SearchDistribution(mean=np.array(d["mean"], dtype=float), mean_beta=d["mean_beta"]),
        elite_vectors=None if d["elite_vectors"] is None else np.array(d["elite_vectors"], dtype=float),
        elite_betas=None if d["elite_betas"] is None else np.array(d["elite_betas"], dtype=float),
        generation=int(d["generation"]),
    )


def _truncate_csv(path: Path, max_generation: int) -> None:
    """Drop rows beyond a resumed checkpoint so appended rows line up."""
    if not path.exists():
        return
    header, rows = read_csv(path)
    gen_col = header.index("generation")
    kept = [row for row in rows if int(float(row[gen_col])) < max_generation]
    write_csv(path, header, kept)


def _population_deltas(
    genomes: list[IsingGenome],
    fitness: np.ndarray,
    dataset: SensorDataset,
    config: ExperimentConfig,
    rng: np.random.Generator,
) -> list[tuple[int, float, float]]:
    """(rank, fitness, delta) for the top-k genomes by fitness."""
    order = np.argsort(-np.asarray(fitness), kind="stable")[: config.top_k]
    rows = []
    for rank, idx in enumerate(order):
        curve = heat_capacity_curve(
            genomes[idx], config.grid(), config.schedule, rng.spawn(1)[0], dataset, threads=config.threads
        )
        rows.append((rank, float(fitness[idx]), curve.delta))
    return rows


def _evolve_population(config: ExperimentConfig, replicate: int, run_dir: Path,
                       stop_after: int | None = None) -> None:
    """GA or ES evolution with per-generation derived streams and resume."""
    run_dir.mkdir(parents=True, exist_ok=True)
    echo_path = run_dir / "config.json"
    effective = config.to_dict()
    if echo_path.exists():
        stored = read_config_echo(echo_path)
        if _comparable(stored) != _comparable(effective):
            raise ResumeMismatch(f"{run_dir}: stored config differs from the requested one")
    else:
        write_config_echo(echo_path, effective)

    use_es = config.kind == "evolve_es"
    classes = standard_classes(n_hidden=config.n_hidden)
    mask = topology_mask(classes)

    ckpt_dir = run_dir / "checkpoints"
    start_gen = 0
    es_state = None
    genomes = None
    tags = [ga_mod.TAG_INIT] * config.world.n_agents
    latest = latest_checkpoint(ckpt_dir)
    if latest is not None:
        payload = load_checkpoint(latest)
        start_gen = int(payload["generation"])
        genomes = payload["genomes"]
        if payload.get("lineage"):
            tags = list(payload["lineage"])
        if use_es:
            es_state = _es_state_from_dict(payload["es_state"])
        _truncate_csv(run_dir / "generations.csv", start_gen)
        _truncate_csv(run_dir / "summary.csv", start_gen)
        _truncate_csv(run_dir / "deltas.csv", start_gen)
    else:
        for stale in ("generations.csv", "summary.csv", "deltas.csv"):
            (run_dir / stale).unlink(missing_ok=True)
        if use_es:
            es_state = _init_es_state(config, replicate)
        else:
            genomes = _init_ga_population(config, replicate)

    last_gen = config.generations - 1

    for gen in range(start_gen, config.generations):
        if gen % config.checkpoint_interval == 0 or (stop_after is not None and gen == stop_after):
            save_checkpoint(
                ckpt_dir / f"checkpoint_{gen}.json",
                gen,
                genomes if genomes is not None else [],
                es_state=_es_state_to_dict(es_state) if use_es else None,
                lineage=list(tags),
            )
        if stop_after is not None and gen == stop_after:
            return

        t0 = time.perf_counter()
        rng_life = child_rng(config.seed, STREAM_LIFETIME, replicate, gen)
        rng_evo = child_rng(config.seed, STREAM_EVOLVE, replicate, gen)

        want_delta = config.delta_every > 0 and (gen % config.delta_every == 0 or gen == last_gen)
        want_sensors = gen == 0 or gen == last_gen or want_delta

        if use_es:
            sample = es_mod.sample_population(es_state, rng_evo, config.es)
            genomes = [
                _es_vector_to_genome(sample.vectors[k], sample.betas[k], classes, mask)
                for k in range(config.es.n)
            ]
            tags = sample.tags
        result = run_lifetime(genomes, config.world, rng_life, record_sensors=want_sensors)

        delta_topk = None
        if want_delta:
            dataset = SensorDataset.from_sensor_log(result.sensor_log, PROVENANCE_FINAL)
            rng_delta = child_rng(config.seed, STREAM_ANALYSIS, replicate, gen)
            delta_rows = _population_deltas(genomes, result.fitness, dataset, config, rng_delta)
            append_csv(run_dir / "deltas.csv", DELTAS_COLUMNS,
                       [(gen, r, f, d) for (r, f, d) in delta_rows])
            delta_topk = float(np.mean([d for (_, _, d) in delta_rows]))

        record = GenerationRecord(
            generation=gen,
            fitness=result.fitness,
            lineage=list(tags),
            delta_topk=delta_topk,
            wall_time_s=time.perf_counter() - t0,
        )
        append_csv(run_dir / "generations.csv", GENERATIONS_COLUMNS, record.generation_rows())
        append_csv(run_dir / "summary.csv", SUMMARY_COLUMNS, [record.summary_row()])
        with open(run_dir / "timing.log", "a") as fh:
            fh.write(f"generation {gen}: {record.wall_time_s:.3f}s\n")

        if gen == 0 and result.sensor_log is not None:
            write_csv(run_dir / "sensors_gen0.csv", SENSOR_COLUMNS, result.sensor_log.tolist())
        if gen == last_gen:
            if result.sensor_log is not None:
                write_csv(run_dir / "sensors_final.csv", SENSOR_COLUMNS, result.sensor_log.tolist())
            trace_rows = []
            for t in range(result.energy_trace.shape[0]):
                for a in range(result.energy_trace.shape[1]):
                    trace_rows.append((t, a, result.energy_trace[t, a], result.speed_trace[t, a]))
            write_csv(run_dir / "traces_final.csv", TRACE_COLUMNS, trace_rows)
            save_checkpoint(run_dir / "final.json", gen, genomes, fitness=result.fitness,
                            es_state=_es_state_to_dict(es_state) if use_es else None)
            return

        if use_es:
            es_state = es_mod.update_mean(es_state, sample, result.fitness, config.es)
        else:
            genomes, tags = ga_mod.next_generation(genomes, result.fitness, rng_evo, config.ga)


def run_evolution(config: ExperimentConfig, stop_after: int | None = None) -> Path:
    config.validate()
    base = _experiment_dir(config)
    replicates = list(range(config.n_replicates))

    def one(rep: int) -> None:
        _evolve_population(config, rep, base / f"r{rep:03d}", stop_after=stop_after)

    if config.threads > 1 and len(replicates) > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            list(pool.map(one, replicates))
    else:
        for rep in replicates:
            one(rep)
    return base


def _load_run(run_dir) -> dict:
    """Final population, fitness, config echo and sensor logs of an evolve run."""
    run_dir = Path(run_dir)
    payload = load_checkpoint(run_dir / "final.json")
    echo = read_config_echo(run_dir / "config.json")
    out = {
        "run_id": run_dir.name,
        "genomes": payload["genomes"],
        "fitness": payload["fitness"],
        "config": ExperimentConfig.from_dict(echo),
    }
    for key, fname in (("sensors_final", "sensors_final.csv"), ("sensors_gen0", "sensors_gen0.csv")):
        path = run_dir / fname
        if path.exists():
            cols = read_csv_columns(path)
            out[key] = np.column_stack([cols[c] for c in SENSOR_COLUMNS])
    return out


def _run_dataset(run: dict, mode: str) -> SensorDataset | None:
    if mode == "thermalized":
        return None
    key = "sensors_final" if mode == "final" else "sensors_gen0"
    if key not in run:
        raise ConfigError(f"run {run['run_id']} has no {key} log")
    provenance = PROVENANCE_FINAL if mode == "final" else PROVENANCE_GEN0
    return SensorDataset.from_sensor_log(run[key], provenance)


def criticality_scan(config: ExperimentConfig) -> Path:
    config.validate()
    out = _experiment_dir(config)
    out.mkdir(parents=True, exist_ok=True)
    write_config_echo(out / "config.json", config.to_dict())
    grid = config.grid()
    curve_rows = []
    summary_rows = []
    for idx, run_dir in enumerate(config.input_runs):
        run = _load_run(run_dir)
        dataset = _run_dataset(run, config.sensor_mode)
        order = np.argsort(-run["fitness"], kind="stable")[: config.top_k]
        for rank, gi in enumerate(order):
            genome_id = f"{run['run_id']}:{rank}"
            rng = child_rng(config.seed, STREAM_ANALYSIS, idx, rank)
            curve = heat_capacity_curve(run["genomes"][gi], grid, config.schedule, rng,
                                        dataset, threads=config.threads)
            for k in range(grid.shape[0]):
                curve_rows.append((genome_id, grid[k], curve.values[k]))
            summary_rows.append((genome_id, curve.c_beta_crit, curve.delta, config.sensor_mode))
    write_csv(out / "curves.csv", CURVE_COLUMNS, curve_rows)
    write_csv(out / "curve_summary.csv", CURVE_SUMMARY_COLUMNS, summary_rows)
    return out


def sensor_modes_experiment(config: ExperimentConfig) -> Path:
    from .criticality import compare_sensor_modes

    config.validate()
    out = _experiment_dir(config)
    out.mkdir(parents=True, exist_ok=True)
    write_config_echo(out / "config.json", config.to_dict())
    genomes, gen0_sets, final_sets = [], [], []
    for run_dir in config.input_runs:
        run = _load_run(run_dir)
        best = int(np.argmax(run["fitness"]))
        genomes.append(run["genomes"][best])
        gen0_sets.append(_run_dataset(run, "gen0"))
        final_sets.append(_run_dataset(run, "final"))
    grid = config.grid()
    comparison = compare_sensor_modes(
        genomes, gen0_sets, final_sets, config.schedule,
        child_rng(config.seed, STREAM_ANALYSIS, 0), grid, threads=config.threads
    )
    rows = []
    for mode, values in comparison.mean_values.items():
        for k in range(grid.shape[0]):
            rows.append((mode, grid[k], values[k]))
    write_csv(out / "sensor_modes.csv", SENSOR_MODE_COLUMNS, rows)
    return out


def scaling_experiment(config: ExperimentConfig) -> Path:
    config.validate()
    out = _experiment_dir(config)
    out.mkdir(parents=True, exist_ok=True)
    write_config_echo(out / "config.json", config.to_dict())
    grid = config.grid()
    result = scaling_analysis(
        sizes=config.sizes,
        ensemble_size=config.ensemble_size,
        schedule=config.schedule,
        rng=child_rng(config.seed, STREAM_ANALYSIS, 0),
        grid=grid,
        sensor_samples=config.sensor_samples,
        threads=config.threads,
    )
    curve_rows, summary_rows, median_rows = [], [], []
    for n in result.sizes:
        for gi, curve in enumerate(result.curves[n]):
            for k in range(grid.shape[0]):
                curve_rows.append((n, gi, grid[k], curve.values[k]))
            summary_rows.append((n, gi, curve.c_beta_crit, float(curve.values.max())))
        median_rows.append((n, result.median_peak[n], result.median_peak_beta[n]))
    write_csv(out / "scaling_curves.csv", SCALING_COLUMNS, curve_rows)
    write_csv(out / "scaling_summary.csv", SCALING_SUMMARY_COLUMNS, summary_rows)
    write_csv(out / "scaling_medians.csv", SCALING_MEDIAN_COLUMNS, median_rows)
    return out


def generalize_experiment(config: ExperimentConfig) -> Path:
    config.validate()
    out = _experiment_dir(config)
    out.mkdir(parents=True, exist_ok=True)
    write_config_echo(out / "config.json", config.to_dict())
    rows = []
    for idx, run_dir in enumerate(config.input_runs):
        run = _load_run(run_dir)
        g = generalizability(
            run["genomes"],
            run["config"].world,
            lambda: child_rng(config.seed, STREAM_ANALYSIS, idx),
            t_train=config.t_train,
            t_extend=config.t_extend,
        )
        cluster = 1 if g.gamma_t < 0.5 else 2
        rows.append((run["run_id"], g.gamma_t, g.mean_energy_train, g.mean_energy_extend, cluster))
    write_csv(out / "gamma.csv", GAMMA_COLUMNS, rows)
    return out


def perturb_experiment(config: ExperimentConfig) -> Path:
    config.validate()
    out = _experiment_dir(config)
    out.mkdir(parents=True, exist_ok=True)
    write_config_echo(out / "config.json", config.to_dict())
    grid = np.array(config.f_pert, dtype=float) if config.f_pert else default_f_pert_grid()
    means = np.zeros(grid.shape[0])
    count = 0
    for idx, run_dir in enumerate(config.input_runs):
        run = _load_run(run_dir)
        world = run["config"].world
        for mi, f in enumerate(grid):
            for draw in range(config.n_sign_draws):
                rng_pert = child_rng(config.seed, STREAM_ANALYSIS, idx, mi, draw, 0)
                perturbed = [perturb_genome(g, float(f), rng_pert) for g in run["genomes"]]
                rng_life = child_rng(config.seed, STREAM_ANALYSIS, idx, mi, draw, 1)
                res = run_lifetime(perturbed, world, rng_life)
                means[mi] += float(res.fitness.mean())
        count += config.n_sign_draws
    means /= max(count, 1)
    sweep = PerturbationSweep(f_pert=grid, mean_fitness=means)
    try:
        fit = decay_exponent(sweep, baseline=config.fit_baseline)
        alpha = fit.alpha
    except ValueError:
        alpha = float("nan")
    sweep.alpha_fit = alpha
    write_csv(out / "perturb.csv", PERTURB_COLUMNS,
              [(grid[i], means[i], alpha) for i in range(grid.shape[0])])
    return out


def benchmark_experiment(config: ExperimentConfig) -> Path:
    config.validate()
    out = _experiment_dir(config)
    out.mkdir(parents=True, exist_ok=True)
    write_config_echo(out / "config.json", config.to_dict())
    es_cfg = ESConfig(**{**config.es.__dict__, "bounds": None, "evolve_beta": False})
    result = run_comparison(
        functions=config.functions,
        dim=config.benchmark_dim,
        n_runs=config.n_runs,
        budget=config.budget,
        seed=config.seed,
        ga_config=config.ga,
        es_config=es_cfg,
    )
    rows = []
    for kind in result.functions:
        for alg in result.algorithms:
            raw = result.best_so_far[(kind, alg)]
            norm = result.normalized[(kind, alg)]
            for r in range(raw.shape[0]):
                for g in range(0, config.budget + 1, config.record_every):
                    rows.append((kind, alg, r, g, raw[r, g], norm[r, g]))
                if config.budget % config.record_every != 0:
                    rows.append((kind, alg, r, config.budget, raw[r, -1], norm[r, -1]))
    write_csv(out / "benchmark.csv", BENCHMARK_COLUMNS, rows)
    return out


def thermalization_sweep(config: ExperimentConfig) -> Path:
    config.validate()
    out = _experiment_dir(config)
    out.mkdir(parents=True, exist_ok=True)
    write_config_echo(out / "config.json", config.to_dict())
    rows = []
    for steps in config.thermalization_steps:
        sub = ExperimentConfig.from_dict({
            **config.to_dict(),
            "kind": "evolve_ga",
            "name": "",
            "out_dir": str(out / f"t{steps:03d}"),
            "world": {**config.world.__dict__, "n_thermalize": int(steps), "task": "simple"},
            "thermalization_steps": [1],
        })
        base = run_evolution(sub)
        for rep in range(config.n_replicates):
            cols = read_csv_columns(base / f"r{rep:03d}" / "summary.csv")
            for k in range(cols["generation"].shape[0]):
                rows.append((steps, rep, int(cols["generation"][k]), cols["best_fitness"][k],
                             cols["mean_fitness"][k], cols["median_fitness"][k]))
    write_csv(out / "comparison.csv", THERMALIZATION_COLUMNS, rows)
    return out


def delta_distribution(config: ExperimentConfig) -> Path:
    config.validate()
    out = _experiment_dir(config)
    out.mkdir(parents=True, exist_ok=True)
    write_config_echo(out / "config.json", config.to_dict())
    grid = config.grid()
    rows = []
    samples = {"simple": [], "hard": []}
    for task, run_dirs in (("simple", config.runs_simple), ("hard", config.runs_hard)):
        for idx, run_dir in enumerate(run_dirs):
            run = _load_run(run_dir)
            if run["fitness"].shape[0] < config.top_k:
                raise ConfigError(f"run {run['run_id']} has fewer than {config.top_k} agents")
            dataset = _run_dataset(run, "final")
            rng = child_rng(config.seed, STREAM_ANALYSIS, 0 if task == "simple" else 1, idx)
            deltas = _population_deltas(run["genomes"], run["fitness"], dataset, config, rng)
            mean_delta = float(np.mean([d for (_, _, d) in deltas]))
            samples[task].append(mean_delta)
            rows.append((f"{task}:{run['run_id']}", task, mean_delta))
    u, p = mann_whitney_u(samples["hard"], samples["simple"], alternative="greater")
    write_csv(out / "delta_dist.csv", DELTA_DIST_COLUMNS, rows)
    write_csv(out / "utest.csv", UTEST_COLUMNS,
              [(u, p, len(samples["hard"]), len(samples["simple"]), "hard>simple")])
    return out


_DISPATCH = {
    "evolve_ga": run_evolution,
    "evolve_es": run_evolution,
    "criticality_scan": criticality_scan,
    "scaling": scaling_experiment,
    "sensor_modes": sensor_modes_experiment,
    "generalize": generalize_experiment,
    "perturb": perturb_experiment,
    "benchmark": benchmark_experiment,
    "thermalization_sweep": thermalization_sweep,
    "delta_distribution": delta_distribution,
}


def run_experiment(config: ExperimentConfig) -> Path:
    config.validate()
    return _DISPATCH[config.kind](config)


def replay(run_dir, out_dir) -> tuple[bool, list]:
    """Re-run an experiment from its config echo and compare all CSV bytes."""
    run_dir = Path(run_dir)
    echo = read_config_echo(run_dir / "config.json")
    config = ExperimentConfig.from_dict(echo)
    # evolve runs store the per-experiment config inside each replicate dir;
    # replaying one replicate directory replays the whole experiment.
    if config.kind in ("evolve_ga", "evolve_es"):
        base = run_dir.parent
    else:
        base = run_dir
    config.out_dir = str(out_dir)
    new_base = run_experiment(config)
    diffs = []
    for old in sorted(base.rglob("*.csv")):
        rel = old.relative_to(base)
        new = new_base / rel
        if not new.exists():
            diffs.append(str(rel) + " (missing)")
        elif old.read_bytes() != new.read_bytes():
            diffs.append(str(rel))
    return (not diffs), diffs
