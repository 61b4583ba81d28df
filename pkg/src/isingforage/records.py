"""Versioned on-disk formats: CSV logs, genome checkpoints, config echoes.

Every CSV starts with a `#schema=v1` comment line followed by the header.
Floats are written with shortest round-trip repr, so a rerun with the same
seed produces byte-identical files.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .network import IsingGenome, genome_from_record, genome_to_record

SCHEMA_VERSION = "v1"
SCHEMA_LINE = f"#schema={SCHEMA_VERSION}"
CHECKPOINT_SCHEMA = "checkpoint-v1"
CONFIG_SCHEMA = "config-v1"

GENERATIONS_COLUMNS = ("generation", "agent_id", "fitness", "lineage_op")
SUMMARY_COLUMNS = ("generation", "best_fitness", "mean_fitness", "median_fitness", "delta_topk")
TRACE_COLUMNS = ("step", "agent_id", "energy", "speed")
SENSOR_COLUMNS = ("step", "agent_id", "theta", "dist", "v", "E")
CURVE_COLUMNS = ("genome_id", "c_beta", "C_H")
CURVE_SUMMARY_COLUMNS = ("genome_id", "c_beta_crit", "delta", "sensor_mode")
BENCHMARK_COLUMNS = ("function", "algorithm", "run", "generation", "raw_loss", "normalized_loss")
GAMMA_COLUMNS = ("population_id", "gamma", "mean_energy_train", "mean_energy_extend", "cluster")
PERTURB_COLUMNS = ("f_pert", "mean_fitness", "alpha_fit")
DELTA_DIST_COLUMNS = ("run_id", "task", "delta_mean")
UTEST_COLUMNS = ("statistic", "p_value", "n_a", "n_b", "alternative")
THERMALIZATION_COLUMNS = ("thermalization_steps", "replicate", "generation",
                          "best_fitness", "mean_fitness", "median_fitness")
SCALING_COLUMNS = ("network_size", "genome_id", "c_beta", "C_H")
SCALING_SUMMARY_COLUMNS = ("network_size", "genome_id", "peak_c_beta", "peak_C_H")
SCALING_MEDIAN_COLUMNS = ("network_size", "median_peak_C_H", "median_peak_beta")
SENSOR_MODE_COLUMNS = ("sensor_mode", "c_beta", "mean_C_H")
DELTAS_COLUMNS = ("generation", "rank", "fitness", "delta")


class SchemaError(ValueError):
    pass


def _format(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path, columns, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(SCHEMA_LINE + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_format(v) for v in row) + "\n")


def append_csv(path, columns, rows) -> None:
    path = Path(path)
    if not path.exists():
        write_csv(path, columns, rows)
        return
    with open(path, "a") as fh:
        for row in rows:
            fh.write(",".join(_format(v) for v in row) + "\n")


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    """Header and raw string rows; rejects files without the schema line."""
    with open(path) as fh:
        first = fh.readline().rstrip("\n")
        if first != SCHEMA_LINE:
            raise SchemaError(f"{path}: expected '{SCHEMA_LINE}', found {first!r}")
        header = fh.readline().rstrip("\n").split(",")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    return header, rows


def read_csv_columns(path) -> dict:
    """CSV as a dict of numpy arrays (floats where possible)."""
    header, rows = read_csv(path)
    out = {}
    for k, name in enumerate(header):
        col = [row[k] for row in rows]
        try:
            out[name] = np.array([float(v) for v in col])
        except ValueError:
            out[name] = np.array(col)
    return out


@dataclass
class GenerationRecord:
    """Per-generation log entry (wall time stays out of the CSVs so reruns
    are byte-identical; it goes to the plain-text timing log)."""

    generation: int
    fitness: np.ndarray
    lineage: list
    delta_topk: float | None = None
    wall_time_s: float = 0.0

    @property
    def best(self) -> float:
        return float(self.fitness.max())

    @property
    def mean(self) -> float:
        return float(self.fitness.mean())

    @property
    def median(self) -> float:
        return float(np.median(self.fitness))

    def generation_rows(self):
        return [
            (self.generation, a, float(self.fitness[a]), self.lineage[a])
            for a in range(self.fitness.shape[0])
        ]

    def summary_row(self):
        delta = "" if self.delta_topk is None else repr(float(self.delta_topk))
        return (self.generation, self.best, self.mean, self.median, delta)


def save_checkpoint(path, generation: int, genomes: list[IsingGenome],
                    fitness: np.ndarray | None = None, es_state: dict | None = None,
                    lineage: list | None = None) -> None:
    payload = {
        "schema": CHECKPOINT_SCHEMA,
        "generation": int(generation),
        "genomes": [genome_to_record(g) for g in genomes],
        "fitness": None if fitness is None else [float(f) for f in fitness],
        "es_state": es_state,
        "lineage": lineage,
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_checkpoint(path) -> dict:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("schema") != CHECKPOINT_SCHEMA:
        raise SchemaError(f"{path}: unsupported checkpoint schema {payload.get('schema')!r}")
    payload["genomes"] = [genome_from_record(rec) for rec in payload["genomes"]]
    if payload.get("fitness") is not None:
        payload["fitness"] = np.array(payload["fitness"], dtype=float)
    return payload


def latest_checkpoint(ckpt_dir) -> Path | None:
    ckpt_dir = Path(ckpt_dir)
    if not ckpt_dir.is_dir():
        return None
    best = None
    best_gen = -1
    for p in ckpt_dir.glob("checkpoint_*.json"):
        try:
            gen = int(p.stem.split("_")[1])
        except (IndexError, ValueError):
            continue
        if gen > best_gen:
            best, best_gen = p, gen
    return best


def write_config_echo(path, config_dict: dict) -> None:
    payload = {"schema": CONFIG_SCHEMA, **config_dict}
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_config_echo(path) -> dict:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("schema") != CONFIG_SCHEMA:
        raise SchemaError(f"{path}: unsupported config schema {payload.get('schema')!r}")
    payload.pop("schema")
    return payload


def output_root(default: str = "out") -> str:
    """Output root directory, overridable via ISINGFORAGE_OUT."""
    return os.environ.get("ISINGFORAGE_OUT", default)
