"""Generalized Ising network controllers.

A network of N spins s_i with couplings J masked by an adjacency matrix A has
energy

    e(s) = -sum_ij A_ij J_ij s_i s_j        (all ordered pairs)

and relaxes by sequential heat-bath updates: a proposed flip of spin i changes
the energy by de = 2 s_i sum_j (A_ij J_ij + A_ji J_ji) s_j and is accepted
with probability 1 / (1 + exp(beta * de)), so energy-lowering flips are
favored.  Sensor neurons hold clamped real values in [-1, 1] and are never
updated; hidden and motor neurons are binary.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from . import kernels

GENOME_SCHEMA = "genome-v1"

WEIGHT_LOW = -2.0
WEIGHT_HIGH = 2.0


class NeuronClass(IntEnum):
    SENSOR = 0
    HIDDEN = 1
    MOTOR = 2


class MotorCommand(IntEnum):
    DECELERATE = -1
    NOOP = 0
    ACCELERATE = 1


_CLASS_NAMES = {NeuronClass.SENSOR: "sensor", NeuronClass.HIDDEN: "hidden", NeuronClass.MOTOR: "motor"}
_CLASS_CODES = {v: k for k, v in _CLASS_NAMES.items()}


def standard_classes(n_hidden: int = 4, n_sensors: int = 4, n_motors: int = 4) -> np.ndarray:
    """Neuron class layout: sensors first, then hidden, motors last."""
    return np.array(
        [NeuronClass.SENSOR] * n_sensors + [NeuronClass.HIDDEN] * n_hidden + [NeuronClass.MOTOR] * n_motors,
        dtype=np.int8,
    )


def topology_mask(classes: np.ndarray) -> np.ndarray:
    """Admissible edges: no self-loops, no sensor-motor links in either direction."""
    classes = np.asarray(classes)
    n = classes.shape[0]
    allowed = np.ones((n, n), dtype=bool)
    np.fill_diagonal(allowed, False)
    sens = classes == NeuronClass.SENSOR
    mot = classes == NeuronClass.MOTOR
    allowed[np.ix_(sens, mot)] = False
    allowed[np.ix_(mot, sens)] = False
    return allowed


@dataclass
class IsingGenome:
    """Evolvable unit: adjacency A, weights J in [-2, 2], inverse temperature beta."""

    classes: np.ndarray   # int8 codes, one NeuronClass per neuron
    mask: np.ndarray      # bool (N, N), fixed admissible support
    adjacency: np.ndarray  # bool (N, N), subset of mask
    weights: np.ndarray   # float (N, N)
    beta: float

    @property
    def n(self) -> int:
        return self.classes.shape[0]

    def sensor_indices(self) -> np.ndarray:
        return np.flatnonzero(self.classes == NeuronClass.SENSOR).astype(np.int64)

    def free_indices(self) -> np.ndarray:
        return np.flatnonzero(self.classes != NeuronClass.SENSOR).astype(np.int64)

    def motor_indices(self) -> np.ndarray:
        return np.flatnonzero(self.classes == NeuronClass.MOTOR).astype(np.int64)

    def coupling(self) -> np.ndarray:
        """Effective coupling matrix W = A * J."""
        return np.where(self.adjacency, self.weights, 0.0)

    def copy(self) -> "IsingGenome":
        return IsingGenome(
            classes=self.classes.copy(),
            mask=self.mask,
            adjacency=self.adjacency.copy(),
            weights=self.weights.copy(),
            beta=float(self.beta),
        )

    def validate(self) -> None:
        n = self.n
        if self.mask.shape != (n, n) or self.adjacency.shape != (n, n) or self.weights.shape != (n, n):
            raise ValueError("genome matrices must be square with side len(classes)")
        if self.adjacency[~self.mask].any():
            raise ValueError("adjacency contains edges outside the topology mask")
        if np.abs(self.weights).max(initial=0.0) > WEIGHT_HIGH + 1e-12:
            raise ValueError("weights exceed [-2, 2]")
        if not self.beta > 0.0:
            raise ValueError("beta must be positive")


def random_genome(
    classes: np.ndarray,
    beta: float,
    rng: np.random.Generator,
    weight_low: float = -1.0,
    weight_high: float = 1.0,
) -> IsingGenome:
    """Unevolved genome: full admissible adjacency, weights uniform on [-1, 1]."""
    mask = topology_mask(classes)
    n = classes.shape[0]
    weights = rng.uniform(weight_low, weight_high, size=(n, n))
    weights[~mask] = 0.0
    return IsingGenome(classes=classes.copy(), mask=mask, adjacency=mask.copy(), weights=weights, beta=float(beta))


def init_state(genome: IsingGenome, rng: np.random.Generator, sensor_values: np.ndarray | None = None) -> np.ndarray:
    """Fresh state: non-sensor spins uniform +-1, sensors clamped to given values (default 0)."""
    s = np.zeros(genome.n)
    for i in genome.free_indices():
        s[i] = 1.0 if rng.random() < 0.5 else -1.0
    if sensor_values is not None:
        s[genome.sensor_indices()] = sensor_values
    return s


def network_energy(genome: IsingGenome, state: np.ndarray) -> float:
    """e = -sum_ij A_ij J_ij s_i s_j."""
    state = np.asarray(state, dtype=float)
    if state.shape != (genome.n,):
        raise ValueError(f"state length {state.shape} does not match network size {genome.n}")
    w = genome.coupling()
    return -float(state @ (w @ state))


def delta_energy(genome: IsingGenome, state: np.ndarray, i: int) -> float:
    """Energy change from flipping spin i, via its local field."""
    state = np.asarray(state, dtype=float)
    if state.shape != (genome.n,):
        raise ValueError(f"state length {state.shape} does not match network size {genome.n}")
    if genome.classes[i] == NeuronClass.SENSOR:
        raise ValueError(f"neuron {i} is a sensor and cannot flip")
    w = genome.coupling()
    return 2.0 * float(state[i]) * float((w[i, :] + w[:, i]) @ state)


def flip_probability(delta_e: float, beta: float) -> float:
    """p = 1 / (1 + exp(beta * delta_e)), saturated for |beta * delta_e| > 700."""
    if not beta > 0.0:
        raise ValueError("beta must be positive")
    x = beta * delta_e
    if x > kernels.EXP_CLIP:
        return 0.0
    if x < -kernels.EXP_CLIP:
        return 1.0
    return 1.0 / (1.0 + math.exp(x))


def glauber_sweep(
    genome: IsingGenome,
    state: np.ndarray,
    rng: np.random.Generator,
    dynamics: str = "glauber",
    legacy_sign: bool = False,
) -> np.ndarray:
    """One sweep: every non-sensor neuron visited once in a fresh random order.

    Each visited neuron consumes exactly one uniform for its flip decision,
    after the len(free)-1 integers of the order permutation.  Sensors are
    untouched.  `dynamics` selects the heat-bath (default) or Metropolis
    acceptance; `legacy_sign` evaluates the acceptance at -beta*delta_e, i.e.
    the literal old-minus-new energy difference convention.
    """
    if dynamics not in ("glauber", "metropolis"):
        raise ValueError(f"unknown dynamics {dynamics!r}")
    s = np.array(state, dtype=float)
    kernels.sweep(genome.coupling(), s, genome.free_indices(), float(genome.beta),
                  dynamics == "metropolis", legacy_sign, rng)
    return s


def thermalize(
    genome: IsingGenome,
    state: np.ndarray,
    n_iterations: int,
    rng: np.random.Generator,
    dynamics: str = "glauber",
    legacy_sign: bool = False,
) -> np.ndarray:
    """Apply n_iterations sweeps (default protocol uses 10 between sensor updates)."""
    if n_iterations < 0:
        raise ValueError("n_iterations must be >= 0")
    if dynamics not in ("glauber", "metropolis"):
        raise ValueError(f"unknown dynamics {dynamics!r}")
    s = np.array(state, dtype=float)
    kernels.run_sweeps(genome.coupling(), s, genome.free_indices(), float(genome.beta),
                       int(n_iterations), dynamics == "metropolis", legacy_sign, rng)
    return s


def read_motors(genome: IsingGenome, state: np.ndarray) -> tuple[MotorCommand, MotorCommand]:
    """Decode (linear, rotational) commands from the two motor pairs.

    A pair in agreement accelerates (+1,+1) or decelerates (-1,-1); a pair in
    disagreement does nothing.
    """
    m = genome.motor_indices()
    if m.shape[0] != 4:
        raise ValueError("motor readout expects exactly 4 motor neurons")

    def unit(a: float, b: float) -> MotorCommand:
        if a > 0 and b > 0:
            return MotorCommand.ACCELERATE
        if a < 0 and b < 0:
            return MotorCommand.DECELERATE
        return MotorCommand.NOOP

    return unit(state[m[0]], state[m[1]]), unit(state[m[2]], state[m[3]])


def genome_to_record(genome: IsingGenome) -> dict:
    """Flat self-describing record (matrices row-major)."""
    return {
        "schema": GENOME_SCHEMA,
        "N": genome.n,
        "classes": [_CLASS_NAMES[NeuronClass(c)] for c in genome.classes],
        "mask": genome.mask.astype(int).ravel().tolist(),
        "A": genome.adjacency.astype(int).ravel().tolist(),
        "J": genome.weights.ravel().tolist(),
        "beta": float(genome.beta),
    }


def genome_from_record(rec: dict) -> IsingGenome:
    if rec.get("schema") != GENOME_SCHEMA:
        raise ValueError(f"unsupported genome schema {rec.get('schema')!r}")
    n = int(rec["N"])
    classes = np.array([_CLASS_CODES[c] for c in rec["classes"]], dtype=np.int8)
    mask = np.array(rec["mask"], dtype=bool).reshape(n, n)
    adj = np.array(rec["A"], dtype=bool).reshape(n, n)
    weights = np.array(rec["J"], dtype=float).reshape(n, n)
    genome = IsingGenome(classes=classes, mask=mask, adjacency=adj, weights=weights, beta=float(rec["beta"]))
    genome.validate()
    return genome


def save_genome(path, genome: IsingGenome) -> None:
    with open(path, "w") as fh:
        json.dump(genome_to_record(genome), fh)


def load_genome(path) -> IsingGenome:
    with open(path) as fh:
        return genome_from_record(json.load(fh))
