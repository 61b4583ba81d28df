"""Evolving foraging agents controlled by generalized Ising networks."""

from .analysis import (
    GeneralizabilityResult,
    decay_exponent,
    gamma_from_traces,
    generalizability,
    mann_whitney_u,
    operator_histogram,
    perturb_genome,
)
from .benchmarks import BenchmarkObjective, evaluate, make_objective, run_comparison
from .criticality import (
    AnnealingSchedule,
    HeatCapacityCurve,
    SensorDataset,
    compare_sensor_modes,
    default_grid,
    estimate_var_energy,
    heat_capacity_curve,
    scaling_analysis,
)
from .es import ESConfig, ESState, SearchDistribution, rank_fitness, run_es_generation
from .ga import GAConfig, mate, mutate, next_generation
from .network import (
    IsingGenome,
    MotorCommand,
    NeuronClass,
    delta_energy,
    flip_probability,
    glauber_sweep,
    init_state,
    network_energy,
    random_genome,
    read_motors,
    standard_classes,
    thermalize,
    topology_mask,
)
from .rng import child_rng
from .runner import ExperimentConfig, run_experiment
from .world import Agent, SensorReading, WorldConfig, WorldState, run_lifetime, sense

__all__ = [
    "Agent",
    "AnnealingSchedule",
    "BenchmarkObjective",
    "ESConfig",
    "ESState",
    "ExperimentConfig",
    "GAConfig",
    "GeneralizabilityResult",
    "HeatCapacityCurve",
    "IsingGenome",
    "MotorCommand",
    "NeuronClass",
    "SearchDistribution",
    "SensorDataset",
    "SensorReading",
    "WorldConfig",
    "WorldState",
    "child_rng",
    "compare_sensor_modes",
    "decay_exponent",
    "default_grid",
    "delta_energy",
    "estimate_var_energy",
    "evaluate",
    "flip_probability",
    "gamma_from_traces",
    "generalizability",
    "glauber_sweep",
    "heat_capacity_curve",
    "init_state",
    "make_objective",
    "mann_whitney_u",
    "mate",
    "mutate",
    "network_energy",
    "next_generation",
    "operator_histogram",
    "perturb_genome",
    "random_genome",
    "rank_fitness",
    "read_motors",
    "run_comparison",
    "run_es_generation",
    "run_experiment",
    "run_lifetime",
    "scaling_analysis",
    "sense",
    "standard_classes",
    "thermalize",
    "topology_mask",
]
