"""Shared 2D foraging environment with periodic boundaries.

Agents gain energy by eating food particles (conserved in number: every eaten
particle respawns uniformly at random) and pay an energy cost proportional to
their speed.  In the hard task food is only consumed below a speed threshold.
Fitness is the mean energy over the lifespan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .network import IsingGenome, MotorCommand


@dataclass
class WorldConfig:
    world_size: float = 100.0
    n_agents: int = 50
    n_food: int = 100
    lifespan: int = 2000
    e_init: float = 2.0
    task: str = "simple"          # "simple" | "hard"
    v_thresh: float = 0.05        # hard task: max speed at which food can be eaten
    eat_radius: float = 1.0
    food_energy: float = 1.0
    move_cost_coeff: float = 0.01  # energy lost per unit speed per step
    a_lin: float = 0.05
    a_rot: float = 0.1
    v_max: float = 1.0
    drag: float = 0.98
    e_scale: float = 10.0         # saturation scale of the energy sensor
    n_thermalize: int = 10        # network sweeps between sensing and acting
    dynamics: str = "glauber"
    legacy_sign: bool = False

    def validate(self) -> None:
        for name in ("world_size", "n_agents", "n_food", "lifespan", "e_init", "v_thresh",
                     "eat_radius", "food_energy", "a_lin", "a_rot", "v_max", "e_scale"):
            if not getattr(self, name) > 0:
                raise ValueError(f"world config field {name} must be positive")
        if self.move_cost_coeff < 0 or self.drag < 0 or self.n_thermalize < 0:
            raise ValueError("move_cost_coeff, drag and n_thermalize must be >= 0")
        if self.task not in ("simple", "hard"):
            raise ValueError(f"unknown task {self.task!r}")
        if self.dynamics not in ("glauber", "metropolis"):
            raise ValueError(f"unknown dynamics {self.dynamics!r}")
        if not self.v_thresh < self.v_max:
            raise ValueError("v_thresh must be below v_max")


@dataclass
class Agent:
    position: np.ndarray   # (2,) wrapped into [0, world_size)^2
    heading: float
    speed: float
    energy: float
    genome_ref: int = 0


class SensorReading(NamedTuple):
    theta_food: float   # signed bearing to closest food / pi
    d_food: float       # normalized torus distance
    v_norm: float
    e_norm: float

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=float)


@dataclass
class WorldState:
    agents: list
    food: np.ndarray      # (n_food, 2)
    step: int = 0


@dataclass
class LifetimeResult:
    fitness: np.ndarray        # (n_agents,)
    energy_trace: np.ndarray   # (lifespan + 1, n_agents), row 0 = initial energy
    speed_trace: np.ndarray    # (lifespan + 1, n_agents)
    sensor_log: np.ndarray | None = None  # (lifespan * n_agents, 6): step, agent, theta, dist, v, E


def torus_diff(a: float, b: float, size: float) -> float:
    """Shortest signed displacement b - a on a periodic axis."""
    return (b - a + 0.5 * size) % size - 0.5 * size


def torus_distance(p: np.ndarray, q: np.ndarray, size: float) -> float:
    dx = torus_diff(p[0], q[0], size)
    dy = torus_diff(p[1], q[1], size)
    return math.sqrt(dx * dx + dy * dy)


def nearest_food(world: WorldState, position: np.ndarray, size: float) -> tuple[int, float]:
    """Closest particle by torus metric; ties broken by lowest index."""
    if world.food.shape[0] == 0:
        raise ValueError("world has no food")
    best, best_d2 = -1, float("inf")
    for f in range(world.food.shape[0]):
        dx = torus_diff(position[0], world.food[f, 0], size)
        dy = torus_diff(position[1], world.food[f, 1], size)
        d2 = dx * dx + dy * dy
        if d2 < best_d2:
            best, best_d2 = f, d2
    return best, math.sqrt(best_d2)


def sense(world: WorldState, agent: Agent, config: WorldConfig) -> SensorReading:
    """Bearing/distance to the closest food plus own speed and energy, all in [-1, 1]."""
    fi, dist = nearest_food(world, agent.position, config.world_size)
    dx = torus_diff(agent.position[0], world.food[fi, 0], config.world_size)
    dy = torus_diff(agent.position[1], world.food[fi, 1], config.world_size)
    bearing = math.atan2(dy, dx) - agent.heading
    bearing = (bearing + math.pi) % (2.0 * math.pi) - math.pi
    theta = bearing / math.pi
    d_ref = config.world_size / 2.0
    d_norm = min(max(2.0 * dist / d_ref - 1.0, -1.0), 1.0)
    v_norm = 2.0 * agent.speed / config.v_max - 1.0
    e_norm = min(max(2.0 * math.tanh(agent.energy / config.e_scale) - 1.0, -1.0), 1.0)
    return SensorReading(theta, d_norm, v_norm, e_norm)


def step_agent(agent: Agent, commands: tuple[MotorCommand, MotorCommand], config: WorldConfig) -> Agent:
    """Apply motor commands: turn, change speed, advance with wrap, pay movement cost."""
    lin, rot = commands
    heading = agent.heading + config.a_rot * float(rot)
    v = min(max(config.drag * agent.speed + config.a_lin * float(lin), 0.0), config.v_max)
    x = (agent.position[0] + v * math.cos(heading)) % config.world_size
    y = (agent.position[1] + v * math.sin(heading)) % config.world_size
    return Agent(
        position=np.array([x, y]),
        heading=heading,
        speed=v,
        energy=agent.energy - config.move_cost_coeff * v,
        genome_ref=agent.genome_ref,
    )


def consume(
    world: WorldState,
    agent: Agent,
    config: WorldConfig,
    rng: np.random.Generator,
) -> tuple[WorldState, Agent, bool]:
    """Eat the nearest particle in reach (at most one), respawning a replacement.

    In the hard task eating additionally requires speed <= v_thresh.  Consumes
    two uniforms for the respawn position when a particle is eaten.
    """
    fi, dist = nearest_food(world, agent.position, config.world_size)
    can_eat = dist <= config.eat_radius and (config.task == "simple" or agent.speed <= config.v_thresh)
    if not can_eat:
        return world, agent, False
    food = world.food.copy()
    food[fi, 0] = rng.random() * config.world_size
    food[fi, 1] = rng.random() * config.world_size
    new_agent = Agent(
        position=agent.position.copy(),
        heading=agent.heading,
        speed=agent.speed,
        energy=agent.energy + config.food_energy,
        genome_ref=agent.genome_ref,
    )
    return WorldState(agents=world.agents, food=food, step=world.step), new_agent, True


def run_lifetime(
    genomes: list[IsingGenome],
    config: WorldConfig,
    rng: np.random.Generator,
    record_sensors: bool = False,
) -> LifetimeResult:
    """Simulate one shared-world lifetime for the whole population.

    Per step, agents act one at a time in a fresh random order: sense (sensor
    neurons clamped to the reading), thermalize the network, read the motors,
    move, then try to eat.  Fitness is the mean energy over steps 1..lifespan.

    RNG draw order (the compiled kernel and the reference implementation in
    the tests both follow it): food positions (x, y per particle), then per
    agent x, y, heading, then one uniform per non-sensor spin; per step a
    Fisher-Yates shuffle of the agent order, then per agent the thermalization
    sweeps and, if it ate, two uniforms for the respawned particle.
    """
    config.validate()
    if len(genomes) != config.n_agents:
        raise ValueError(f"expected {config.n_agents} genomes, got {len(genomes)}")
    n = genomes[0].n
    w = np.empty((len(genomes), n, n))
    betas = np.empty(len(genomes))
    for k, g in enumerate(genomes):
        if g.n != n:
            raise ValueError("all genomes must share one network size")
        w[k] = g.coupling()
        betas[k] = g.beta
    g0 = genomes[0]
    motor = g0.motor_indices()
    if motor.shape[0] != 4:
        raise ValueError("embodied networks need exactly 4 motor neurons")

    fitness, energy_trace, speed_trace, sensor_log = kernels.simulate_lifetime(
        w,
        betas,
        g0.sensor_indices(),
        g0.free_indices(),
        motor,
        float(config.world_size),
        int(config.n_food),
        float(config.eat_radius),
        float(config.food_energy),
        float(config.move_cost_coeff),
        float(config.a_lin),
        float(config.a_rot),
        float(config.v_max),
        float(config.drag),
        float(config.v_thresh),
        config.task == "hard",
        float(config.e_init),
        float(config.e_scale),
        int(config.lifespan),
        int(config.n_thermalize),
        config.dynamics == "metropolis",
        bool(config.legacy_sign),
        bool(record_sensors),
        rng,
    )
    return LifetimeResult(
        fitness=fitness,
        energy_trace=energy_trace,
        speed_trace=speed_trace,
        sensor_log=sensor_log if record_sensors else None,
    )
