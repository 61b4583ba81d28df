import math

import numpy as np
import pytest

from isingforage.network import (
    IsingGenome,
    MotorCommand,
    NeuronClass,
    init_state,
    random_genome,
    read_motors,
    standard_classes,
    thermalize,
    topology_mask,
)
from isingforage.rng import child_rng, rand_permutation
from isingforage.world import (
    Agent,
    WorldConfig,
    WorldState,
    consume,
    nearest_food,
    run_lifetime,
    sense,
    step_agent,
)
from oracles import exhaustive_nearest


def small_config(**overrides) -> WorldConfig:
    base = dict(world_size=30.0, n_agents=3, n_food=10, lifespan=25, e_init=2.0)
    base.update(overrides)
    return WorldConfig(**base)


def make_agent(x, y, heading=0.0, speed=0.0, energy=2.0) -> Agent:
    return Agent(position=np.array([x, y], dtype=float), heading=heading, speed=speed, energy=energy)


def test_sense_food_ahead_at_zero_distance():
    cfg = small_config()
    world = WorldState(agents=[], food=np.array([[5.0, 5.0]]))
    reading = sense(world, make_agent(5.0, 5.0), cfg)
    assert reading.theta_food == 0.0
    assert reading.d_food == -1.0


def test_sense_food_directly_behind():
    cfg = small_config()
    world = WorldState(agents=[], food=np.array([[1.0, 5.0]]))
    reading = sense(world, make_agent(5.0, 5.0, heading=0.0), cfg)
    assert abs(reading.theta_food) == 1.0


def test_sense_components_within_bounds():
    cfg = small_config()
    rng = np.random.default_rng(0)
    for _ in range(200):
        world = WorldState(agents=[], food=rng.uniform(0, cfg.world_size, (cfg.n_food, 2)))
        agent = make_agent(*rng.uniform(0, cfg.world_size, 2), heading=rng.uniform(0, 2 * math.pi),
                           speed=rng.uniform(0, 1), energy=rng.uniform(-5, 50))
        r = sense(world, agent, cfg)
        assert all(-1.0 <= v <= 1.0 for v in r)


def test_nearest_food_matches_exhaustive_scan():
    cfg = small_config()
    rng = np.random.default_rng(1)
    for _ in range(300):
        food = rng.uniform(0, cfg.world_size, (cfg.n_food, 2))
        pos = rng.uniform(0, cfg.world_size, 2)
        world = WorldState(agents=[], food=food)
        idx, dist = nearest_food(world, pos, cfg.world_size)
        oidx, odist = exhaustive_nearest(food, pos, cfg.world_size)
        assert idx == oidx
        assert dist == pytest.approx(odist, rel=1e-12)


def test_step_agent_noop_at_rest():
    cfg = small_config()
    agent = make_agent(3.0, 4.0)
    out = step_agent(agent, (MotorCommand.NOOP, MotorCommand.NOOP), cfg)
    assert np.array_equal(out.position, agent.position)
    assert out.energy == agent.energy
    assert out.speed == 0.0


def test_step_agent_accelerate_from_rest():
    cfg = small_config()
    out = step_agent(make_agent(3.0, 4.0), (MotorCommand.ACCELERATE, MotorCommand.NOOP), cfg)
    assert out.speed == pytest.approx(cfg.a_lin)
    assert out.energy == pytest.approx(2.0 - cfg.move_cost_coeff * cfg.a_lin)


def test_step_agent_wraps_position():
    cfg = small_config()
    agent = make_agent(cfg.world_size - 0.01, 5.0, heading=0.0, speed=0.5)
    out = step_agent(agent, (MotorCommand.ACCELERATE, MotorCommand.NOOP), cfg)
    assert 0.0 <= out.position[0] < 1.0


def test_consume_simple_eats_and_conserves_food():
    cfg = small_config(task="simple")
    food = np.array([[5.0, 5.0], [20.0, 20.0]])
    world = WorldState(agents=[], food=food)
    agent = make_agent(5.2, 5.0, speed=0.9)
    world2, agent2, ate = consume(world, agent, cfg, np.random.default_rng(2))
    assert ate
    assert agent2.energy == pytest.approx(2.0 + cfg.food_energy)
    assert world2.food.shape[0] == 2
    assert not np.array_equal(world2.food[0], food[0])   # eaten particle respawned


def test_consume_hard_requires_slow_speed():
    cfg = small_config(task="hard")
    world = WorldState(agents=[], food=np.array([[5.0, 5.0]]))
    _, _, ate_fast = consume(world, make_agent(5.0, 5.0, speed=0.5), cfg, np.random.default_rng(3))
    assert not ate_fast
    _, _, ate_slow = consume(world, make_agent(5.0, 5.0, speed=0.01), cfg, np.random.default_rng(3))
    assert ate_slow


def test_consume_nothing_in_radius():
    cfg = small_config()
    world = WorldState(agents=[], food=np.array([[20.0, 20.0]]))
    world2, agent2, ate = consume(world, make_agent(5.0, 5.0), cfg, np.random.default_rng(4))
    assert not ate
    assert world2 is world and agent2.energy == 2.0


def _genomes(cfg, seed=0, beta=1.0):
    rng = np.random.default_rng(seed)
    return [random_genome(standard_classes(), beta, rng) for _ in range(cfg.n_agents)]


def test_run_lifetime_null_controller_baseline():
    cfg = small_config(n_agents=5, lifespan=200)
    genomes = _genomes(cfg)
    for g in genomes:
        g.weights[:] = 0.0
    res = run_lifetime(genomes, cfg, child_rng(0, 1))
    assert np.isfinite(res.fitness).all()
    assert np.all(np.abs(res.fitness - 2.0) < 1.5)


def test_run_lifetime_static_agent_fitness_exactly_two():
    # motor pairs pinned into disagreement by a strong antiferromagnetic link
    cfg = small_config(n_agents=2, lifespan=100)
    genomes = []
    for _ in range(cfg.n_agents):
        classes = standard_classes()
        mask = topology_mask(classes)
        w = np.zeros((12, 12))
        w[8, 9] = w[9, 8] = -2.0
        w[10, 11] = w[11, 10] = -2.0
        genomes.append(IsingGenome(classes=classes, mask=mask, adjacency=mask.copy(), weights=w, beta=1e5))
    res = run_lifetime(genomes, cfg, child_rng(1, 1))
    assert np.all(res.fitness == 2.0)
    assert np.all(res.speed_trace == 0.0)


def test_run_lifetime_fixed_seed_identical():
    cfg = small_config()
    genomes = _genomes(cfg, seed=5)
    a = run_lifetime(genomes, cfg, child_rng(2, 1), record_sensors=True)
    b = run_lifetime(genomes, cfg, child_rng(2, 1), record_sensors=True)
    assert np.array_equal(a.fitness, b.fitness)
    assert np.array_equal(a.energy_trace, b.energy_trace)
    assert np.array_equal(a.sensor_log, b.sensor_log)


def naive_lifetime(genomes, cfg, rng, record_sensors=False):
    """Reference lifetime recomposed from the public per-agent operations,
    following the documented RNG draw order."""
    n_agents = cfg.n_agents
    food = np.empty((cfg.n_food, 2))
    for f in range(cfg.n_food):
        food[f, 0] = rng.random() * cfg.world_size
        food[f, 1] = rng.random() * cfg.world_size
    agents = []
    spins = []
    for a, genome in enumerate(genomes):
        x = rng.random() * cfg.world_size
        y = rng.random() * cfg.world_size
        heading = rng.random() * 2.0 * math.pi
        agents.append(Agent(position=np.array([x, y]), heading=heading, speed=0.0,
                            energy=cfg.e_init, genome_ref=a))
        spins.append(init_state(genome, rng))

    world = WorldState(agents=agents, food=food)
    energy_trace = np.full((cfg.lifespan + 1, n_agents), cfg.e_init)
    speed_trace = np.zeros((cfg.lifespan + 1, n_agents))
    sensor_log = np.zeros((cfg.lifespan * n_agents, 6)) if record_sensors else None

    for t in range(1, cfg.lifespan + 1):
        order = rand_permutation(rng, n_agents)
        for a in order:
            genome = genomes[a]
            agent = world.agents[a]
            reading = sense(world, agent, cfg)
            assert world.food.shape[0] == cfg.n_food   # conservation audit
            if record_sensors:
                sensor_log[(t - 1) * n_agents + a] = [t, a, *reading]
            spins[a][genome.sensor_indices()] = reading.as_array()
            spins[a] = thermalize(genome, spins[a], cfg.n_thermalize, rng)
            commands = read_motors(genome, spins[a])
            agent = step_agent(agent, commands, cfg)
            world.agents[a] = agent
            world, agent, _ = consume(world, agent, cfg, rng)
            world.agents[a] = agent
        for a in range(n_agents):
            energy_trace[t, a] = world.agents[a].energy
            speed_trace[t, a] = world.agents[a].speed

    fitness = energy_trace[1:].mean(axis=0)
    return fitness, energy_trace, speed_trace, sensor_log


@pytest.mark.parametrize("task", ["simple", "hard"])
def test_run_lifetime_matches_naive_recomposition(task):
    cfg = small_config(task=task, n_agents=4, n_food=8, lifespan=30, eat_radius=2.0)
    genomes = _genomes(cfg, seed=6)
    res = run_lifetime(genomes, cfg, child_rng(3, 1), record_sensors=True)
    fit, etr, vtr, slog = naive_lifetime(genomes, cfg, child_rng(3, 1), record_sensors=True)
    assert np.array_equal(res.energy_trace, etr)
    assert np.array_equal(res.speed_trace, vtr)
    assert np.array_equal(res.fitness, fit)
    assert np.array_equal(res.sensor_log, slog)


def test_energy_accounting_audit():
    # E(t) must equal e_init - sum of move costs + meals * food_energy
    cfg = small_config(n_agents=3, lifespan=60, eat_radius=2.5)
    genomes = _genomes(cfg, seed=7)
    res = run_lifetime(genomes, cfg, child_rng(4, 1))
    for a in range(cfg.n_agents):
        costs = cfg.move_cost_coeff * res.speed_trace[1:, a].sum()
        gains = res.energy_trace[-1, a] - cfg.e_init + costs
        meals = gains / cfg.food_energy
        assert meals == pytest.approx(round(meals), abs=1e-9)
        assert round(meals) >= 0


def test_run_lifetime_rejects_wrong_population_size():
    cfg = small_config()
    with pytest.raises(ValueError):
        run_lifetime(_genomes(cfg)[:-1], cfg, child_rng(5, 1))


def test_world_config_validation():
    with pytest.raises(ValueError):
        small_config(task="medium").validate()
    with pytest.raises(ValueError):
        small_config(v_thresh=2.0).validate()   # above v_max
    with pytest.raises(ValueError):
        small_config(n_food=0).validate()
