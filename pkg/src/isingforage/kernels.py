"""Compiled inner loops for spin dynamics, lifetimes and heat-capacity scans.

All kernels draw from a numpy Generator passed in by the caller, so their
streams are bit-identical to pure-python code consuming the same draws in the
same order.  Draw-order contracts are documented on the public wrappers that
call these kernels; reference implementations in the test suite rely on them.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# exp(700) is near the float64 overflow limit; beyond this the flip
# probability saturates to 0 or 1.
EXP_CLIP = 700.0


@njit(cache=True, nogil=True)
def flip_prob(x):
    """Acceptance probability from x = beta * delta_e, saturated at |x|>700."""
    if x > EXP_CLIP:
        return 0.0
    if x < -EXP_CLIP:
        return 1.0
    return 1.0 / (1.0 + np.exp(x))


@njit(cache=True, nogil=True)
def metropolis_prob(x):
    """Metropolis acceptance min(1, exp(-x)) for x = beta * delta_e."""
    if x <= 0.0:
        return 1.0
    if x > EXP_CLIP:
        return 0.0
    return np.exp(-x)


@njit(cache=True, nogil=True)
def energy(W, s):
    """e = -sum_ij W_ij s_i s_j over all ordered pairs (W = A * J)."""
    n = W.shape[0]
    e = 0.0
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc += W[i, j] * s[j]
        e -= s[i] * acc
    return e


@njit(cache=True, nogil=True)
def local_delta(W, s, i):
    """Energy change from flipping spin i: 2 s_i sum_j (W_ij + W_ji) s_j."""
    n = W.shape[0]
    h = 0.0
    for j in range(n):
        h += (W[i, j] + W[j, i]) * s[j]
    return 2.0 * s[i] * h


@njit(cache=True, nogil=True)
def sweep(W, s, free, beta, metropolis, legacy_sign, rng):
    """One update sweep over the non-clamped spins, in place.

    Draw order: Fisher-Yates permutation of `free` (len(free)-1 integers),
    then exactly one uniform per visited spin.
    """
    nf = free.shape[0]
    order = free.copy()
    for i in range(nf - 1, 0, -1):
        j = rng.integers(0, i + 1)
        t = order[i]
        order[i] = order[j]
        order[j] = t
    for k in range(nf):
        i = order[k]
        de = local_delta(W, s, i)
        x = beta * de
        if legacy_sign:
            x = -x
        if metropolis:
            p = metropolis_prob(x)
        else:
            p = flip_prob(x)
        if rng.random() < p:
            s[i] = -s[i]


@njit(cache=True, nogil=True)
def run_sweeps(W, s, free, beta, n_sweeps, metropolis, legacy_sign, rng):
    for _ in range(n_sweeps):
        sweep(W, s, free, beta, metropolis, legacy_sign, rng)


@njit(cache=True, nogil=True)
def sweep_tracked(W, s, free, beta, metropolis, legacy_sign, rng, e_cur):
    """Same update and draw order as `sweep`, returning the energy maintained
    incrementally through the accepted flips (O(1) per rejected attempt)."""
    nf = free.shape[0]
    order = free.copy()
    for i in range(nf - 1, 0, -1):
        j = rng.integers(0, i + 1)
        t = order[i]
        order[i] = order[j]
        order[j] = t
    for k in range(nf):
        i = order[k]
        de = local_delta(W, s, i)
        x = beta * de
        if legacy_sign:
            x = -x
        if metropolis:
            p = metropolis_prob(x)
        else:
            p = flip_prob(x)
        if rng.random() < p:
            s[i] = -s[i]
            e_cur += de
    return e_cur


@njit(cache=True, nogil=True)
def _wrap_angle(a):
    """Wrap to [-pi, pi)."""
    two_pi = 2.0 * np.pi
    a = (a + np.pi) % two_pi
    if a < 0.0:
        a += two_pi
    return a - np.pi


@njit(cache=True, nogil=True)
def _torus_diff(a, b, size):
    """Shortest signed displacement b - a on a periodic axis."""
    d = (b - a + 0.5 * size) % size
    if d < 0.0:
        d += size
    return d - 0.5 * size


@njit(cache=True, nogil=True)
def _nearest_food(food, x, y, size):
    """Index and distance of the closest food particle (torus metric)."""
    best = -1
    best_d2 = 1.0e308
    for f in range(food.shape[0]):
        dx = _torus_diff(x, food[f, 0], size)
        dy = _torus_diff(y, food[f, 1], size)
        d2 = dx * dx + dy * dy
        if d2 < best_d2:
            best_d2 = d2
            best = f
    return best, np.sqrt(best_d2)


@njit(cache=True, nogil=True)
def _motor_dir(a, b):
    """+1 if both spins positive, -1 if both negative, else 0."""
    if a > 0.0 and b > 0.0:
        return 1.0
    if a < 0.0 and b < 0.0:
        return -1.0
    return 0.0


@njit(cache=True, nogil=True)
def simulate_lifetime(
    W,            # (n_agents, N, N) effective couplings A*J
    betas,        # (n_agents,)
    sensor_idx,   # indices of sensor neurons
    free_idx,     # indices of non-sensor neurons
    motor_idx,    # 4 motor indices: (lin_a, lin_b, rot_a, rot_b)
    size,         # world side length
    n_food,
    eat_radius,
    food_energy,
    move_cost,
    a_lin,
    a_rot,
    v_max,
    drag,
    v_thresh,
    hard_task,    # bool
    e_init,
    e_scale,
    n_steps,
    n_therm,
    metropolis,
    legacy_sign,
    record_sensors,  # bool
    rng,
):
    """Full shared-world lifetime for all agents.

    Draw order (mirrored by the reference implementation in the tests):
      init: per food particle x,y; per agent x,y,heading; per agent per
      non-sensor neuron one uniform for its starting spin.
      per step: Fisher-Yates over agents; then per agent in that order a
      thermalization phase of n_therm sweeps (see `sweep`), and two uniforms
      for the respawned particle if it ate.
    """
    n_agents = W.shape[0]
    n = W.shape[1]
    n_sens = sensor_idx.shape[0]

    food = np.empty((n_food, 2))
    for f in range(n_food):
        food[f, 0] = rng.random() * size
        food[f, 1] = rng.random() * size

    pos = np.empty((n_agents, 2))
    heading = np.empty(n_agents)
    speed = np.zeros(n_agents)
    eng = np.full(n_agents, e_init)
    spins = np.empty((n_agents, n))
    for a in range(n_agents):
        pos[a, 0] = rng.random() * size
        pos[a, 1] = rng.random() * size
        heading[a] = rng.random() * 2.0 * np.pi
        for i in range(n):
            spins[a, i] = 0.0
        for k in range(free_idx.shape[0]):
            i = free_idx[k]
            spins[a, i] = 1.0 if rng.random() < 0.5 else -1.0

    energy_trace = np.empty((n_steps + 1, n_agents))
    speed_trace = np.empty((n_steps + 1, n_agents))
    for a in range(n_agents):
        energy_trace[0, a] = e_init
        speed_trace[0, a] = 0.0

    if record_sensors:
        sensor_log = np.empty((n_steps * n_agents, 6))
    else:
        sensor_log = np.empty((0, 6))

    order = np.empty(n_agents, dtype=np.int64)
    for t in range(1, n_steps + 1):
        for a in range(n_agents):
            order[a] = a
        for i in range(n_agents - 1, 0, -1):
            j = rng.integers(0, i + 1)
            tmp = order[i]
            order[i] = order[j]
            order[j] = tmp

        for k in range(n_agents):
            a = order[k]
            # sense
            fi, dist = _nearest_food(food, pos[a, 0], pos[a, 1], size)
            dx = _torus_diff(pos[a, 0], food[fi, 0], size)
            dy = _torus_diff(pos[a, 1], food[fi, 1], size)
            bearing = _wrap_angle(np.arctan2(dy, dx) - heading[a])
            theta = bearing / np.pi
            d_norm = 2.0 * dist / (0.5 * size) - 1.0
            if d_norm > 1.0:
                d_norm = 1.0
            elif d_norm < -1.0:
                d_norm = -1.0
            v_norm = 2.0 * speed[a] / v_max - 1.0
            e_norm = 2.0 * np.tanh(eng[a] / e_scale) - 1.0
            if e_norm > 1.0:
                e_norm = 1.0
            elif e_norm < -1.0:
                e_norm = -1.0
            if n_sens >= 1:
                spins[a, sensor_idx[0]] = theta
            if n_sens >= 2:
                spins[a, sensor_idx[1]] = d_norm
            if n_sens >= 3:
                spins[a, sensor_idx[2]] = v_norm
            if n_sens >= 4:
                spins[a, sensor_idx[3]] = e_norm
            if record_sensors:
                r = (t - 1) * n_agents + a
                sensor_log[r, 0] = t
                sensor_log[r, 1] = a
                sensor_log[r, 2] = theta
                sensor_log[r, 3] = d_norm
                sensor_log[r, 4] = v_norm
                sensor_log[r, 5] = e_norm

            # think
            for _ in range(n_therm):
                sweep(W[a], spins[a], free_idx, betas[a], metropolis, legacy_sign, rng)

            # act
            lin = _motor_dir(spins[a, motor_idx[0]], spins[a, motor_idx[1]])
            rot = _motor_dir(spins[a, motor_idx[2]], spins[a, motor_idx[3]])
            heading[a] = heading[a] + a_rot * rot
            v = drag * speed[a] + a_lin * lin
            if v < 0.0:
                v = 0.0
            elif v > v_max:
                v = v_max
            speed[a] = v
            x = (pos[a, 0] + v * np.cos(heading[a])) % size
            if x < 0.0:
                x += size
            y = (pos[a, 1] + v * np.sin(heading[a])) % size
            if y < 0.0:
                y += size
            pos[a, 0] = x
            pos[a, 1] = y
            eng[a] -= move_cost * v

            # eat
            fi, dist = _nearest_food(food, x, y, size)
            if dist <= eat_radius and ((not hard_task) or v <= v_thresh):
                eng[a] += food_energy
                food[fi, 0] = rng.random() * size
                food[fi, 1] = rng.random() * size

        for a in range(n_agents):
            energy_trace[t, a] = eng[a]
            speed_trace[t, a] = speed[a]

    fitness = np.empty(n_agents)
    for a in range(n_agents):
        acc = 0.0
        for t in range(1, n_steps + 1):
            acc += energy_trace[t, a]
        fitness[a] = acc / n_steps

    return fitness, energy_trace, speed_trace, sensor_log


@njit(cache=True, nogil=True)
def _set_sensors(s, sensor_idx, sensor_data, rng):
    k = rng.integers(0, sensor_data.shape[0])
    for q in range(sensor_idx.shape[0]):
        s[sensor_idx[q]] = sensor_data[k, q]


@njit(cache=True, nogil=True)
def measure_energy_stats(
    W,
    beta_eff,
    free_idx,
    sensor_idx,
    sensor_data,   # (n_samples, n_sensors); empty => thermalized mode
    start_scale,
    n_stages,
    sweeps_per_stage,
    burn_in,
    n_measure,
    refresh_every,
    n_restarts,
    metropolis,
    legacy_sign,
    rng,
):
    """Annealed estimate of the mean and within-input variance of the energy.

    Each of n_restarts independent chains draws one sensor vector (clamped
    mode), starts from a random state at inverse temperature
    beta_eff/start_scale, cools geometrically to beta_eff over n_stages
    stages, then measures n_measure sweeps.  refresh_every > 0 additionally
    splits the measurement into blocks with a fresh sensor vector each.

    The returned variance is the length-weighted mean of the within-block
    variances: energy fluctuations at fixed sensor input.  Pooling the raw
    samples instead would fold the spread of the sensor inputs (and, on
    frustrated networks, the spread across frozen basins) into Var(e), which
    diverges the c_beta^2 weighting of the heat capacity at cold
    temperatures.
    """
    n = W.shape[0]
    clamped = sensor_data.shape[0] > 0

    mean_sum = 0.0
    var_sum = 0.0
    total_len = 0.0
    s = np.empty(n)
    for _ in range(n_restarts):
        for i in range(n):
            s[i] = 1.0 if rng.random() < 0.5 else -1.0
        if clamped:
            _set_sensors(s, sensor_idx, sensor_data, rng)

        for stage in range(n_stages):
            if n_stages > 1:
                scale = start_scale ** (1.0 - stage / (n_stages - 1.0))
            else:
                scale = 1.0
            b = beta_eff / scale
            for _ in range(sweeps_per_stage):
                sweep(W, s, free_idx, b, metropolis, legacy_sign, rng)

        for _ in range(burn_in):
            sweep(W, s, free_idx, beta_eff, metropolis, legacy_sign, rng)

        block_len = n_measure if (refresh_every <= 0 or not clamped) else refresh_every
        done = 0
        first = True
        while done < n_measure:
            if clamped and not first:
                _set_sensors(s, sensor_idx, sensor_data, rng)
            first = False
            length = min(block_len, n_measure - done)
            b_sum = 0.0
            b_sum2 = 0.0
            e = energy(W, s)   # exact at block start, then tracked incrementally
            for _ in range(length):
                e = sweep_tracked(W, s, free_idx, beta_eff, metropolis, legacy_sign, rng, e)
                b_sum += e
                b_sum2 += e * e
            done += length
            b_mean = b_sum / length
            b_var = b_sum2 / length - b_mean * b_mean
            if b_var < 0.0:
                b_var = 0.0
            mean_sum += b_sum
            var_sum += b_var * length
            total_len += length

    return mean_sum / total_len, var_sum / total_len
