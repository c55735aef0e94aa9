"""Compiled inner loops: one agent, one environment, many trials.

These mirror the reference classes in ``ps_agent``, ``td_agents``,
``gridworld`` and ``mountaincar`` draw-for-draw on the same
``numpy.random.Generator``.  The projective simulation kernel stores glow
implicitly as the step index of each edge's last traversal, so the glow of an
edge is ``(1 - eta) ** (t - last)``; weights are only touched on rewarded steps.
"""

import math

import numpy as np
from numba import njit

ENV_GRID = 0
ENV_MOUNTAINCAR = 1

AGENT_PS = 0
AGENT_Q = 1
AGENT_SARSA = 2
AGENT_RANDOM = 3

POLICY_RATIO = 0
POLICY_SOFTMAX = 1

# mountain car constants, duplicated from mountaincar.py for nopython mode
_X_MIN, _X_MAX, _V_MIN, _V_MAX, _X_GOAL = -1.2, 0.6, -0.07, 0.07, 0.5


@njit(cache=True)
def _bin(value, lo, hi, n):
    k = math.floor((value - lo) / ((hi - lo) / n))
    if k < 0:
        return 0
    if k > n - 1:
        return n - 1
    return k


@njit(cache=True)
def mc_step(x, v, action):
    v = v + 0.001 * (action - 1) - 0.0025 * math.cos(3.0 * x)
    v = min(_V_MAX, max(_V_MIN, v))
    x = x + v
    if x < _X_MIN:
        x = _X_MIN
        v = 0.0
    elif x > _X_MAX:
        x = _X_MAX
    return x, v, x >= _X_GOAL


@njit(cache=True)
def mc_percept(x, v, n_x, n_v):
    return n_v * _bin(x, _X_MIN, _X_MAX, n_x) + _bin(v, _V_MIN, _V_MAX, n_v)


@njit(cache=True)
def _fill_cdf(h, s, n_actions, policy, beta, cdf):
    # same operation order as transition_probabilities + sample_index
    if policy == POLICY_RATIO:
        for a in range(n_actions):
            cdf[s, a] = h[s, a]
    else:
        hmax = h[s, 0]
        for a in range(1, n_actions):
            if h[s, a] > hmax:
                hmax = h[s, a]
        for a in range(n_actions):
            cdf[s, a] = math.exp(beta * (h[s, a] - hmax))
    total = 0.0
    for a in range(n_actions):
        total += cdf[s, a]
    acc = 0.0
    for a in range(n_actions):
        acc += cdf[s, a] / total
        cdf[s, a] = acc


@njit(cache=True)
def _sample(cdf, s, n_actions, u):
    for a in range(n_actions):
        if u < cdf[s, a]:
            return a
    return n_actions - 1


@njit(cache=True)
def _greedy(q, s, n_actions, rng):
    best = q[s, 0]
    for a in range(1, n_actions):
        if q[s, a] > best:
            best = q[s, a]
    count = 0
    for a in range(n_actions):
        if q[s, a] == best:
            count += 1
    if count == 1:
        for a in range(n_actions):
            if q[s, a] == best:
                return a
    k = int(rng.random() * count)
    for a in range(n_actions):
        if q[s, a] == best:
            if k == 0:
                return a
            k -= 1
    return n_actions - 1


@njit(cache=True)
def _row_max(q, s, n_actions):
    m = q[s, 0]
    for a in range(1, n_actions):
        if q[s, a] > m:
            m = q[s, a]
    return m


@njit(cache=True)
def run_agent(env_kind, table, start, goal, n_x, n_v, agent_kind, params,
              n_actions, n_percepts, n_trials, max_steps, rng):
    """Run ``n_trials`` trials of one agent; memory persists across trials.

    Returns ``(steps, values, glow, seen)``: per-trial step counts, the final
    weight (PS) or value (TD) table, for PS the final glow table, and a mask
    of the percepts the agent acted on.
    """
    steps = np.zeros(n_trials, dtype=np.int64)
    seen = np.zeros(n_percepts, dtype=np.bool_)
    glow = np.zeros((n_percepts, n_actions))
    # PS: eta, gamma, beta, policy; TD: alpha, mu, epsilon, q0
    eta = alpha = params[0]
    gamma = mu = params[1]
    beta = epsilon = params[2]
    policy = int(params[3])
    q0 = params[3]
    decay = 1.0 - eta
    literal = agent_kind == AGENT_PS and gamma > 0.0
    last = np.full((n_percepts, n_actions), -1, dtype=np.int64)
    if agent_kind == AGENT_PS:
        values = np.ones((n_percepts, n_actions))
    else:
        values = np.full((n_percepts, n_actions), q0)
    cdf = np.empty((n_percepts, n_actions))
    fresh = np.zeros(n_percepts, dtype=np.bool_)
    x = 0.0
    v = 0.0
    t = 0  # global step counter, glow persists across trials
    for trial in range(n_trials):
        if env_kind == ENV_GRID:
            s = start
        else:
            x, v = -0.5, 0.0
            s = mc_percept(x, v, n_x, n_v)
        pending = False
        ps_ = 0
        pa = 0
        pr = 0.0
        n = 0
        while n < max_steps:
            # choose
            seen[s] = True
            if agent_kind == AGENT_PS:
                if not fresh[s]:
                    _fill_cdf(values, s, n_actions, policy, beta, cdf)
                    fresh[s] = True
                a = _sample(cdf, s, n_actions, rng.random())
            elif agent_kind == AGENT_RANDOM:
                a = int(rng.random() * n_actions)
            else:
                if epsilon > 0.0 and rng.random() < epsilon:
                    a = int(rng.random() * n_actions)
                else:
                    a = _greedy(values, s, n_actions, rng)
                if pending:
                    if agent_kind == AGENT_SARSA:
                        boot = values[s, a]
                    else:
                        boot = _row_max(values, s, n_actions)
                    values[ps_, pa] += alpha * (pr + mu * boot - values[ps_, pa])
                    pending = False
            # act
            if env_kind == ENV_GRID:
                s2 = table[s, a]
                done = s2 == goal
            else:
                x, v, done = mc_step(x, v, a)
                s2 = mc_percept(x, v, n_x, n_v)
            r = 1.0 if done else 0.0
            n += 1
            # learn
            if agent_kind == AGENT_PS:
                if literal:
                    for i in range(n_percepts):
                        for j in range(n_actions):
                            glow[i, j] *= decay
                    glow[s, a] = 1.0
                    fresh[:] = False
                    for i in range(n_percepts):
                        for j in range(n_actions):
                            values[i, j] -= gamma * (values[i, j] - 1.0)
                            if r != 0.0:
                                values[i, j] += glow[i, j] * r
                else:
                    last[s, a] = t
                    if r != 0.0:
                        fresh[:] = False
                        for i in range(n_percepts):
                            for j in range(n_actions):
                                if last[i, j] >= 0:
                                    values[i, j] += math.pow(decay, t - last[i, j]) * r
            elif agent_kind != AGENT_RANDOM:
                if done:
                    values[s, a] += alpha * (r - values[s, a])
                else:
                    pending = True
                    ps_ = s
                    pa = a
                    pr = r
            t += 1
            s = s2
            if done:
                break
        if pending:
            boot = _row_max(values, s, n_actions)
            values[ps_, pa] += alpha * (pr + mu * boot - values[ps_, pa])
        steps[trial] = n
    if agent_kind == AGENT_PS and not literal:
        for i in range(n_percepts):
            for j in range(n_actions):
                if last[i, j] >= 0:
                    glow[i, j] = math.pow(decay, t - 1 - last[i, j])
    return steps, values, glow, seen
