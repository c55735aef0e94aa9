"""Trial loop, agent ensembles, learning-curve statistics and parameter sweeps."""

from __future__ import annotations

import csv
import dataclasses
import itertools
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Union

import numpy as np

from . import _kernels as K
from . import gridworld, mountaincar
from .core import RandomAgent, RngStream, stream_id
from .ps_agent import Policy, ProjectiveSimulationAgent, PsParams
from .td_agents import TdAgent, TdKind, TdParams

log = logging.getLogger(__name__)

GRIDWORLD = "gridworld"
MOUNTAINCAR = "mountaincar"
ENVIRONMENTS = (GRIDWORLD, MOUNTAINCAR)

DEFAULT_TRIALS = {GRIDWORLD: 500, MOUNTAINCAR: 1000}
DEFAULT_MAX_STEPS = 10**6
DEFAULT_AGENTS = 100


@dataclass(frozen=True)
class RandomParams:
    """Marker for the uniformly random baseline agent."""


AgentParams = Union[PsParams, TdParams, RandomParams]


@dataclass(frozen=True)
class ExperimentSpec:
    env: str
    agent: AgentParams
    n_trials: int | None = None
    max_steps_per_trial: int = DEFAULT_MAX_STEPS
    n_agents: int = DEFAULT_AGENTS
    seed: int = 0
    point_index: int = 0
    maze: gridworld.MazeSpec | None = None

    def __post_init__(self):
        if self.env not in ENVIRONMENTS:
            raise ValueError(f"unknown environment {self.env!r}; choose from {ENVIRONMENTS}")
        if self.n_trials is None:
            object.__setattr__(self, "n_trials", DEFAULT_TRIALS[self.env])
        for name in ("n_trials", "max_steps_per_trial", "n_agents"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")

    def make_env(self):
        if self.env == GRIDWORLD:
            return gridworld.GridWorld(self.maze)
        return mountaincar.MountainCar()

    def make_agent(self, n_actions: int):
        if isinstance(self.agent, PsParams):
            return ProjectiveSimulationAgent(n_actions, self.agent)
        if isinstance(self.agent, TdParams):
            return TdAgent(n_actions, self.agent)
        return RandomAgent(n_actions)

    def stream(self, agent_index: int) -> RngStream:
        return RngStream(self.seed, stream_id(self.point_index, agent_index))


@dataclass
class CurveStats:
    """Per-trial ensemble mean and mean squared deviation (population std)."""

    mean: np.ndarray
    msd: np.ndarray
    records: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_trials(self) -> int:
        return len(self.mean)

    def final(self, tail: int = 1) -> tuple[float, float]:
        """Score over the last ``tail`` trials: (mean, msd)."""
        return float(self.mean[-tail:].mean()), float(self.msd[-tail:].mean())


def aggregate(records) -> CurveStats:
    rows = [np.asarray(r) for r in records]
    if not rows:
        raise ValueError("no records to aggregate")
    lengths = {len(r) for r in rows}
    if len(lengths) != 1:
        raise ValueError(f"records differ in length: {sorted(lengths)}")
    data = np.vstack(rows).astype(float)
    mean = data.mean(axis=0)
    msd = np.sqrt(((data - mean) ** 2).mean(axis=0))
    return CurveStats(mean, msd, data)


def run_trial(agent, env, max_steps: int, rng: np.random.Generator) -> int:
    """Play one trial from the start state; the agent keeps its memory."""
    percept = env.reset()
    steps = 0
    while steps < max_steps:
        action = agent.select_action(percept, rng)
        outcome = env.step(action)
        agent.learn(percept, action, outcome)
        steps += 1
        if outcome.terminal:
            break
        percept = outcome.next_percept
    agent.end_trial()
    return steps


def run_agent_reference(spec: ExperimentSpec, agent_index: int = 0):
    """Pure-Python run of one ensemble member; returns (steps, agent)."""
    env = spec.make_env()
    agent = spec.make_agent(env.n_actions)
    rng = spec.stream(agent_index).generator()
    steps = np.array([run_trial(agent, env, spec.max_steps_per_trial, rng) for _ in range(spec.n_trials)])
    return steps, agent


def _kernel_args(spec: ExperimentSpec):
    if spec.env == GRIDWORLD:
        maze = spec.maze if spec.maze is not None else gridworld.dyna_maze()
        env_args = (
            K.ENV_GRID,
            gridworld.transition_table(maze),
            gridworld.percept_of(maze, maze.start),
            gridworld.percept_of(maze, maze.goal),
            0,
            0,
        )
        n_actions, n_percepts = 4, maze.n_cells
    else:
        bins = mountaincar.BinSpec()
        env_args = (K.ENV_MOUNTAINCAR, np.zeros((1, 1), dtype=np.int64), 0, 0, bins.n_x, bins.n_v)
        n_actions, n_percepts = 3, bins.n_percepts
    a = spec.agent
    if isinstance(a, PsParams):
        kind = K.AGENT_PS
        params = [a.eta, a.gamma, a.beta, K.POLICY_SOFTMAX if a.policy is Policy.SOFTMAX else K.POLICY_RATIO]
    elif isinstance(a, TdParams):
        kind = K.AGENT_SARSA if a.kind is TdKind.SARSA else K.AGENT_Q
        params = [a.alpha, a.mu, a.epsilon, a.q0]
    else:
        kind, params = K.AGENT_RANDOM, [0.0, 0.0, 0.0, 0.0]
    return env_args, kind, np.array(params, dtype=float), n_actions, n_percepts


class AgentRun(NamedTuple):
    steps: np.ndarray
    values: np.ndarray
    glow: np.ndarray
    seen: np.ndarray


def run_agent(spec: ExperimentSpec, agent_index: int = 0) -> AgentRun:
    """Compiled run of one ensemble member."""
    env_args, kind, params, n_actions, n_percepts = _kernel_args(spec)
    rng = spec.stream(agent_index).generator()
    return AgentRun(
        *K.run_agent(*env_args, kind, params, n_actions, n_percepts, spec.n_trials, spec.max_steps_per_trial, rng)
    )


def agent_from_run(spec: ExperimentSpec, run: AgentRun):
    """Rebuild a reference agent holding the memory of a compiled run."""
    n_actions = run.values.shape[1]
    agent = spec.make_agent(n_actions)
    percepts = [int(p) for p in np.flatnonzero(run.seen)]
    if isinstance(agent, ProjectiveSimulationAgent):
        net = agent.network
        net.percepts = percepts
        net.index = {p: i for i, p in enumerate(percepts)}
        net.h = run.values[percepts].copy()
        net.g = run.glow[percepts].copy()
    elif isinstance(agent, TdAgent):
        agent.table.percepts = percepts
        agent.table.index = {p: i for i, p in enumerate(percepts)}
        agent.table.q = run.values[percepts].copy()
    return agent


def _run_agents(spec: ExperimentSpec, indices) -> np.ndarray:
    return np.vstack([run_agent(spec, i)[0] for i in indices])


def _chunks(n: int, k: int):
    k = max(1, min(n, k))
    bounds = np.linspace(0, n, k + 1).astype(int)
    return [range(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]


def run_ensemble(spec: ExperimentSpec, jobs: int = 1) -> np.ndarray:
    """Step counts of shape (n_agents, n_trials)."""
    if jobs <= 1:
        return _run_agents(spec, range(spec.n_agents))
    with ProcessPoolExecutor(jobs) as pool:
        parts = pool.map(_run_agents, itertools.repeat(spec), _chunks(spec.n_agents, jobs))
        return np.vstack(list(parts))


def run_experiment(spec: ExperimentSpec, jobs: int = 1) -> CurveStats:
    return aggregate(run_ensemble(spec, jobs))


# --- sweeps -----------------------------------------------------------------


@dataclass
class SweepGrid:
    """Cartesian grid over agent parameters; later axes vary fastest."""

    axes: dict[str, list]
    scores: np.ndarray | None = None
    msds: np.ndarray | None = None

    def points(self) -> list[dict]:
        names = list(self.axes)
        return [dict(zip(names, combo)) for combo in itertools.product(*self.axes.values())]

    def __len__(self):
        return int(np.prod([len(v) for v in self.axes.values()]))


def linspace(lo: float, hi: float, n: int) -> list[float]:
    return [float(v) for v in np.linspace(lo, hi, n)]


def point_spec(template: ExperimentSpec, point: dict, index: int) -> ExperimentSpec:
    agent = dataclasses.replace(template.agent, **point)
    return dataclasses.replace(template, agent=agent, point_index=index)


def _point_file(cache_dir: Path, index: int) -> Path:
    return cache_dir / f"point_{index:06d}.json"


def _run_point(template, point, index, tail, cache_dir):
    if cache_dir is not None:
        path = _point_file(cache_dir, index)
        if path.exists():
            saved = json.loads(path.read_text())
            if saved["point"] == _jsonable(point):
                return saved["score"], saved["msd"]
    stats = run_experiment(point_spec(template, point, index))
    score, msd = stats.final(tail)
    if cache_dir is not None:
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps({"point": _jsonable(point), "score": score, "msd": msd}))
        os.replace(tmp, path)
    return score, msd


def _jsonable(point):
    return {k: (v.value if hasattr(v, "value") else v) for k, v in point.items()}


def run_sweep(
    grid: SweepGrid,
    template: ExperimentSpec,
    jobs: int = 1,
    tail: int = 1,
    cache_dir=None,
) -> SweepGrid:
    """Score every grid point by the ensemble mean over the last ``tail`` trials.

    Each point gets its own stream family (the point index), so results do not
    depend on ``jobs`` or on scheduling. With ``cache_dir`` every finished point
    is written to disk and skipped on rerun.
    """
    points = grid.points()
    if cache_dir is not None:
        cache_dir = Path(cache_dir)
        cache_dir.mkdir(parents=True, exist_ok=True)
    args = [(template, p, i, tail, cache_dir) for i, p in enumerate(points)]
    if jobs <= 1:
        results = [_run_point(*a) for a in args]
    else:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_run_point, *zip(*args)))
    scores = np.array([r[0] for r in results])
    msds = np.array([r[1] for r in results])
    return SweepGrid(dict(grid.axes), scores, msds)


# --- output -----------------------------------------------------------------


def write_curve_csv(path, stats: CurveStats) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["trial", "mean", "msd"])
        for t, (m, d) in enumerate(zip(stats.mean, stats.msd), start=1):
            w.writerow([t, repr(float(m)), repr(float(d))])


def read_curve_csv(path) -> CurveStats:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return CurveStats(np.array([float(r["mean"]) for r in rows]), np.array([float(r["msd"]) for r in rows]))


def write_curve_dat(path, stats: CurveStats) -> None:
    """gnuplot-friendly columns: trial, mean, mean-msd, mean+msd."""
    with open(path, "w") as fh:
        fh.write("# trial mean lower upper\n")
        for t, (m, d) in enumerate(zip(stats.mean.tolist(), stats.msd.tolist()), start=1):
            fh.write(f"{t} {m!r} {m - d!r} {m + d!r}\n")


def write_sweep_csv(path, grid: SweepGrid) -> None:
    if grid.scores is None:
        raise ValueError("sweep has not been run")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(grid.axes) + ["score", "msd"])
        for point, score, msd in zip(grid.points(), grid.scores, grid.msds):
            values = [v.value if hasattr(v, "value") else repr(float(v)) for v in point.values()]
            w.writerow(values + [repr(float(score)), repr(float(msd))])
