"""Command line front end.

    psbench run --env gridworld --agent ps --eta 0.24 --agents 100 --seed 7 --out results/
    psbench sweep --recipe fig3 --jobs 4 --out results/fig3
    psbench replay results/agent.snap
    psbench recipes
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import gridworld, harness, mountaincar, recipes, snapshot
from .core import RngStream
from .ps_agent import ProjectiveSimulationAgent, PsParams
from .td_agents import TdAgent, TdParams, greedy

log = logging.getLogger("psbench")

SEED_ENV = "PSBENCH_SEED"
AGENT_KINDS = ("ps", "q", "sarsa", "random")

# per-environment defaults for fields left at None
ENV_DEFAULTS = {
    harness.GRIDWORLD: dict(eta=0.24, alpha=0.5, mu=0.9, epsilon=0.0, trials=500),
    harness.MOUNTAINCAR: dict(eta=0.024, alpha=0.25, mu=0.9, epsilon=0.01, trials=1000),
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    env: str = harness.GRIDWORLD
    agent: str = "ps"
    policy: str = "softmax"
    eta: float | None = None
    gamma: float = 0.0
    beta: float = 1.0
    alpha: float | None = None
    mu: float | None = None
    epsilon: float | None = None
    q0: float = 1.0
    trials: int | None = None
    max_steps: int = harness.DEFAULT_MAX_STEPS
    agents: int = harness.DEFAULT_AGENTS
    seed: int = 0
    jobs: int = 1
    tail: int = 1
    maze: str = ""
    expect_optimum: int | None = None
    out: str = "."
    snapshot: str = ""

    def resolved(self) -> RunConfig:
        """Fill environment-dependent defaults."""
        if self.env not in ENV_DEFAULTS:
            raise ConfigError(f"env: unknown environment {self.env!r}")
        defaults = ENV_DEFAULTS[self.env]
        updates = {k: v for k, v in defaults.items() if getattr(self, k) is None}
        return dataclasses.replace(self, **updates)

    def agent_params(self):
        c = self.resolved()
        if c.agent == "ps":
            return PsParams(c.eta, c.gamma, c.beta, c.policy)
        if c.agent in ("q", "sarsa"):
            return TdParams(c.alpha, c.mu, c.epsilon, c.q0, c.agent)
        if c.agent == "random":
            return harness.RandomParams()
        raise ConfigError(f"agent: unknown agent kind {c.agent!r}; choose from {AGENT_KINDS}")

    def experiment(self) -> harness.ExperimentSpec:
        c = self.resolved()
        maze = None
        if c.maze:
            maze = gridworld.load_maze(c.maze, c.expect_optimum)
        elif c.expect_optimum is not None:
            maze = gridworld.parse_maze(gridworld.DYNA_MAZE, c.expect_optimum)
        try:
            return harness.ExperimentSpec(
                c.env, self.agent_params(), c.trials, c.max_steps, c.agents, c.seed, maze=maze
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            lines.append(f"{f.name} = {'' if value is None else value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> RunConfig:
        types = {f.name: f.type for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = (part.strip() for part in line.partition("="))
            if not sep:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
            if key not in types:
                raise ConfigError(f"{key}: unknown config key (line {lineno})")
            values[key] = _coerce(key, types[key], value)
        return cls(**values)


def _coerce(key, type_name, value):
    if value == "" and "None" in type_name:
        return None
    try:
        if type_name.startswith("int"):
            return int(value)
        if type_name.startswith("float"):
            return float(value)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {value!r} as {type_name.split()[0]}") from None
    return value


# --- run --------------------------------------------------------------------


def _write_outputs(out: Path, stats: harness.CurveStats, stem: str = "curve"):
    out.mkdir(parents=True, exist_ok=True)
    harness.write_curve_csv(out / f"{stem}.csv", stats)
    harness.write_curve_dat(out / f"{stem}.dat", stats)


def _snapshot_of(spec: harness.ExperimentSpec, run: harness.AgentRun) -> snapshot.Snapshot:
    agent = harness.agent_from_run(spec, run)
    if not hasattr(agent, "to_snapshot"):
        raise ConfigError("snapshot: the random agent has no memory to save")
    snap = agent.to_snapshot()
    snap.params["env"] = spec.env
    if spec.env == harness.GRIDWORLD:
        maze = spec.maze if spec.maze is not None else gridworld.dyna_maze()
        snap.params["maze"] = maze.render().strip().replace("\n", "/")
    return snap


def cmd_run(config: RunConfig) -> harness.CurveStats:
    spec = config.experiment()
    log.info("running %s", spec)
    stats = harness.run_experiment(spec, jobs=config.jobs)
    _write_outputs(Path(config.out), stats)
    if config.snapshot:
        snapshot.save(_snapshot_of(spec, harness.run_agent(spec, 0)), config.snapshot)
    mean, msd = stats.final(config.tail)
    print(f"final mean {mean:.2f} ± {msd:.2f} steps (trial {spec.n_trials}, {spec.n_agents} agents)")
    return stats


# --- sweep ------------------------------------------------------------------


def parse_axis(text: str):
    """``name=v1,v2,...`` or ``name=lo:hi:n`` (n evenly spaced values)."""
    name, sep, spec = text.partition("=")
    if not sep or not name:
        raise ConfigError(f"axis: expected name=values, got {text!r}")
    name = name.strip()
    try:
        if ":" in spec:
            lo, hi, n = spec.split(":")
            return name, harness.linspace(float(lo), float(hi), int(n))
        values = [v.strip() for v in spec.split(",") if v.strip()]
        if name == "policy":
            return name, values
        return name, [float(v) for v in values]
    except ValueError:
        raise ConfigError(f"axis {name}: cannot parse {spec!r}") from None


def _recipe_overrides(args) -> dict:
    kw = {}
    if args.agents is not None:
        kw["n_agents"] = args.agents
    if args.trials is not None:
        kw["n_trials"] = args.trials
    if args.seed is not None:
        kw["seed"] = args.seed
    if args.max_steps is not None:
        kw["max_steps_per_trial"] = args.max_steps
    return kw


def _run_sweeps(sweeps, out: Path, jobs: int, tail: int):
    out.mkdir(parents=True, exist_ok=True)
    results = {}
    for sweep in sweeps:
        log.info("sweep %s: %d points", sweep.name, len(sweep.grid))
        done = harness.run_sweep(sweep.grid, sweep.template, jobs=jobs, tail=tail, cache_dir=out / f"points_{sweep.name}")
        harness.write_sweep_csv(out / f"sweep_{sweep.name}.csv", done)
        results[sweep.name] = done
        best = int(np.argmin(done.scores))
        print(f"{sweep.name}: {len(sweep.grid)} points, best {done.points()[best]} -> {done.scores[best]:.2f}")
    _write_combined(out / "sweep.csv", results)
    return results


def _write_combined(path: Path, results):
    import csv

    names = []
    for grid in results.values():
        names += [n for n in grid.axes if n not in names]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["panel"] + names + ["score", "msd"])
        for panel, grid in results.items():
            for point, score, msd in zip(grid.points(), grid.scores, grid.msds):
                w.writerow([panel] + [_fmt(point.get(n, "")) for n in names] + [repr(float(score)), repr(float(msd))])


def _fmt(v):
    return v if isinstance(v, str) else repr(float(v))


def cmd_sweep(args) -> dict:
    out = Path(args.out)
    if args.recipe:
        recipe = recipes.get(args.recipe, **_recipe_overrides(args))
        if recipe.kind == "run":
            results = {}
            for label, spec in recipe.runs.items():
                stats = harness.run_experiment(spec, jobs=args.jobs)
                _write_outputs(out, stats, f"curve_{label}")
                mean, msd = stats.final(args.tail)
                print(f"{label}: final mean {mean:.2f} ± {msd:.2f}")
                results[label] = stats
            return results
        return _run_sweeps(recipe.sweeps, out, args.jobs, args.tail)
    if not args.axis:
        raise ConfigError("sweep needs --recipe or at least one --axis")
    config = _config_from_args(args)
    template = config.experiment()
    axes = dict(parse_axis(a) for a in args.axis)
    valid = {f.name for f in fields(template.agent)}
    for name in axes:
        if name not in valid:
            raise ConfigError(f"axis {name}: not a parameter of this agent ({', '.join(sorted(valid))})")
    return _run_sweeps([recipes.Sweep("custom", harness.SweepGrid(axes), template)], out, args.jobs, args.tail)


# --- replay -----------------------------------------------------------------


def _preferred(agent, percept, rng):
    if isinstance(agent, ProjectiveSimulationAgent):
        row = agent.network.h[agent.network.index[percept]] if percept in agent.network else np.ones(agent.n_actions)
    else:
        row = agent.table.q[agent.table.index[percept]] if percept in agent.table else np.full(agent.n_actions, agent.params.q0)
    return greedy(row, rng)


def greedy_rollout(agent, env, max_steps: int, rng):
    """Follow the most probable action (ties broken at random) without learning."""
    percept = env.reset()
    path = []
    for _ in range(max_steps):
        action = _preferred(agent, percept, rng)
        outcome = env.step(action)
        path.append((percept, action, outcome.next_percept))
        if outcome.terminal:
            return path, True
        percept = outcome.next_percept
    return path, False


def cmd_replay(path, max_steps: int = 10_000, seed: int = 0, verbose: bool = True):
    snap = snapshot.load(path)
    if snap.kind == "ps":
        agent = ProjectiveSimulationAgent.from_snapshot(snap)
    else:
        agent = TdAgent.from_snapshot(snap)
    env_name = snap.params.get("env", harness.GRIDWORLD)
    if env_name == harness.GRIDWORLD:
        maze = gridworld.parse_maze(snap.params["maze"].replace("/", "\n")) if "maze" in snap.params else gridworld.dyna_maze()
        env = gridworld.GridWorld(maze)
        describe = lambda p: str(gridworld.position_of(maze, p))
        names = gridworld.ACTION_NAMES
    elif env_name == harness.MOUNTAINCAR:
        env = mountaincar.MountainCar()
        describe = lambda p: f"bin(x={p // 20}, v={p % 20})"
        names = mountaincar.ACTION_NAMES
    else:
        raise snapshot.SnapshotError(f"unknown env {env_name!r}", 0)
    trajectory, reached = greedy_rollout(agent, env, max_steps, RngStream(seed).generator())
    if verbose:
        for t, (p, a, nxt) in enumerate(trajectory, start=1):
            print(f"{t:5d} {describe(p)} {names[a]} -> {describe(nxt)}")
    print(f"steps: {len(trajectory)} ({'goal reached' if reached else 'step cap hit'})")
    return trajectory, reached


# --- entry point ------------------------------------------------------------


def _default_seed() -> int:
    try:
        return int(os.environ.get(SEED_ENV, "0"))
    except ValueError:
        raise ConfigError(f"{SEED_ENV}: not an integer") from None


def _add_experiment_flags(p):
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--env", choices=harness.ENVIRONMENTS)
    p.add_argument("--agent", choices=AGENT_KINDS)
    p.add_argument("--policy", choices=("softmax", "ratio"))
    for name in ("eta", "gamma", "beta", "alpha", "mu", "epsilon", "q0"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--agents", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--tail", type=int, default=1, help="average the score over the last N trials")
    p.add_argument("--maze", help="maze text file ('#' wall, '.' free, 'S' start, 'G' goal)")
    p.add_argument("--expect-optimum", type=int)
    p.add_argument("--out", default=None)


def _config_from_args(args) -> RunConfig:
    config = RunConfig.from_text(Path(args.config).read_text()) if args.config else RunConfig(seed=_default_seed())
    overrides = {}
    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None and f.name not in ("jobs", "tail"):
            overrides[f.name] = value
    overrides["jobs"] = args.jobs
    overrides["tail"] = args.tail
    return dataclasses.replace(config, **overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="psbench", description="Projective simulation vs Q-learning/SARSA benchmarks")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one agent ensemble and write its learning curve")
    _add_experiment_flags(run)
    run.add_argument("--snapshot", help="also save the memory of agent 0 to this file")
    run.add_argument("--dump-config", action="store_true", help="print the resolved config and exit")

    sweep = sub.add_parser("sweep", help="run a parameter sweep or a figure recipe")
    _add_experiment_flags(sweep)
    sweep.add_argument("--recipe", choices=sorted(recipes.RECIPES))
    sweep.add_argument("--axis", action="append", default=[], help="name=v1,v2,... or name=lo:hi:n")

    replay = sub.add_parser("replay", help="greedy rollout of a saved agent")
    replay.add_argument("snapshot")
    replay.add_argument("--max-steps", type=int, default=10_000)
    replay.add_argument("--seed", type=int, default=0)
    replay.add_argument("--quiet", action="store_true", help="print only the step count")

    sub.add_parser("recipes", help="list the figure recipes")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "run":
            config = _config_from_args(args)
            if args.out is None:
                config.out = config.out or "."
            if args.dump_config:
                print(config.resolved().to_text(), end="")
                return 0
            cmd_run(config)
        elif args.command == "sweep":
            if args.out is None:
                args.out = f"sweep_{args.recipe}" if args.recipe else "sweep_custom"
            if args.seed is None and not args.config:
                args.seed = _default_seed()
            cmd_sweep(args)
        elif args.command == "replay":
            cmd_replay(args.snapshot, args.max_steps, args.seed, verbose=not args.quiet)
        else:
            for name, factory in recipes.RECIPES.items():
                r = factory()
                print(f"{name}  {r.kind:5s} {r.configurations():5d} configurations  {r.description}")
    except (ConfigError, gridworld.MazeError, snapshot.SnapshotError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
