"""Fixed protocols that regenerate each benchmark figure's data.

A recipe is either a set of sweeps (one CSV per panel) or a set of learning
curves (one CSV per agent).  All constants live here so reproducing a figure
needs no parameters on the command line.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .harness import ExperimentSpec, SweepGrid, linspace
from .ps_agent import PsParams
from .td_agents import TdParams

GRID_AXIS = linspace(0.0, 1.0, 21)
GRID_Q0 = [0.0, 1.0]
GRID_EPSILON = [0.0, 0.01, 0.05, 0.1, 0.2]

# best settings used for the learning-curve recipes
GRID_PS_ETA = 0.2
GRID_TD = dict(alpha=0.5, mu=0.9, epsilon=0.0, q0=1.0)
MC_PS_ETA = 0.024
MC_Q = dict(alpha=0.25, mu=0.9, epsilon=0.01, q0=1.0)
MC_SARSA = dict(alpha=0.15, mu=0.9, epsilon=0.01, q0=1.0)


@dataclass
class Sweep:
    name: str
    grid: SweepGrid
    template: ExperimentSpec


@dataclass
class Recipe:
    name: str
    description: str
    sweeps: list[Sweep] = field(default_factory=list)
    runs: dict[str, ExperimentSpec] = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return "sweep" if self.sweeps else "run"

    def configurations(self) -> int:
        return sum(len(s.grid) for s in self.sweeps) + len(self.runs)


def _gw(agent, **kw):
    return ExperimentSpec("gridworld", agent, **kw)


def _mc(agent, **kw):
    return ExperimentSpec("mountaincar", agent, **kw)


def fig3(**kw) -> Recipe:
    eta = linspace(0.0, 0.4, 81)
    return Recipe(
        "fig3",
        "grid world: PS final-trial steps vs glow damping, softmax and ratio policies",
        sweeps=[
            Sweep(policy, SweepGrid({"eta": eta}), _gw(PsParams(0.0, policy=policy), **kw))
            for policy in ("softmax", "ratio")
        ],
    )


def fig4(**kw) -> Recipe:
    return Recipe(
        "fig4",
        "grid world: PS learning curves for three glow damping values",
        runs={f"eta_{eta:g}": _gw(PsParams(eta), **kw) for eta in (1e-4, 0.1, 0.24)},
    )


def fig5(**kw) -> Recipe:
    axes = {"q0": GRID_Q0, "epsilon": GRID_EPSILON, "alpha": GRID_AXIS, "mu": GRID_AXIS}
    return Recipe(
        "fig5",
        "grid world: Q-learning and SARSA final-trial steps over alpha x mu x Q0 x epsilon",
        sweeps=[Sweep(kind, SweepGrid(dict(axes)), _gw(TdParams(0.0, 0.0, 0.0, 0.0, kind), **kw)) for kind in ("q", "sarsa")],
    )


def fig6(**kw) -> Recipe:
    return Recipe(
        "fig6",
        "grid world: learning curves of tuned PS, Q-learning and SARSA",
        runs={
            "ps": _gw(PsParams(GRID_PS_ETA), **kw),
            "q": _gw(TdParams(kind="q", **GRID_TD), **kw),
            "sarsa": _gw(TdParams(kind="sarsa", **GRID_TD), **kw),
        },
    )


def fig7(**kw) -> Recipe:
    return Recipe(
        "fig7",
        "mountain car: PS final-trial steps vs glow damping",
        sweeps=[Sweep("softmax", SweepGrid({"eta": linspace(0.0, 0.04, 41)}), _mc(PsParams(0.0), **kw))],
    )


def fig8(**kw) -> Recipe:
    axes = {"alpha": GRID_AXIS, "mu": GRID_AXIS}
    return Recipe(
        "fig8",
        "mountain car: Q-learning and SARSA final-trial steps over alpha x mu (Q0=1, epsilon=0.01)",
        sweeps=[
            Sweep(kind, SweepGrid(dict(axes)), _mc(TdParams(0.0, 0.0, 0.01, 1.0, kind), **kw)) for kind in ("q", "sarsa")
        ],
    )


def fig9(**kw) -> Recipe:
    return Recipe(
        "fig9",
        "mountain car: learning curves of tuned PS, Q-learning and SARSA",
        runs={
            "ps": _mc(PsParams(MC_PS_ETA), **kw),
            "q": _mc(TdParams(kind="q", **MC_Q), **kw),
            "sarsa": _mc(TdParams(kind="sarsa", **MC_SARSA), **kw),
        },
    )


RECIPES = {f.__name__: f for f in (fig3, fig4, fig5, fig6, fig7, fig8, fig9)}


def get(name: str, **kw) -> Recipe:
    try:
        return RECIPES[name](**kw)
    except KeyError:
        raise KeyError(f"unknown recipe {name!r}; available: {', '.join(RECIPES)}") from None
