"""Mountain car with a 20x20 grid over (position, velocity) as the percept."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import StepOutcome

X_MIN, X_MAX = -1.2, 0.6
V_MIN, V_MAX = -0.07, 0.07
X_GOAL = 0.5
X_START, V_START = -0.5, 0.0
FORCE = 0.001
GRAVITY = 0.0025

# action index -> acceleration direction
FORCES = (-1, 0, 1)
ACTION_NAMES = ("left", "none", "right")


@dataclass(frozen=True)
class CarState:
    x: float = X_START
    v: float = V_START


@dataclass(frozen=True)
class BinSpec:
    n_x: int = 20
    n_v: int = 20
    x_range: tuple = (X_MIN, X_MAX)
    v_range: tuple = (V_MIN, V_MAX)

    @property
    def n_percepts(self) -> int:
        return self.n_x * self.n_v


def clamp_velocity(v: float) -> float:
    return min(V_MAX, max(V_MIN, v))


def dynamics(x: float, v: float, force: int) -> tuple[float, float, bool]:
    """One integration step; returns ``(x, v, reached_goal)``.

    Velocity uses the old position, position uses the new velocity.
    Hitting the left wall stops the car.
    """
    v = clamp_velocity(v + FORCE * force - GRAVITY * math.cos(3.0 * x))
    x = x + v
    if x < X_MIN:
        x, v = X_MIN, 0.0
    elif x > X_MAX:
        x = X_MAX
    return x, v, x >= X_GOAL


def _bin(value, lo, hi, n):
    k = math.floor((value - lo) / ((hi - lo) / n))
    return min(n - 1, max(0, k))


def discretize(state: CarState, spec: BinSpec = BinSpec()) -> int:
    bx = _bin(state.x, *spec.x_range, spec.n_x)
    bv = _bin(state.v, *spec.v_range, spec.n_v)
    return spec.n_v * bx + bv


def step(state: CarState, action: int, spec: BinSpec = BinSpec()) -> tuple[CarState, StepOutcome]:
    x, v, done = dynamics(state.x, state.v, FORCES[action])
    new = CarState(x, v)
    return new, StepOutcome(discretize(new, spec), 1.0 if done else 0.0, done)


class MountainCar:
    n_actions = 3

    def __init__(self, bins: BinSpec | None = None):
        self.bins = bins if bins is not None else BinSpec()
        self.n_percepts = self.bins.n_percepts
        self.state = CarState()

    def reset(self) -> int:
        self.state = CarState()
        return discretize(self.state, self.bins)

    def step(self, action: int) -> StepOutcome:
        self.state, outcome = step(self.state, action, self.bins)
        return outcome
