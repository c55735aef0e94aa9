"""Contracts shared by every agent and environment, plus seeded random streams."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

PerceptId = int
ActionId = int

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class StepOutcome:
    next_percept: PerceptId
    reward: float
    terminal: bool


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream identified by ``(seed, stream_id)``.

    Streams are derived with :class:`numpy.random.SeedSequence` using the
    stream id as spawn key, so distinct ids give independent PCG64 states
    regardless of the order in which they are created.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= self.seed <= _MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not 0 <= self.stream_id <= _MASK64:
            raise ValueError(f"stream_id must be a 64-bit unsigned integer, got {self.stream_id}")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(seq))


def stream_id(point_index: int, agent_index: int) -> int:
    """Pack a (sweep point, agent) pair into one 64-bit stream id."""
    if not (0 <= point_index < 1 << 32 and 0 <= agent_index < 1 << 32):
        raise ValueError("point and agent indices must fit in 32 bits")
    return (point_index << 32) | agent_index


@runtime_checkable
class Agent(Protocol):
    n_actions: int

    def select_action(self, percept: PerceptId, rng: np.random.Generator) -> ActionId: ...

    def learn(self, percept: PerceptId, action: ActionId, outcome: StepOutcome) -> None: ...

    def end_trial(self) -> None: ...


@runtime_checkable
class Environment(Protocol):
    n_actions: int
    n_percepts: int

    def reset(self) -> PerceptId: ...

    def step(self, action: ActionId) -> StepOutcome: ...


class RandomAgent:
    """Uniformly random policy; the baseline for the untrained-agent comparison."""

    def __init__(self, n_actions: int):
        self.n_actions = n_actions

    def select_action(self, percept, rng):
        return int(rng.random() * self.n_actions)

    def learn(self, percept, action, outcome):
        pass

    def end_trial(self):
        pass
