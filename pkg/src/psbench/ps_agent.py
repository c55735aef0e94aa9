"""Two-layer projective simulation agent.

Percept clips connect to every action clip; deliberation is a single hop
whose probabilities come from the edge weights ``h``.  Each step decays all
glow values, lights up the traversed edge and adds ``glow * reward`` to the
weights.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import snapshot
from .core import ActionId, PerceptId, StepOutcome


class Policy(str, enum.Enum):
    RATIO = "ratio"
    SOFTMAX = "softmax"


@dataclass(frozen=True)
class PsParams:
    eta: float
    gamma: float = 0.0
    beta: float = 1.0
    policy: Policy = Policy.SOFTMAX

    def __post_init__(self):
        object.__setattr__(self, "policy", Policy(self.policy))
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not self.beta > 0.0:
            raise ValueError(f"beta must be positive, got {self.beta}")


def transition_probabilities(h_row, policy=Policy.SOFTMAX, beta: float = 1.0) -> np.ndarray:
    """Hopping probabilities from one percept clip to each action clip.

    ``ratio`` normalizes the weights directly and needs them strictly
    positive. ``softmax`` uses ``exp(beta * h)``, shifted by the row maximum.
    """
    h = np.asarray(h_row, dtype=float)
    if not np.all(np.isfinite(h)):
        raise ValueError("h values must be finite")
    if Policy(policy) is Policy.RATIO:
        if np.any(h <= 0.0):
            raise ValueError("ratio policy requires every h value to be positive")
        weights = h
    else:
        weights = np.exp(beta * (h - h.max()))
    return weights / weights.sum()


def sample_index(probs, u: float) -> int:
    """Inverse-CDF draw: the first index whose cumulative probability exceeds ``u``."""
    acc = 0.0
    for i, p in enumerate(probs):
        acc += p
        if u < acc:
            return i
    return len(probs) - 1


class ClipNetwork:
    """Percept-to-action edge weights ``h`` and glow ``g``, grown lazily by percept."""

    def __init__(self, n_actions: int):
        self.n_actions = n_actions
        self.index: dict[PerceptId, int] = {}
        self.percepts: list[PerceptId] = []
        self.h = np.zeros((0, n_actions))
        self.g = np.zeros((0, n_actions))

    def __len__(self):
        return len(self.percepts)

    def __contains__(self, percept):
        return percept in self.index

    def row(self, percept: PerceptId) -> int:
        """Row of ``percept``, creating the clip with h=1, g=0 on first sight."""
        try:
            return self.index[percept]
        except KeyError:
            pass
        r = len(self.percepts)
        self.index[percept] = r
        self.percepts.append(percept)
        self.h = np.vstack([self.h, np.ones(self.n_actions)])
        self.g = np.vstack([self.g, np.zeros(self.n_actions)])
        return r

    def edge_count(self) -> int:
        return self.h.size


class ProjectiveSimulationAgent:
    def __init__(self, n_actions: int, params: PsParams):
        self.n_actions = n_actions
        self.params = params
        self.network = ClipNetwork(n_actions)

    def probabilities(self, percept: PerceptId) -> np.ndarray:
        r = self.network.row(percept)
        return transition_probabilities(self.network.h[r], self.params.policy, self.params.beta)

    def select_action(self, percept: PerceptId, rng: np.random.Generator) -> ActionId:
        return sample_index(self.probabilities(percept), rng.random())

    def update(self, percept: PerceptId, action: ActionId, reward: float) -> None:
        net = self.network
        r = net.row(percept)
        net.g *= 1.0 - self.params.eta
        net.g[r, action] = 1.0
        if self.params.gamma:
            net.h -= self.params.gamma * (net.h - 1.0)
        if reward:
            net.h += net.g * reward

    def learn(self, percept: PerceptId, action: ActionId, outcome: StepOutcome) -> None:
        self.update(percept, action, outcome.reward)

    def end_trial(self) -> None:
        pass

    def to_snapshot(self) -> snapshot.Snapshot:
        p = self.params
        params = {
            "n_actions": str(self.n_actions),
            "eta": repr(p.eta),
            "gamma": repr(p.gamma),
            "beta": repr(p.beta),
            "policy": p.policy.value,
        }
        values = np.hstack([self.network.h, self.network.g])
        return snapshot.Snapshot("ps", params, np.array(self.network.percepts, dtype=np.int64), values)

    @classmethod
    def from_snapshot(cls, snap: snapshot.Snapshot) -> ProjectiveSimulationAgent:
        if snap.kind != "ps":
            raise ValueError(f"not a projective simulation snapshot: kind={snap.kind!r}")
        n_actions = int(snap.params["n_actions"])
        params = PsParams(
            eta=float(snap.params["eta"]),
            gamma=float(snap.params["gamma"]),
            beta=float(snap.params["beta"]),
            policy=snap.params["policy"],
        )
        if snap.values.shape[1] != 2 * n_actions:
            raise ValueError(f"expected {2 * n_actions} values per row, got {snap.values.shape[1]}")
        agent = cls(n_actions, params)
        net = agent.network
        net.percepts = [int(p) for p in snap.percepts]
        net.index = {p: i for i, p in enumerate(net.percepts)}
        net.h = snap.values[:, :n_actions].copy()
        net.g = snap.values[:, n_actions:].copy()
        return agent
