"""Tabular Q-learning and SARSA with epsilon-greedy action selection."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import snapshot
from .core import ActionId, PerceptId, StepOutcome


class TdKind(str, enum.Enum):
    QLEARNING = "q"
    SARSA = "sarsa"


@dataclass(frozen=True)
class TdParams:
    alpha: float
    mu: float
    epsilon: float
    q0: float = 0.0
    kind: TdKind = TdKind.QLEARNING

    def __post_init__(self):
        object.__setattr__(self, "kind", TdKind(self.kind))
        for name in ("alpha", "mu", "epsilon"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")


class QTable:
    """State-action values; rows appear on first access, filled with ``q0``."""

    def __init__(self, n_actions: int, q0: float = 0.0):
        self.n_actions = n_actions
        self.q0 = q0
        self.index: dict[PerceptId, int] = {}
        self.percepts: list[PerceptId] = []
        self.q = np.zeros((0, n_actions))

    def __len__(self):
        return len(self.percepts)

    def __contains__(self, percept):
        return percept in self.index

    def row(self, percept: PerceptId) -> np.ndarray:
        """The live value row for ``percept`` (a view; writes go to the table)."""
        r = self.index.get(percept)
        if r is None:
            r = len(self.percepts)
            self.index[percept] = r
            self.percepts.append(percept)
            self.q = np.vstack([self.q, np.full(self.n_actions, self.q0)])
        return self.q[r]

    def get(self, percept: PerceptId, action: ActionId) -> float:
        r = self.index.get(percept)
        return self.q0 if r is None else float(self.q[r, action])


def greedy(q_row, rng: np.random.Generator) -> ActionId:
    """Argmax with uniform tie-breaking; a draw is consumed only on ties."""
    q_row = np.asarray(q_row)
    best = np.flatnonzero(q_row == q_row.max())
    if len(best) == 1:
        return int(best[0])
    return int(best[int(rng.random() * len(best))])


def epsilon_greedy(q_row, epsilon: float, rng: np.random.Generator) -> ActionId:
    # explore draw first, then the action draw; no explore draw at all when epsilon == 0
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.random() * len(q_row))
    return greedy(q_row, rng)


def q_update(table: QTable, s, a, reward, s_next, terminal, alpha, mu) -> None:
    bootstrap = 0.0 if terminal else float(table.row(s_next).max())
    row = table.row(s)
    row[a] += alpha * (reward + mu * bootstrap - row[a])


def sarsa_update(table: QTable, s, a, reward, s_next, a_next, terminal, alpha, mu) -> None:
    bootstrap = 0.0 if terminal else table.get(s_next, a_next)
    row = table.row(s)
    row[a] += alpha * (reward + mu * bootstrap - row[a])


class TdAgent:
    """Q-learning or SARSA agent.

    The action for the next percept is chosen from the table *before* the
    previous transition is written back, for both kinds.  A non-terminal
    transition is therefore held in ``pending`` until the following
    :meth:`select_action`; terminal transitions are applied at once.  With
    ``epsilon == 0`` and a shared random stream this makes Q-learning and
    SARSA step-for-step identical.
    """

    def __init__(self, n_actions: int, params: TdParams):
        self.n_actions = n_actions
        self.params = params
        self.table = QTable(n_actions, params.q0)
        self.pending: tuple[PerceptId, ActionId, float, PerceptId] | None = None

    @property
    def kind(self) -> TdKind:
        return self.params.kind

    def _apply(self, s, a, reward, s_next, a_next, terminal):
        p = self.params
        if p.kind is TdKind.SARSA and a_next is not None:
            sarsa_update(self.table, s, a, reward, s_next, a_next, terminal, p.alpha, p.mu)
        else:
            q_update(self.table, s, a, reward, s_next, terminal, p.alpha, p.mu)

    def select_action(self, percept: PerceptId, rng: np.random.Generator) -> ActionId:
        action = epsilon_greedy(self.table.row(percept), self.params.epsilon, rng)
        if self.pending is not None:
            s, a, reward, s_next = self.pending
            self.pending = None
            self._apply(s, a, reward, s_next, action, False)
        return action

    def learn(self, percept: PerceptId, action: ActionId, outcome: StepOutcome) -> None:
        if outcome.terminal:
            self._apply(percept, action, outcome.reward, outcome.next_percept, None, True)
        else:
            self.pending = (percept, action, outcome.reward, outcome.next_percept)

    def end_trial(self) -> None:
        # trial cut off by the step cap: no successor action exists, bootstrap greedily
        if self.pending is not None:
            s, a, reward, s_next = self.pending
            self.pending = None
            self._apply(s, a, reward, s_next, None, False)

    def to_snapshot(self) -> snapshot.Snapshot:
        self.end_trial()
        p = self.params
        params = {
            "n_actions": str(self.n_actions),
            "alpha": repr(p.alpha),
            "mu": repr(p.mu),
            "epsilon": repr(p.epsilon),
            "q0": repr(p.q0),
        }
        return snapshot.Snapshot(
            p.kind.value, params, np.array(self.table.percepts, dtype=np.int64), self.table.q.copy()
        )

    @classmethod
    def from_snapshot(cls, snap: snapshot.Snapshot) -> TdAgent:
        kind = TdKind(snap.kind)
        params = TdParams(
            alpha=float(snap.params["alpha"]),
            mu=float(snap.params["mu"]),
            epsilon=float(snap.params["epsilon"]),
            q0=float(snap.params["q0"]),
            kind=kind,
        )
        n_actions = int(snap.params["n_actions"])
        if snap.values.shape[1] != n_actions:
            raise ValueError(f"expected {n_actions} values per row, got {snap.values.shape[1]}")
        agent = cls(n_actions, params)
        agent.table.percepts = [int(p) for p in snap.percepts]
        agent.table.index = {p: i for i, p in enumerate(agent.table.percepts)}
        agent.table.q = snap.values.copy()
        return agent


def QLearningAgent(n_actions, alpha, mu, epsilon, q0=0.0) -> TdAgent:
    return TdAgent(n_actions, TdParams(alpha, mu, epsilon, q0, TdKind.QLEARNING))


def SarsaAgent(n_actions, alpha, mu, epsilon, q0=0.0) -> TdAgent:
    return TdAgent(n_actions, TdParams(alpha, mu, epsilon, q0, TdKind.SARSA))
