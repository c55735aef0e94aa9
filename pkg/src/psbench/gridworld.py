"""Deterministic 6x9 maze with walls, a fixed start and one rewarded goal cell.

Positions are ``(row, col)`` with row 1 at the top.  Moves into a wall or
off the grid leave the agent in place but still cost a step.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import StepOutcome

UP, RIGHT, DOWN, LEFT = range(4)
ACTION_NAMES = ("up", "right", "down", "left")
MOVES = ((-1, 0), (0, 1), (1, 0), (0, -1))

DYNA_MAZE = """\
.......#G
..#....#.
S.#....#.
..#......
.....#...
.........
"""
DYNA_MAZE_OPTIMUM = 14


class MazeError(ValueError):
    pass


class UnreachableGoalError(MazeError):
    pass


@dataclass(frozen=True)
class MazeSpec:
    rows: int
    cols: int
    walls: frozenset
    start: tuple
    goal: tuple

    def __post_init__(self):
        for name in ("start", "goal"):
            pos = getattr(self, name)
            if not self.inside(pos):
                raise MazeError(f"{name} {pos} lies outside the {self.rows}x{self.cols} grid")
            if pos in self.walls:
                raise MazeError(f"{name} {pos} is a wall")
        for w in self.walls:
            if not self.inside(w):
                raise MazeError(f"wall {w} lies outside the grid")

    def inside(self, pos) -> bool:
        r, c = pos
        return 1 <= r <= self.rows and 1 <= c <= self.cols

    def free(self, pos) -> bool:
        return self.inside(pos) and pos not in self.walls

    @property
    def n_cells(self) -> int:
        return self.rows * self.cols

    def render(self) -> str:
        lines = []
        for r in range(1, self.rows + 1):
            line = ""
            for c in range(1, self.cols + 1):
                pos = (r, c)
                line += "S" if pos == self.start else "G" if pos == self.goal else "#" if pos in self.walls else "."
            lines.append(line)
        return "\n".join(lines) + "\n"


def parse_maze(text: str, expect_optimum: int | None = None) -> MazeSpec:
    """Parse the ``#./S/G`` maze format, optionally checking the BFS optimum."""
    rows = [line.strip() for line in text.splitlines() if line.strip()]
    if not rows:
        raise MazeError("empty maze")
    width = len(rows[0])
    walls, start, goal = set(), None, None
    for r, line in enumerate(rows, start=1):
        if len(line) != width:
            raise MazeError(f"row {r} has length {len(line)}, expected {width}")
        for c, ch in enumerate(line, start=1):
            if ch == "#":
                walls.add((r, c))
            elif ch == "S":
                if start is not None:
                    raise MazeError("more than one start cell")
                start = (r, c)
            elif ch == "G":
                if goal is not None:
                    raise MazeError("more than one goal cell")
                goal = (r, c)
            elif ch != ".":
                raise MazeError(f"unknown maze character {ch!r} at row {r}, column {c}")
    if start is None or goal is None:
        raise MazeError("maze needs exactly one 'S' and one 'G'")
    spec = MazeSpec(len(rows), width, frozenset(walls), start, goal)
    if expect_optimum is not None:
        found = shortest_path_length(spec)
        if found != expect_optimum:
            raise MazeError(f"shortest path is {found} steps, expected {expect_optimum}")
    return spec


def load_maze(path, expect_optimum: int | None = None) -> MazeSpec:
    return parse_maze(Path(path).read_text(), expect_optimum)


def dyna_maze() -> MazeSpec:
    return parse_maze(DYNA_MAZE, expect_optimum=DYNA_MAZE_OPTIMUM)


def move(spec: MazeSpec, pos, action: int):
    dr, dc = MOVES[action]
    target = (pos[0] + dr, pos[1] + dc)
    return target if spec.free(target) else pos


def percept_of(spec: MazeSpec, pos) -> int:
    """Row-major index over all grid cells, walls included."""
    return (pos[0] - 1) * spec.cols + (pos[1] - 1)


def position_of(spec: MazeSpec, percept: int):
    return divmod(percept, spec.cols)[0] + 1, percept % spec.cols + 1


def step(spec: MazeSpec, pos, action: int):
    """Return ``(new_pos, StepOutcome)`` for one move from ``pos``."""
    new = move(spec, pos, action)
    done = new == spec.goal
    return new, StepOutcome(percept_of(spec, new), 1.0 if done else 0.0, done)


def shortest_path_length(spec: MazeSpec) -> int:
    dist = {spec.start: 0}
    queue = deque([spec.start])
    while queue:
        pos = queue.popleft()
        if pos == spec.goal:
            return dist[pos]
        for action in range(4):
            nxt = move(spec, pos, action)
            if nxt not in dist:
                dist[nxt] = dist[pos] + 1
                queue.append(nxt)
    raise UnreachableGoalError(f"goal {spec.goal} cannot be reached from {spec.start}")


def transition_table(spec: MazeSpec) -> np.ndarray:
    """Next-percept lookup of shape (n_cells, 4); wall rows map to themselves."""
    table = np.zeros((spec.n_cells, 4), dtype=np.int64)
    for r in range(1, spec.rows + 1):
        for c in range(1, spec.cols + 1):
            s = percept_of(spec, (r, c))
            for a in range(4):
                table[s, a] = percept_of(spec, move(spec, (r, c), a)) if spec.free((r, c)) else s
    return table


class GridWorld:
    n_actions = 4

    def __init__(self, spec: MazeSpec | None = None):
        self.spec = spec if spec is not None else dyna_maze()
        self.n_percepts = self.spec.n_cells
        self.pos = self.spec.start

    def reset(self) -> int:
        self.pos = self.spec.start
        return percept_of(self.spec, self.pos)

    def step(self, action: int) -> StepOutcome:
        self.pos, outcome = step(self.spec, self.pos, action)
        return outcome
