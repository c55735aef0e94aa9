"""Plain-text snapshots of agent memory (clip networks and Q-tables).

Layout::

    psbench-snapshot 1
    kind ps
    <key> <value>            # any number of parameter lines
    rows <n> <width>
    <percept> <v_1> ... <v_width>   # n lines
    end

Floats are written with ``repr`` so a round trip is exact.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAGIC = "psbench-snapshot 1"


class SnapshotError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


@dataclass
class Snapshot:
    kind: str
    params: dict[str, str] = field(default_factory=dict)
    percepts: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    values: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))


def dumps(snap: Snapshot) -> str:
    out = io.StringIO()
    out.write(MAGIC + "\n")
    out.write(f"kind {snap.kind}\n")
    for key, value in snap.params.items():
        out.write(f"{key} {value}\n")
    n, width = snap.values.shape
    out.write(f"rows {n} {width}\n")
    for percept, row in zip(snap.percepts, snap.values):
        out.write(" ".join([str(int(percept))] + [repr(float(v)) for v in row]) + "\n")
    out.write("end\n")
    return out.getvalue()


def loads(text: str) -> Snapshot:
    data = text.encode()
    lines = []
    pos = 0
    for raw in data.splitlines(keepends=True):
        lines.append((pos, raw.decode().rstrip("\r\n")))
        pos += len(raw)
    eof = len(data)
    it = iter(lines)

    def next_line(what):
        try:
            return next(it)
        except StopIteration:
            raise SnapshotError(f"unexpected end of file, expected {what}", eof) from None

    offset, line = next_line("header")
    if line != MAGIC:
        raise SnapshotError(f"bad header {line!r}", offset)
    offset, line = next_line("kind line")
    key, _, kind = line.partition(" ")
    if key != "kind" or not kind:
        raise SnapshotError(f"expected 'kind <name>', got {line!r}", offset)

    params = {}
    while True:
        offset, line = next_line("'rows' line")
        key, _, value = line.partition(" ")
        if key == "rows":
            break
        if not key or not value:
            raise SnapshotError(f"malformed parameter line {line!r}", offset)
        params[key] = value
    try:
        n, width = (int(tok) for tok in value.split())
    except ValueError:
        raise SnapshotError(f"malformed rows line {line!r}", offset) from None

    percepts = np.zeros(n, dtype=np.int64)
    values = np.zeros((n, width))
    for i in range(n):
        offset, line = next_line(f"row {i + 1} of {n}")
        tokens = line.split()
        if len(tokens) != width + 1:
            raise SnapshotError(f"row has {len(tokens)} fields, expected {width + 1}", offset)
        try:
            percepts[i] = int(tokens[0])
            values[i] = [float(tok) for tok in tokens[1:]]
        except ValueError:
            raise SnapshotError(f"non-numeric field in row {line!r}", offset) from None
    offset, line = next_line("'end'")
    if line != "end":
        raise SnapshotError(f"expected 'end', got {line!r}", offset)
    return Snapshot(kind, params, percepts, values)


def save(snap: Snapshot, path) -> None:
    Path(path).write_text(dumps(snap))


def load(path) -> Snapshot:
    return loads(Path(path).read_text())
