"""The ``ydy-trace v1`` text format and its in-memory model.

A trace file holds only raw observations. Distances, protection and every
other derived metric are recomputed from positions by :mod:`botprof.metrics`.

Layout::

    # ydy-trace v1
    width = 38
    height = 38
    opponents = 3
    rewards = 4
    max_time_ms = 150000
    subject = greedy-42
    obstacles = (4,7);(10,2)

    tick,time_ms,px,py,energy,o1x,o1y,...,r1x,r1y,...,captured,iterations,memory_bytes,move
    0,1000,12,5,20.0,...
"""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass
from typing import TextIO

Cell = tuple[int, int]

MAGIC = "# ydy-trace v1"
HEADER_KEYS = ("width", "height", "opponents", "rewards", "max_time_ms", "subject", "obstacles")
_FORBIDDEN_MOVE_CHARS = {",", "\n", "\r", " ", "\t"}


class TraceError(ValueError):
    """Base class for trace parsing and validation failures."""


class TraceSyntaxError(TraceError):
    def __init__(self, message: str, line: int, column: int = 1) -> None:
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class TraceValidationError(TraceError):
    def __init__(self, violations: list[Violation]) -> None:
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


@dataclass(frozen=True, slots=True)
class Violation:
    field: str
    rule: str
    tick: int | None = None

    def __str__(self) -> str:
        if self.tick is None:
            return f"{self.field} {self.rule}"
        return f"{self.field} {self.rule} at tick {self.tick}"


@dataclass(frozen=True, slots=True)
class ScenarioConfig:
    width: int
    height: int
    obstacles: tuple[Cell, ...] = ()
    reward_count: int = 4
    opponent_count: int = 3
    max_time_ms: int = 150000

    def in_bounds(self, cell: Cell) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height


@dataclass(frozen=True, slots=True)
class TickRecord:
    tick: int
    time_ms: int
    player_pos: Cell
    player_energy: float
    opponent_pos: tuple[Cell, ...]
    reward_pos: tuple[Cell, ...]
    reward_captured: bool
    iterations: int
    memory_bytes: int
    move_key: str


@dataclass(frozen=True, slots=True)
class Trace:
    scenario: ScenarioConfig
    ticks: tuple[TickRecord, ...]
    subject_id: str = ""


def columns(scenario: ScenarioConfig) -> list[str]:
    """CSV header columns for a scenario."""
    cols = ["tick", "time_ms", "px", "py", "energy"]
    for i in range(1, scenario.opponent_count + 1):
        cols += [f"o{i}x", f"o{i}y"]
    for i in range(1, scenario.reward_count + 1):
        cols += [f"r{i}x", f"r{i}y"]
    return cols + ["captured", "iterations", "memory_bytes", "move"]


def validate_trace(trace: Trace) -> list[Violation]:
    """Every invariant violation in ``trace``; empty when the trace is valid."""
    sc = trace.scenario
    out: list[Violation] = []
    if type(sc.width) is not int or sc.width <= 0:
        out.append(Violation("width", "must be a positive integer"))
    if type(sc.height) is not int or sc.height <= 0:
        out.append(Violation("height", "must be a positive integer"))
    if sc.reward_count < 1:
        out.append(Violation("rewards", "must be at least 1"))
    if sc.opponent_count < 1:
        out.append(Violation("opponents", "must be at least 1"))
    if sc.max_time_ms <= 0:
        out.append(Violation("max_time_ms", "must be positive"))
    seen: set[Cell] = set()
    for i, cell in enumerate(sc.obstacles):
        if not sc.in_bounds(cell):
            out.append(Violation(f"obstacles[{i}]", f"{cell} out of bounds"))
        if cell in seen:
            out.append(Violation(f"obstacles[{i}]", f"{cell} duplicated"))
        seen.add(cell)
    if "\n" in trace.subject_id or "\r" in trace.subject_id or trace.subject_id != trace.subject_id.strip():
        out.append(Violation("subject", "must be a single line without surrounding whitespace"))
    if not trace.ticks:
        out.append(Violation("trace", "has no ticks"))
        return out

    prev_time: int | None = None
    for k, t in enumerate(trace.ticks):
        if t.tick != k:
            out.append(Violation("tick", f"is {t.tick}, expected {k}", k))
        if prev_time is not None and t.time_ms <= prev_time:
            out.append(Violation("time_ms", "not increasing", k))
        elif t.time_ms < 0:
            out.append(Violation("time_ms", "negative", k))
        prev_time = t.time_ms
        if not sc.in_bounds(t.player_pos):
            out.append(Violation("player_pos", f"{t.player_pos} out of bounds", k))
        if not math.isfinite(t.player_energy) or t.player_energy < 0:
            out.append(Violation("player_energy", f"{t.player_energy} is not a non-negative number", k))
        for name, cells, expected in (
            ("opponent_pos", t.opponent_pos, sc.opponent_count),
            ("reward_pos", t.reward_pos, sc.reward_count),
        ):
            if len(cells) != expected:
                out.append(Violation(name, f"has {len(cells)} entries, expected {expected}", k))
            for i, cell in enumerate(cells):
                if not sc.in_bounds(cell):
                    out.append(Violation(f"{name}[{i}]", f"{cell} out of bounds", k))
        if t.iterations < 0:
            out.append(Violation("iterations", "negative", k))
        if t.memory_bytes < 0:
            out.append(Violation("memory_bytes", "negative", k))
        if len(t.move_key) != 1 or t.move_key in _FORBIDDEN_MOVE_CHARS:
            out.append(Violation("move_key", f"{t.move_key!r} is not a single printable character", k))
    return out


def _fmt_cell(cell: Cell) -> str:
    return f"({cell[0]},{cell[1]})"


def write_trace(trace: Trace) -> str:
    """Serialize ``trace``; ``parse_trace`` recovers it exactly."""
    sc = trace.scenario
    header = [
        MAGIC,
        f"width = {sc.width}",
        f"height = {sc.height}",
        f"opponents = {sc.opponent_count}",
        f"rewards = {sc.reward_count}",
        f"max_time_ms = {sc.max_time_ms}",
        f"subject = {trace.subject_id}",
        "obstacles = " + ";".join(_fmt_cell(c) for c in sc.obstacles),
    ]
    lines = [h.rstrip() for h in header] + ["", ",".join(columns(sc))]
    for t in trace.ticks:
        row = [str(t.tick), str(t.time_ms), str(t.player_pos[0]), str(t.player_pos[1]), repr(float(t.player_energy))]
        for x, y in t.opponent_pos + t.reward_pos:
            row += [str(x), str(y)]
        row += ["true" if t.reward_captured else "false", str(t.iterations), str(t.memory_bytes), t.move_key]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def dump_trace(trace: Trace, fp: TextIO) -> None:
    fp.write(write_trace(trace))


def _parse_int(text: str, line: int, column: int, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise TraceSyntaxError(f"{what}: expected an integer, got {text!r}", line, column) from None


def _parse_obstacles(value: str, line: int, column: int) -> tuple[Cell, ...]:
    if not value:
        return ()
    cells: list[Cell] = []
    offset = column
    for chunk in value.split(";"):
        body = chunk.strip()
        if not (body.startswith("(") and body.endswith(")")):
            raise TraceSyntaxError(f"obstacle must look like (x,y), got {chunk!r}", line, offset)
        parts = body[1:-1].split(",")
        if len(parts) != 2:
            raise TraceSyntaxError(f"obstacle must look like (x,y), got {chunk!r}", line, offset)
        cells.append((_parse_int(parts[0].strip(), line, offset, "obstacle x"),
                      _parse_int(parts[1].strip(), line, offset, "obstacle y")))
        offset += len(chunk) + 1
    return tuple(cells)


def parse_trace(source: str | TextIO | Iterable[str]) -> Trace:
    """Parse a ``ydy-trace v1`` document and validate it.

    Raises
    ------
    TraceSyntaxError
        Malformed text, with 1-based line and column.
    TraceValidationError
        Well-formed text that breaks a trace invariant.
    """
    if isinstance(source, str):
        lines = source.split("\n")
    else:
        lines = "".join(source).split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    lines = [ln[:-1] if ln.endswith("\r") else ln for ln in lines]

    if not lines or lines[0].strip() != MAGIC:
        raise TraceSyntaxError(f"first line must be {MAGIC!r}", 1)

    header: dict[str, tuple[str, int, int]] = {}
    n = 1
    while n < len(lines) and lines[n].strip():
        text = lines[n]
        if "=" not in text:
            raise TraceSyntaxError("expected 'key = value'", n + 1)
        key, _, value = text.partition("=")
        key = key.strip()
        if key not in HEADER_KEYS:
            raise TraceSyntaxError(f"unknown header key {key!r}", n + 1)
        if key in header:
            raise TraceSyntaxError(f"duplicate header key {key!r}", n + 1)
        value_col = len(text) - len(value.lstrip()) + 1
        header[key] = (value.strip(), n + 1, value_col)
        n += 1
    missing = [k for k in HEADER_KEYS if k not in header]
    if missing:
        raise TraceSyntaxError(f"missing header keys: {', '.join(missing)}", n + 1)

    def hint(key: str) -> int:
        value, line, col = header[key]
        return _parse_int(value, line, col, key)

    obs_value, obs_line, obs_col = header["obstacles"]
    scenario = ScenarioConfig(
        width=hint("width"),
        height=hint("height"),
        obstacles=_parse_obstacles(obs_value, obs_line, obs_col),
        reward_count=hint("rewards"),
        opponent_count=hint("opponents"),
        max_time_ms=hint("max_time_ms"),
    )
    subject = header["subject"][0]

    n += 1  # blank separator
    if n >= len(lines):
        raise TraceValidationError([Violation("trace", "has no ticks")])
    expected = columns(scenario)
    got = [c.strip() for c in lines[n].split(",")]
    if got != expected:
        raise TraceSyntaxError(
            f"CSV header does not match scenario (opponents={scenario.opponent_count}, "
            f"rewards={scenario.reward_count}); expected {','.join(expected)}",
            n + 1,
        )

    ticks: list[TickRecord] = []
    for idx in range(n + 1, len(lines)):
        text = lines[idx]
        lineno = idx + 1
        if not text.strip():
            raise TraceSyntaxError("blank line inside tick table", lineno)
        fields = text.split(",")
        starts = [0]
        for f in fields[:-1]:
            starts.append(starts[-1] + len(f) + 1)
        if len(fields) != len(expected):
            raise TraceSyntaxError(f"expected {len(expected)} fields, got {len(fields)}", lineno)

        def num(i: int) -> int:
            return _parse_int(fields[i], lineno, starts[i] + 1, expected[i])

        try:
            energy = float(fields[4])
        except ValueError:
            raise TraceSyntaxError(f"energy: expected a number, got {fields[4]!r}", lineno, starts[4] + 1) from None
        pos = 5
        opponents = []
        for _ in range(scenario.opponent_count):
            opponents.append((num(pos), num(pos + 1)))
            pos += 2
        rewards = []
        for _ in range(scenario.reward_count):
            rewards.append((num(pos), num(pos + 1)))
            pos += 2
        flag = fields[pos]
        if flag not in ("true", "false"):
            raise TraceSyntaxError(f"captured: expected true/false, got {flag!r}", lineno, starts[pos] + 1)
        ticks.append(
            TickRecord(
                tick=num(0),
                time_ms=num(1),
                player_pos=(num(2), num(3)),
                player_energy=energy,
                opponent_pos=tuple(opponents),
                reward_pos=tuple(rewards),
                reward_captured=flag == "true",
                iterations=num(pos + 1),
                memory_bytes=num(pos + 2),
                move_key=fields[pos + 3],
            )
        )

    trace = Trace(scenario=scenario, ticks=tuple(ticks), subject_id=subject)
    violations = validate_trace(trace)
    if violations:
        raise TraceValidationError(violations)
    return trace


def load_trace(path: str) -> Trace:
    with open(path, encoding="utf-8") as fp:
        return parse_trace(fp.read())
