from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import pytest

from botprof.trace import ScenarioConfig, TickRecord, Trace

GOLDEN = Path(__file__).parent / "golden"


def data_text(name: str) -> str:
    return resources.files("botprof").joinpath("data", name).read_text("utf-8")


def data_json(name: str):
    return json.loads(data_text(name))


def example1_trace() -> Trace:
    """One-tick reconstruction of the worked example's trace row."""
    obstacles = ((2, 12), (3, 12), (1, 14), (2, 14), (3, 14), (1, 15), (2, 15))
    scenario = ScenarioConfig(38, 38, obstacles, reward_count=4, opponent_count=3)
    tick = TickRecord(
        tick=0,
        time_ms=15995,
        player_pos=(1, 13),
        player_energy=17.0,
        opponent_pos=((3, 16), (4, 12), (2, 12)),
        reward_pos=((9, 0), (37, 37), (37, 0), (30, 30)),
        reward_captured=False,
        iterations=42,
        memory_bytes=924,
        move_key="J",
    )
    return Trace(scenario, (tick,), "example-1")


def small_trace(n: int = 3) -> Trace:
    scenario = ScenarioConfig(10, 8, ((5, 5),), reward_count=2, opponent_count=2)
    ticks = tuple(
        TickRecord(
            tick=k,
            time_ms=1000 * (k + 1),
            player_pos=(k % 10, 1),
            player_energy=20.0 - k,
            opponent_pos=((9, 7), (0, 7)),
            reward_pos=((3, 3), (8, 2)),
            reward_captured=False,
            iterations=10 + k,
            memory_bytes=220 + 22 * k,
            move_key="R",
        )
        for k in range(n)
    )
    return Trace(scenario, ticks, "small")


@pytest.fixture
def example1():
    return example1_trace()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
