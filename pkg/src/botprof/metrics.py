"""Per-tick metric vectors derived from raw trace observations."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

from .trace import Cell, Trace, TraceValidationError, validate_trace


def euclidean_distance(a: Cell, b: Cell) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def protection(agent: Cell, opponent: Cell, obstacles: Sequence[Cell]) -> int:
    """Obstacles inside or on the border of the rectangle spanned by two cells."""
    x0, x1 = sorted((agent[0], opponent[0]))
    y0, y1 = sorted((agent[1], opponent[1]))
    return sum(1 for ox, oy in obstacles if x0 <= ox <= x1 and y0 <= oy <= y1)


def nearest(entity: Cell, candidates: Sequence[Cell]) -> tuple[int, float]:
    """Index and distance of the closest candidate; lowest index wins ties."""
    if not candidates:
        raise ValueError("nearest() needs at least one candidate")
    best_i, best_d = 0, euclidean_distance(entity, candidates[0])
    for i in range(1, len(candidates)):
        d = euclidean_distance(entity, candidates[i])
        if d < best_d:
            best_i, best_d = i, d
    return best_i, best_d


@dataclass(frozen=True, slots=True)
class MetricVector:
    """Metrics of one tick.

    ``dist_nearest_opponent_nearest_reward`` pairs the opponent nearest to the
    player with the reward nearest to the player.
    """

    dist_player_opponent: tuple[float, ...]
    dist_player_nearest_reward: float
    dist_nearest_opponent_nearest_reward: float
    protection: tuple[int, ...]
    energy: float
    time_ms: int
    reward_captured: bool
    iterations: int
    memory_bytes: int
    nearest_opponent_index: int
    nearest_reward_index: int

    @property
    def dist_player_nearest_opponent(self) -> float:
        return self.dist_player_opponent[self.nearest_opponent_index]

    @property
    def protection_nearest_opponent(self) -> int:
        return self.protection[self.nearest_opponent_index]


def compute_metrics(trace: Trace) -> list[MetricVector]:
    violations = validate_trace(trace)
    if violations:
        raise TraceValidationError(violations)
    obstacles = trace.scenario.obstacles
    out = []
    for t in trace.ticks:
        p = t.player_pos
        opp_i, _ = nearest(p, t.opponent_pos)
        rew_i, d_pr = nearest(p, t.reward_pos)
        out.append(
            MetricVector(
                dist_player_opponent=tuple(euclidean_distance(p, o) for o in t.opponent_pos),
                dist_player_nearest_reward=d_pr,
                dist_nearest_opponent_nearest_reward=euclidean_distance(
                    t.opponent_pos[opp_i], t.reward_pos[rew_i]
                ),
                protection=tuple(protection(p, o, obstacles) for o in t.opponent_pos),
                energy=t.player_energy,
                time_ms=t.time_ms,
                reward_captured=t.reward_captured,
                iterations=t.iterations,
                memory_bytes=t.memory_bytes,
                nearest_opponent_index=opp_i,
                nearest_reward_index=rew_i,
            )
        )
    return out


# Scalar views a network antecedent can bind to, by name.
METRIC_SOURCES = {
    "dist_player_opponent": lambda m: m.dist_player_nearest_opponent,
    "dist_player_reward": lambda m: m.dist_player_nearest_reward,
    "dist_opponent_reward": lambda m: m.dist_nearest_opponent_nearest_reward,
    "protection": lambda m: float(m.protection_nearest_opponent),
    "energy": lambda m: m.energy,
    "time_ms": lambda m: float(m.time_ms),
    "iterations": lambda m: float(m.iterations),
    "memory_bytes": lambda m: float(m.memory_bytes),
}
