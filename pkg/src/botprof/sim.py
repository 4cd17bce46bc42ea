"""Seeded grid-world simulator that produces ``ydy-trace`` traces.

One player bot, opponents that chase it, rewards that respawn when captured,
and static obstacles. Energy decays on a fixed schedule, grows on captures and
is stolen by opponents sharing the player's cell. The session ends after the
requested number of ticks or when energy reaches zero.
"""

from __future__ import annotations

import random
from collections.abc import Sequence
from dataclasses import dataclass, field

from .metrics import euclidean_distance, nearest, protection
from .trace import Cell, ScenarioConfig, TickRecord, Trace

MOVES: dict[str, Cell] = {"up": (0, -1), "down": (0, 1), "left": (-1, 0), "right": (1, 0), "stay": (0, 0)}
MOVE_ORDER = ("up", "down", "left", "right", "stay")
MOVE_KEYS = {"up": "U", "down": "D", "left": "L", "right": "R", "stay": "S"}
POLICIES = ("random", "greedy", "evasive", "heuristic")
# Modeled allocation per search step; 42 steps -> 924 bytes.
NODE_BYTES = 22


@dataclass(frozen=True, slots=True)
class PolicyStats:
    iterations: int
    memory_bytes: int


@dataclass(frozen=True, slots=True)
class WorldState:
    scenario: ScenarioConfig
    player: Cell
    opponents: tuple[Cell, ...]
    rewards: tuple[Cell, ...]
    energy: float
    obstacle_set: frozenset[Cell] = field(default=frozenset(), compare=False)

    def __post_init__(self) -> None:
        if not self.obstacle_set and self.scenario.obstacles:
            object.__setattr__(self, "obstacle_set", frozenset(self.scenario.obstacles))

    def free(self, cell: Cell) -> bool:
        return self.scenario.in_bounds(cell) and cell not in self.obstacle_set


@dataclass(frozen=True)
class SimulationParams:
    scenario: ScenarioConfig
    seed: int = 0
    ticks: int = 500
    tick_ms: int = 1000
    energy_start: float = 20
    decay_every_ticks: int = 5
    decay_amount: float = 1
    reward_energy: float = 5
    steal_amount: float = 2
    policy: str = "greedy"
    close_threshold: float = 4.0
    opponent_move_every: int = 2
    subject_id: str | None = None

    def __post_init__(self) -> None:
        problems = []
        if self.ticks <= 0:
            problems.append("ticks must be positive")
        if self.tick_ms <= 0:
            problems.append("tick_ms must be positive")
        if self.decay_every_ticks <= 0 or self.opponent_move_every <= 0:
            problems.append("decay_every_ticks and opponent_move_every must be positive")
        if min(self.energy_start, self.decay_amount, self.reward_energy, self.steal_amount) < 0:
            problems.append("energy amounts must be non-negative")
        if self.policy not in POLICIES:
            problems.append(f"policy must be one of {', '.join(POLICIES)}")
        sc = self.scenario
        free_cells = sc.width * sc.height - len(set(sc.obstacles))
        if free_cells < 1 + sc.opponent_count + sc.reward_count:
            problems.append("scenario has too few free cells for all entities")
        if problems:
            raise ValueError("; ".join(problems))


def default_scenario(seed: int = 0, width: int = 38, height: int = 38, obstacle_count: int = 20) -> ScenarioConfig:
    rng = random.Random(f"scenario:{seed}")
    cells = rng.sample(range(width * height), obstacle_count)
    obstacles = tuple(sorted((c % width, c // width) for c in cells))
    return ScenarioConfig(width, height, obstacles, reward_count=4, opponent_count=3)


def legal_moves(state: WorldState, pos: Cell) -> list[str]:
    out = []
    for name in MOVE_ORDER:
        dx, dy = MOVES[name]
        if state.free((pos[0] + dx, pos[1] + dy)):
            out.append(name)
    return out


def _step(pos: Cell, move: str) -> Cell:
    dx, dy = MOVES[move]
    return (pos[0] + dx, pos[1] + dy)


def _toward(state: WorldState, pos: Cell, target: Cell) -> tuple[str, int]:
    """Legal move minimizing distance to ``target``; stays only when boxed in."""
    moves = legal_moves(state, pos)
    work = len(MOVE_ORDER)
    if pos == target:
        return "stay", work
    candidates = [m for m in moves if m != "stay"] or ["stay"]
    best = min(candidates, key=lambda m: euclidean_distance(_step(pos, m), target))
    return best, work + len(candidates)


def _away(state: WorldState, pos: Cell, threats: Sequence[Cell]) -> tuple[str, int]:
    """Legal move maximizing distance to the nearest threat."""
    moves = legal_moves(state, pos)
    best, best_d = "stay", -1.0
    for m in moves:
        _, d = nearest(_step(pos, m), threats)
        if d > best_d:
            best, best_d = m, d
    return best, len(MOVE_ORDER) + len(moves) * len(threats)


def _greedy(state: WorldState) -> tuple[str, int]:
    r_i, _ = nearest(state.player, state.rewards)
    move, work = _toward(state, state.player, state.rewards[r_i])
    return move, len(state.rewards) + work


def policy_step(
    policy: str, state: WorldState, rng: random.Random, close_threshold: float = 4.0
) -> tuple[str, PolicyStats]:
    """Choose the player's next move and report the modeled search effort."""
    if policy == "random":
        moves = legal_moves(state, state.player)
        move, work = rng.choice(moves), len(MOVE_ORDER)
    elif policy == "greedy":
        move, work = _greedy(state)
    elif policy == "evasive":
        _, d = nearest(state.player, state.opponents)
        work = len(state.opponents)
        if d < close_threshold:
            move, extra = _away(state, state.player, state.opponents)
        else:
            move, extra = _greedy(state)
        work += extra
    elif policy == "heuristic":
        work = 0
        threatened = False
        for o in state.opponents:
            work += 1 + len(state.scenario.obstacles)
            if euclidean_distance(state.player, o) <= 3 and protection(state.player, o, state.scenario.obstacles) == 0:
                threatened = True
        if threatened:
            move, extra = _away(state, state.player, state.opponents)
        else:
            move, extra = _greedy(state)
        work += extra
    else:
        raise ValueError(f"unknown policy {policy!r}")
    return move, PolicyStats(work, work * NODE_BYTES)


def _random_free(rng: random.Random, state: WorldState, taken: set[Cell]) -> Cell:
    sc = state.scenario
    while True:
        cell = (rng.randrange(sc.width), rng.randrange(sc.height))
        if state.free(cell) and cell not in taken:
            return cell


def initial_state(params: SimulationParams, rng: random.Random) -> WorldState:
    sc = params.scenario
    probe = WorldState(sc, (0, 0), (), (), params.energy_start)
    taken: set[Cell] = set()
    player = _random_free(rng, probe, taken)
    taken.add(player)
    opponents = []
    for _ in range(sc.opponent_count):
        cell = _random_free(rng, probe, taken)
        opponents.append(cell)
        taken.add(cell)
    rewards = []
    for _ in range(sc.reward_count):
        cell = _random_free(rng, probe, taken)
        rewards.append(cell)
        taken.add(cell)
    return WorldState(sc, player, tuple(opponents), tuple(rewards), float(params.energy_start))


def simulate(params: SimulationParams, start: WorldState | None = None) -> Trace:
    """Run one seeded session; identical params give identical traces."""
    rng = random.Random(params.seed)
    state = start if start is not None else initial_state(params, rng)
    policy_rng = random.Random(rng.getrandbits(64))
    respawn_rng = random.Random(rng.getrandbits(64))
    ticks: list[TickRecord] = []
    energy = float(state.energy)
    for k in range(params.ticks):
        move, stats = policy_step(params.policy, state, policy_rng, params.close_threshold)
        player = _step(state.player, move)
        state = WorldState(state.scenario, player, state.opponents, state.rewards, energy, state.obstacle_set)

        opponents = state.opponents
        if (k + 1) % params.opponent_move_every == 0:
            opponents = tuple(_step(o, _toward(state, o, player)[0]) for o in opponents)

        rewards = list(state.rewards)
        captured = player in rewards
        if (k + 1) % params.decay_every_ticks == 0:
            energy -= params.decay_amount
        if captured:
            energy += params.reward_energy
            i = rewards.index(player)
            rewards[i] = _random_free(respawn_rng, state, set(rewards) | {player})
        contacts = sum(1 for o in opponents if o == player)
        energy = max(0.0, energy - params.steal_amount * contacts)

        state = WorldState(state.scenario, player, opponents, tuple(rewards), energy, state.obstacle_set)
        ticks.append(
            TickRecord(
                tick=k,
                time_ms=(k + 1) * params.tick_ms,
                player_pos=player,
                player_energy=energy,
                opponent_pos=opponents,
                reward_pos=tuple(rewards),
                reward_captured=captured,
                iterations=stats.iterations,
                memory_bytes=stats.memory_bytes,
                move_key=MOVE_KEYS[move],
            )
        )
        if energy <= 0:
            break
    subject = params.subject_id if params.subject_id is not None else f"{params.policy}-{params.seed}"
    return Trace(params.scenario, tuple(ticks), subject)
