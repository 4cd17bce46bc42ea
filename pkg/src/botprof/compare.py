"""Profile similarity and the final grade against a reference profile."""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from importlib import resources
from typing import Any, TextIO

from .fuzzy import REF, ref_g
from .network import CP_ORDER, PercentageVector
from .report import BehaviorProfile, load_profile


class ProfileMismatchError(ValueError):
    pass


def per_label_ref(p: PercentageVector, q: PercentageVector, ref: REF = ref_g) -> dict[str, float]:
    if p.labels != q.labels:
        raise ProfileMismatchError(f"label sets differ: {list(p.labels)} vs {list(q.labels)}")
    return {label: ref(a, b) for label, a, b in zip(p.labels, p.values, q.values)}


def s_ref(p: PercentageVector, q: PercentageVector, ref: REF = ref_g) -> float:
    """Mean REF agreement between two percentage vectors over the same labels."""
    values = per_label_ref(p, q, ref)
    if not values:
        raise ProfileMismatchError("cannot compare empty percentage vectors")
    return sum(values.values()) / len(values)


@dataclass(frozen=True)
class SimilarityBreakdown:
    similarity: Mapping[str, float]
    per_label: Mapping[str, Mapping[str, float]]

    @property
    def total(self) -> float:
        return sum(self.similarity[name] for name in CP_ORDER)

    def to_dict(self) -> dict[str, Any]:
        return {
            name: {"similarity": self.similarity[name], "per_label_ref": dict(self.per_label[name])}
            for name in CP_ORDER
        }


@dataclass(frozen=True, slots=True)
class GradeConfig:
    g_min: float = 1.0
    scale: tuple[float, float] = (1.0, 7.0)

    def __post_init__(self) -> None:
        lo, hi = self.scale
        if not lo <= self.g_min or self.g_min + len(CP_ORDER) > hi:
            raise ValueError(
                f"g_min={self.g_min} plus {len(CP_ORDER)} similarity points must fit in [{lo}, {hi}]"
            )


def round_half_up(x: float, places: int = 1) -> float:
    quantum = Decimal(1).scaleb(-places)
    return float(Decimal(repr(x)).quantize(quantum, rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class Grade:
    fg: float
    rounded: float
    breakdown: SimilarityBreakdown

    def to_dict(self) -> dict[str, Any]:
        return {"fg": self.fg, "rounded": self.rounded, "per_cp": self.breakdown.to_dict()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self) -> str:
        lines = [f"Final grade: {self.rounded:.1f} (raw {self.fg:.4f})", ""]
        for name in CP_ORDER:
            lines.append(f"  {name:<10} {self.breakdown.similarity[name]:.4f}")
        return "\n".join(lines) + "\n"


def compare_profiles(human: BehaviorProfile, bot: BehaviorProfile, ref: REF = ref_g) -> SimilarityBreakdown:
    similarity: dict[str, float] = {}
    per_label: dict[str, dict[str, float]] = {}
    for name in CP_ORDER:
        if name not in human.cps or name not in bot.cps:
            raise ProfileMismatchError(f"CP {name!r} missing from a profile")
        p, q = human.cps[name].percentages, bot.cps[name].percentages
        try:
            per_label[name] = per_label_ref(p, q, ref)
        except ProfileMismatchError as exc:
            raise ProfileMismatchError(f"CP {name!r}: {exc}") from None
        similarity[name] = sum(per_label[name].values()) / len(per_label[name])
    return SimilarityBreakdown(similarity, per_label)


def grade_from_breakdown(breakdown: SimilarityBreakdown, cfg: GradeConfig | None = None) -> Grade:
    """Minimum grade plus one similarity point per CP."""
    cfg = cfg or GradeConfig()
    fg = cfg.g_min + breakdown.total
    return Grade(fg, round_half_up(fg), breakdown)


def final_grade(human: BehaviorProfile, bot: BehaviorProfile, cfg: GradeConfig | None = None) -> Grade:
    return grade_from_breakdown(compare_profiles(human, bot), cfg)


def load_reference_profile(source: str | TextIO) -> BehaviorProfile:
    return load_profile(source)


def default_reference_profile() -> BehaviorProfile:
    text = resources.files("botprof").joinpath("data/human-expert.json").read_text("utf-8")
    return load_reference_profile(text)
