"""Behavior-profile reports built from session ΣCPs.

Each CP yields one sentence chosen by a four-case rule over its percentage
vector:

1. one label holds more than two thirds of the mass;
2. exactly one label holds more than a third;
3. two or more labels hold more than a third (the top two are named);
4. no label holds more than a third.
"""

from __future__ import annotations

import json
import string
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, TextIO

import jsonschema

from .network import CP_ORDER, PercentageVector, SigmaCP, percentages, quantifier

PLACEHOLDERS = {
    1: frozenset({"degree", "value"}),
    2: frozenset({"degree", "value"}),
    3: frozenset({"degree_1", "value_1", "degree_2", "value_2"}),
    4: frozenset(),
}


class ReportError(ValueError):
    pass


def _identifiers(template: str) -> set[str]:
    found = set()
    for m in string.Template.pattern.finditer(template):
        name = m.group("named") or m.group("braced")
        if name:
            found.add(name)
        elif m.group("invalid") is not None:
            raise ReportError(f"malformed placeholder in template {template!r}")
    return found


@dataclass(frozen=True)
class SentenceTemplateSet:
    cp_name: str
    templates: Mapping[int, str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "templates", {int(k): v for k, v in self.templates.items()})
        if set(self.templates) != {1, 2, 3, 4}:
            raise ReportError(f"templates for {self.cp_name!r} must cover cases 1-4")
        for case, text in self.templates.items():
            extra = _identifiers(text) - PLACEHOLDERS[case]
            if extra:
                raise ReportError(
                    f"template {self.cp_name!r} case {case} uses undefined placeholders {sorted(extra)}"
                )


def load_templates(source: str | TextIO) -> dict[str, SentenceTemplateSet]:
    text = source if isinstance(source, str) else source.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ReportError(f"invalid template JSON: {exc}") from None
    return {name: SentenceTemplateSet(name, cases) for name, cases in data.items()}


def default_templates() -> dict[str, SentenceTemplateSet]:
    return load_templates(resources.files("botprof").joinpath("data/templates.json").read_text("utf-8"))


@dataclass(frozen=True, slots=True)
class CaseSelection:
    case: int
    bound: tuple[tuple[str, float], ...]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.bound)

    @property
    def quantifiers(self) -> tuple[str, ...]:
        return tuple(quantifier(p) for _, p in self.bound)


def select_case(p: PercentageVector) -> CaseSelection:
    pairs = p.items()
    if not pairs:
        return CaseSelection(4, ())
    # Stable sort keeps declaration order among equal shares.
    ranked = sorted(pairs, key=lambda kv: -kv[1])
    top_label, top_p = ranked[0]
    if top_p > 2 / 3:
        return CaseSelection(1, ((top_label, top_p),))
    above = [kv for kv in ranked if kv[1] > 1 / 3]
    if len(above) >= 2:
        return CaseSelection(3, tuple(above[:2]))
    if len(above) == 1:
        return CaseSelection(2, (above[0],))
    return CaseSelection(4, ())


def label_word(label: str) -> str:
    return label.replace("_", " ").lower()


def bindings(selection: CaseSelection) -> dict[str, str]:
    """Template words for a case selection."""
    words = [(quantifier(p), label_word(label)) for label, p in selection.bound]
    if selection.case in (1, 2):
        return {"degree": words[0][0], "value": words[0][1]}
    if selection.case == 3:
        return {
            "degree_1": words[0][0],
            "value_1": words[0][1],
            "degree_2": words[1][0],
            "value_2": words[1][1],
        }
    return {}


def realize_sentence(templates: SentenceTemplateSet, case: int, binding: Mapping[str, str]) -> str:
    try:
        text = string.Template(templates.templates[case]).substitute(binding)
    except KeyError as exc:
        raise ReportError(
            f"template {templates.cp_name!r} case {case} needs a binding for {exc.args[0]!r}"
        ) from None
    return text[:1].upper() + text[1:]


@dataclass(frozen=True)
class CPReport:
    percentages: PercentageVector
    case: int
    labels: tuple[str, ...]
    quantifiers: tuple[str, ...]
    sentence: str
    sums: Mapping[str, float] | None = None
    no_data: bool = False


@dataclass(frozen=True)
class BehaviorProfile:
    subject_id: str
    cps: Mapping[str, CPReport]
    stats: Mapping[str, Any] = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    @property
    def sentences(self) -> list[str]:
        return [self.cps[name].sentence for name in CP_ORDER]

    def to_dict(self) -> dict[str, Any]:
        cps: dict[str, Any] = {}
        for name in CP_ORDER:
            r = self.cps[name]
            entry: dict[str, Any] = {}
            if r.sums is not None:
                entry["sums"] = dict(r.sums)
            entry |= {
                "percentages": dict(r.percentages.items()),
                "case": r.case,
                "labels": list(r.labels),
                "quantifier": list(r.quantifiers),
                "sentence": r.sentence,
                "no_data": r.no_data,
            }
            cps[name] = entry
        out: dict[str, Any] = {"subject_id": self.subject_id, "cps": cps, "stats": dict(self.stats)}
        if self.notes:
            out["notes"] = list(self.notes)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self) -> str:
        lines = [f"Behavior profile: {self.subject_id}", ""]
        lines += self.sentences
        ticks = self.stats.get("ticks")
        if ticks is not None:
            lines += ["", f"Ticks analysed: {ticks}"]
        return "\n".join(lines) + "\n"

    def to_markdown(self) -> str:
        lines = [f"# Behavior profile: {self.subject_id}", ""]
        for name in CP_ORDER:
            r = self.cps[name]
            lines.append(f"## {name}")
            lines.append("")
            lines.append(r.sentence + (" *(no data)*" if r.no_data else ""))
            lines.append("")
            lines.append("| label | share |")
            lines.append("|---|---|")
            for label, p in r.percentages.items():
                lines.append(f"| {label_word(label)} | {p:.3f} |")
            lines.append("")
        if "ticks" in self.stats:
            lines.append(f"Ticks analysed: {self.stats['ticks']}")
            lines.append("")
        return "\n".join(lines)

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "markdown":
            return self.to_markdown()
        if fmt == "text":
            return self.to_text()
        raise ValueError(f"unknown report format {fmt!r}")


def generate_profile(
    sigmas: Mapping[str, SigmaCP],
    subject_id: str,
    templates: Mapping[str, SentenceTemplateSet] | None = None,
    notes: Sequence[str] = (),
) -> BehaviorProfile:
    """Six-sentence behavior profile from session ΣCPs.

    A CP whose ΣCP has zero total gets its case-4 sentence and ``no_data``.
    """
    templates = templates if templates is not None else default_templates()
    missing = [name for name in CP_ORDER if name not in sigmas]
    if missing:
        raise ReportError(f"missing ΣCPs for {', '.join(missing)}")
    missing = [name for name in CP_ORDER if name not in templates]
    if missing:
        raise ReportError(f"missing templates for {', '.join(missing)}")
    cps: dict[str, CPReport] = {}
    for name in CP_ORDER:
        s = sigmas[name]
        if s.total > 0:
            vec = percentages(s)
            sel = select_case(vec)
            no_data = False
        else:
            vec = PercentageVector(s.labels, tuple(0.0 for _ in s.labels))
            sel = CaseSelection(4, ())
            no_data = True
        sentence = realize_sentence(templates[name], sel.case, bindings(sel))
        cps[name] = CPReport(vec, sel.case, sel.labels, sel.quantifiers, sentence, dict(s.sums), no_data)
    evaluated = [s.evaluations for s in sigmas.values() if s.evaluations]
    stats: dict[str, Any] = {}
    if evaluated:
        stats["ticks"] = max(evaluated)
        stats["fired"] = {name: sigmas[name].fired for name in CP_ORDER}
        stats["uncovered"] = {name: sigmas[name].uncovered for name in CP_ORDER}
        stats["blocked"] = {name: sigmas[name].blocked for name in CP_ORDER}
    return BehaviorProfile(subject_id, cps, stats, tuple(notes))


# -- JSON ------------------------------------------------------------------


def _schema() -> dict[str, Any]:
    return json.loads(resources.files("botprof").joinpath("data/profile.schema.json").read_text("utf-8"))


def profile_from_dict(data: Mapping[str, Any]) -> BehaviorProfile:
    try:
        jsonschema.validate(data, _schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ReportError(f"profile schema violation at {where}: {exc.message}") from None
    cps: dict[str, CPReport] = {}
    for name in CP_ORDER:
        raw = data["cps"][name]
        vec = PercentageVector.from_pairs(raw["percentages"])
        if not set(raw["labels"]) <= set(vec.labels):
            raise ReportError(f"profile CP {name!r}: bound labels not in percentages")
        sums = raw.get("sums")
        cps[name] = CPReport(
            percentages=vec,
            case=raw["case"],
            labels=tuple(raw["labels"]),
            quantifiers=tuple(raw["quantifier"]),
            sentence=raw["sentence"],
            sums={k: float(v) for k, v in sums.items()} if sums is not None else None,
            no_data=raw.get("no_data", False),
        )
    return BehaviorProfile(
        subject_id=data["subject_id"],
        cps=cps,
        stats=data.get("stats", {}),
        notes=tuple(data.get("notes", ())),
    )


def load_profile(source: str | TextIO) -> BehaviorProfile:
    text = source if isinstance(source, str) else source.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ReportError(f"invalid profile JSON: {exc}") from None
    return profile_from_dict(data)


def sigmas_from_dict(data: Mapping[str, Any]) -> dict[str, SigmaCP]:
    """ΣCPs from a fixture: ``{"cps": {name: {"sums": {...}, "counts": {...}}}}``.

    Label order follows the ``sums`` mapping; ``counts`` may be omitted when
    only published totals are known.
    """
    out = {}
    try:
        for name, raw in data["cps"].items():
            sums = raw["sums"]
            out[name] = SigmaCP(name, tuple(sums), dict(sums), dict(raw.get("counts", {})))
    except (KeyError, TypeError, AttributeError) as exc:
        raise ReportError(f"malformed ΣCP fixture: {exc}") from None
    except ValueError as exc:
        raise ReportError(f"malformed ΣCP fixture: {exc}") from None
    return out


def load_sigma_fixture(source: str | TextIO) -> tuple[str, dict[str, SigmaCP], tuple[str, ...]]:
    text = source if isinstance(source, str) else source.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ReportError(f"invalid ΣCP fixture JSON: {exc}") from None
    return data.get("subject_id", ""), sigmas_from_dict(data), tuple(data.get("notes", ()))
