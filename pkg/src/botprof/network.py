"""Declarative computational-perception (CP) networks.

A CP owns an ordered label vector and a rule table keyed by the winning labels
of its antecedents. An antecedent is either a linguistic variable bound to a
metric (base case) or another CP evaluated earlier in the same tick
(inductive case). A rule that matches fires with the arithmetic mean of the
antecedent degrees. Firings are accumulated per label over a session into a
:class:`SigmaCP`.
"""

from __future__ import annotations

import graphlib
import json
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from importlib import resources
from typing import Protocol, TextIO

from .fuzzy import FuzzifiedValue, LinguisticVariable, Trapezoid, fuzzify
from .metrics import METRIC_SOURCES, MetricVector

CP_ORDER = ("Attitude", "Situation", "Movement", "Ability", "Skill", "Resources")


class NetworkConfigError(ValueError):
    """Raised for an inconsistent network definition."""


class Graded(Protocol):
    label: str
    degree: float


@dataclass(frozen=True, slots=True)
class VariableSource:
    variable: LinguisticVariable
    metric: str

    @property
    def labels(self) -> tuple[str, ...]:
        return self.variable.labels

    def describe(self) -> str:
        return f"{self.variable.name}({self.metric})"


@dataclass(frozen=True, slots=True)
class CPSource:
    cp: str

    def describe(self) -> str:
        return self.cp


Source = VariableSource | CPSource


@dataclass(frozen=True)
class CPDefinition:
    name: str
    labels: tuple[str, ...]
    antecedents: tuple[Source, ...]
    rules: tuple[tuple[tuple[str, ...], str], ...]
    _lookup: dict[tuple[str, ...], str] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "antecedents", tuple(self.antecedents))
        object.__setattr__(self, "rules", tuple((tuple(k), v) for k, v in self.rules))
        if not self.labels or len(set(self.labels)) != len(self.labels):
            raise NetworkConfigError(f"CP {self.name!r}: labels must be non-empty and distinct")
        if not self.antecedents:
            raise NetworkConfigError(f"CP {self.name!r} has no antecedents")
        lookup: dict[tuple[str, ...], str] = {}
        arity = len(self.antecedents)
        for i, (when, then) in enumerate(self.rules):
            where = f"CP {self.name!r} rule {i} ({', '.join(when)} -> {then})"
            if len(when) != arity:
                raise NetworkConfigError(f"{where}: arity {len(when)}, expected {arity}")
            if then not in self.labels:
                raise NetworkConfigError(f"{where}: unknown consequent label {then!r}")
            for label, src in zip(when, self.antecedents):
                if isinstance(src, VariableSource) and label not in src.labels:
                    raise NetworkConfigError(
                        f"{where}: unknown label {label!r} for {src.describe()}"
                    )
            if when in lookup:
                raise NetworkConfigError(f"{where}: duplicate antecedent tuple")
            lookup[when] = then
        object.__setattr__(self, "_lookup", lookup)

    def consequent(self, when: tuple[str, ...]) -> str | None:
        return self._lookup.get(when)


@dataclass(frozen=True, slots=True)
class CPFiring:
    cp_name: str
    label: str
    degree: float
    tick: int = 0


def evaluate_cp(
    defn: CPDefinition, antecedent_values: Sequence[Graded], tick: int = 0
) -> CPFiring | None:
    """Fire the rule keyed by the antecedent labels, or return ``None``."""
    if len(antecedent_values) != len(defn.antecedents):
        raise ValueError(
            f"CP {defn.name!r} takes {len(defn.antecedents)} antecedents, "
            f"got {len(antecedent_values)}"
        )
    label = defn.consequent(tuple(v.label for v in antecedent_values))
    if label is None:
        return None
    degree = sum(v.degree for v in antecedent_values) / len(antecedent_values)
    return CPFiring(defn.name, label, degree, tick)


@dataclass
class SigmaCP:
    """Per-label degree sums and firing counts of one CP over a session.

    ``uncovered`` counts ticks whose antecedent labels matched no rule;
    ``blocked`` counts ticks where a child CP had not fired.
    """

    cp_name: str
    labels: tuple[str, ...]
    sums: dict[str, float] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)
    evaluations: int = 0
    uncovered: int = 0
    blocked: int = 0

    def __post_init__(self) -> None:
        self.labels = tuple(self.labels)
        unknown = (set(self.sums) | set(self.counts)) - set(self.labels)
        if unknown:
            raise ValueError(f"SigmaCP {self.cp_name!r}: unknown labels {sorted(unknown)}")
        self.sums = {k: float(self.sums.get(k, 0.0)) for k in self.labels}
        self.counts = {k: int(self.counts.get(k, 0)) for k in self.labels}
        if any(v < 0 for v in self.sums.values()) or any(v < 0 for v in self.counts.values()):
            raise ValueError(f"SigmaCP {self.cp_name!r}: sums and counts must be non-negative")

    def add(self, firing: CPFiring) -> None:
        if firing.label not in self.sums:
            raise ValueError(f"SigmaCP {self.cp_name!r}: unknown label {firing.label!r}")
        self.sums[firing.label] += firing.degree
        self.counts[firing.label] += 1

    @property
    def total(self) -> float:
        return sum(self.sums.values())

    @property
    def fired(self) -> int:
        return sum(self.counts.values())


@dataclass(frozen=True, slots=True)
class PercentageVector:
    """Ordered ``(label, share)`` pairs.

    Vectors produced by :func:`percentages` sum to one; hand-entered vectors
    (for instance rounded published figures) only need shares in ``[0, 1]``.
    """

    labels: tuple[str, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.values):
            raise ValueError("labels and values differ in length")
        for label, p in zip(self.labels, self.values):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"share of {label!r} is {p}, outside [0, 1]")

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[str, float]] | Mapping[str, float]) -> PercentageVector:
        items = list(pairs.items()) if isinstance(pairs, Mapping) else list(pairs)
        return cls(tuple(k for k, _ in items), tuple(float(v) for _, v in items))

    def __getitem__(self, label: str) -> float:
        return self.values[self.labels.index(label)]

    def items(self) -> list[tuple[str, float]]:
        return list(zip(self.labels, self.values))


def percentages(s: SigmaCP) -> PercentageVector:
    total = s.total
    if total <= 0:
        raise ValueError(f"no firings for CP {s.cp_name!r}")
    return PercentageVector(s.labels, tuple(s.sums[k] / total for k in s.labels))


def label_average(s: SigmaCP, label: str) -> float:
    """Mean firing degree of ``label`` over the session."""
    n = s.counts[label]
    if n == 0:
        raise ValueError(f"label {label!r} of CP {s.cp_name!r} never fired")
    return s.sums[label] / n


def quantifier(p: float) -> str:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"quantifier needs a share in [0, 1], got {p}")
    if p < 1 / 3:
        return "few"
    if p < 2 / 3:
        return "several"
    return "many"


class CPNetwork:
    """Validated set of CP definitions with a fixed evaluation order."""

    def __init__(self, cps: Sequence[CPDefinition], variables: Mapping[str, LinguisticVariable] | None = None):
        self.cps: dict[str, CPDefinition] = {}
        for cp in cps:
            if cp.name in self.cps:
                raise NetworkConfigError(f"duplicate CP {cp.name!r}")
            self.cps[cp.name] = cp
        self.variables = dict(variables or {})
        sorter: graphlib.TopologicalSorter[str] = graphlib.TopologicalSorter()
        for cp in cps:
            deps = []
            for pos, src in enumerate(cp.antecedents):
                if isinstance(src, CPSource):
                    child = self.cps.get(src.cp)
                    if child is None:
                        raise NetworkConfigError(f"CP {cp.name!r} depends on unknown CP {src.cp!r}")
                    deps.append(src.cp)
                    for i, (when, then) in enumerate(cp.rules):
                        if when[pos] not in child.labels:
                            raise NetworkConfigError(
                                f"CP {cp.name!r} rule {i} ({', '.join(when)} -> {then}): "
                                f"unknown label {when[pos]!r} for CP {src.cp!r}"
                            )
            sorter.add(cp.name, *deps)
        try:
            self.order: tuple[str, ...] = tuple(sorter.static_order())
        except graphlib.CycleError as exc:
            cycle = " -> ".join(exc.args[1])
            raise NetworkConfigError(f"dependency cycle: {cycle}") from None

    def __getitem__(self, name: str) -> CPDefinition:
        return self.cps[name]

    def __contains__(self, name: object) -> bool:
        return name in self.cps

    def evaluate_tick(self, m: MetricVector, tick: int = 0) -> dict[str, CPFiring | None]:
        """Firings of every CP for one tick; ``None`` where nothing fired."""
        fired: dict[str, CPFiring | None] = {}
        for name in self.order:
            fired[name] = self._evaluate(self.cps[name], m, fired, tick)[0]
        return fired

    def _evaluate(
        self, cp: CPDefinition, m: MetricVector, fired: Mapping[str, CPFiring | None], tick: int
    ) -> tuple[CPFiring | None, bool]:
        values: list[Graded] = []
        for src in cp.antecedents:
            if isinstance(src, VariableSource):
                values.append(fuzzify(src.variable, METRIC_SOURCES[src.metric](m)))
            else:
                child = fired.get(src.cp)
                if child is None:
                    return None, True
                values.append(child)
        return evaluate_cp(cp, values, tick), False


def run_session(network: CPNetwork, metrics: Sequence[MetricVector]) -> dict[str, SigmaCP]:
    if not metrics:
        raise ValueError("run_session needs at least one metric vector")
    sigmas = {name: SigmaCP(name, cp.labels) for name, cp in network.cps.items()}
    for tick, m in enumerate(metrics):
        fired: dict[str, CPFiring | None] = {}
        for name in network.order:
            firing, blocked = network._evaluate(network.cps[name], m, fired, tick)
            fired[name] = firing
            s = sigmas[name]
            s.evaluations += 1
            if firing is not None:
                s.add(firing)
            elif blocked:
                s.blocked += 1
            else:
                s.uncovered += 1
    return sigmas


# -- configuration ---------------------------------------------------------


def _variable_from_config(raw: Mapping) -> LinguisticVariable:
    name = raw.get("name")
    try:
        lo, hi = raw["domain"]
        terms = tuple((t["label"], Trapezoid(*map(float, t["points"]))) for t in raw["terms"])
    except (KeyError, TypeError, ValueError) as exc:
        raise NetworkConfigError(f"variable {name!r}: {exc}") from None
    try:
        return LinguisticVariable(str(name), terms, float(lo), float(hi))
    except ValueError as exc:
        raise NetworkConfigError(str(exc)) from None


def network_from_dict(config: Mapping) -> CPNetwork:
    variables: dict[str, LinguisticVariable] = {}
    for raw in config.get("variables", []):
        var = _variable_from_config(raw)
        if var.name in variables:
            raise NetworkConfigError(f"duplicate variable {var.name!r}")
        variables[var.name] = var
    cps = []
    for raw in config.get("cps", []):
        name = raw.get("name")
        sources: list[Source] = []
        for ant in raw.get("antecedents", []):
            if "cp" in ant:
                sources.append(CPSource(ant["cp"]))
                continue
            var = variables.get(ant.get("variable"))
            if var is None:
                raise NetworkConfigError(f"CP {name!r}: unknown variable {ant.get('variable')!r}")
            if ant.get("metric") not in METRIC_SOURCES:
                raise NetworkConfigError(
                    f"CP {name!r}: unknown metric {ant.get('metric')!r}; "
                    f"choose from {', '.join(METRIC_SOURCES)}"
                )
            sources.append(VariableSource(var, ant["metric"]))
        try:
            rules = tuple((tuple(r["when"]), r["then"]) for r in raw.get("rules", []))
        except (KeyError, TypeError) as exc:
            raise NetworkConfigError(f"CP {name!r}: malformed rule ({exc})") from None
        cps.append(CPDefinition(str(name), tuple(raw.get("labels", ())), tuple(sources), rules))
    return CPNetwork(cps, variables)


def load_network(config: str | TextIO) -> CPNetwork:
    """Build a network from JSON text or a readable stream."""
    text = config if isinstance(config, str) else config.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkConfigError(f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise NetworkConfigError("network config must be a JSON object")
    return network_from_dict(data)


def default_network_text() -> str:
    return resources.files("botprof").joinpath("data/default-network.json").read_text("utf-8")


def default_network() -> CPNetwork:
    return load_network(default_network_text())
