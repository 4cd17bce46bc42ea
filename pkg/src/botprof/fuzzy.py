"""Trapezoidal linguistic variables, winner-take-all fuzzification and REFs."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass

REF = Callable[[float, float], float]


@dataclass(frozen=True, slots=True)
class Trapezoid:
    """Trapezoid with feet ``a``, ``d`` and plateau ``[b, c]``.

    Vertical edges (``a == b`` or ``c == d``) are steps whose top point belongs
    to the plateau, so a fully degenerate trapezoid is a crisp singleton.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self) -> None:
        if not self.a <= self.b <= self.c <= self.d:
            raise ValueError(
                f"trapezoid points must satisfy a <= b <= c <= d, got "
                f"({self.a}, {self.b}, {self.c}, {self.d})"
            )

    @property
    def points(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)


def membership(t: Trapezoid, x: float) -> float:
    """Degree of ``x`` in trapezoid ``t``."""
    if t.b <= x <= t.c:
        return 1.0
    if x <= t.a or x >= t.d:
        return 0.0
    if x < t.b:
        return (x - t.a) / (t.b - t.a)
    return (t.d - x) / (t.d - t.c)


@dataclass(frozen=True, slots=True)
class FuzzifiedValue:
    label: str
    degree: float
    raw: float


@dataclass(frozen=True)
class LinguisticVariable:
    """Named, ordered set of trapezoidal terms over ``[domain_min, domain_max]``.

    Construction checks that labels are distinct and that every point of the
    domain has a positive degree in at least one term.
    """

    name: str
    terms: tuple[tuple[str, Trapezoid], ...]
    domain_min: float
    domain_max: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple((str(k), t) for k, t in self.terms))
        if not self.terms:
            raise ValueError(f"variable {self.name!r} has no terms")
        if self.domain_min > self.domain_max:
            raise ValueError(f"variable {self.name!r}: domain_min > domain_max")
        labels = [label for label, _ in self.terms]
        if len(set(labels)) != len(labels):
            raise ValueError(f"variable {self.name!r} has duplicate term labels")
        gap = self._coverage_gap()
        if gap is not None:
            raise ValueError(
                f"variable {self.name!r} leaves {gap} with zero membership in every term"
            )

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.terms)

    def term(self, label: str) -> Trapezoid:
        for name, trap in self.terms:
            if name == label:
                return trap
        raise KeyError(f"variable {self.name!r} has no term {label!r}")

    def clamp(self, x: float) -> float:
        return min(max(x, self.domain_min), self.domain_max)

    def _coverage_gap(self) -> float | None:
        """First domain point with zero membership in every term, or ``None``.

        Memberships are linear between consecutive breakpoints and never
        negative, so a zero at an interior point of such a span implies zeros
        on the whole span. Breakpoints plus span midpoints are thus exhaustive.
        """
        knots = {self.domain_min, self.domain_max}
        for _, t in self.terms:
            knots.update(p for p in t.points if self.domain_min <= p <= self.domain_max)
        ordered = sorted(knots)
        probes = ordered + [(u + w) / 2 for u, w in zip(ordered, ordered[1:])]
        for x in sorted(probes):
            if all(membership(t, x) == 0.0 for _, t in self.terms):
                return x
        return None


def fuzzify(v: LinguisticVariable, x: float) -> FuzzifiedValue:
    """Winning term of ``v`` for ``x``; the earliest declared term wins ties.

    Values outside the domain are clamped first.
    """
    raw = v.clamp(float(x))
    best_label, best_degree = v.terms[0][0], -1.0
    for label, trap in v.terms:
        degree = membership(trap, raw)
        if degree > best_degree:
            best_label, best_degree = label, degree
    return FuzzifiedValue(best_label, best_degree, raw)


def ref_g(x: float, y: float) -> float:
    """Restricted equivalence function ``1 - |x - y|`` on the unit square."""
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        raise ValueError(f"ref_g arguments must lie in [0, 1], got ({x}, {y})")
    return 1.0 - abs(x - y)


def strong_negation(x: float) -> float:
    return 1.0 - x


def check_ref_axioms(
    f: REF,
    grid: Sequence[float],
    negation: Callable[[float], float] = strong_negation,
    tol: float = 1e-12,
) -> list[str]:
    """Check the five REF axioms for ``f`` on ``grid x grid``.

    Returns one description per violated instance; an empty list means ``f``
    behaves as a restricted equivalence function on the sample.
    """
    pts = sorted(set(float(p) for p in grid))
    n = len(pts)
    table = [[f(x, y) for y in pts] for x in pts]
    violations: list[str] = []
    for i, x in enumerate(pts):
        for j, y in enumerate(pts):
            g = table[i][j]
            if abs(g - table[j][i]) > tol:
                violations.append(f"symmetry: f({x}, {y}) != f({y}, {x})")
            if (abs(g - 1.0) <= tol) != (x == y):
                violations.append(f"identity: f({x}, {y}) = {g}")
            extreme = {x, y} == {0.0, 1.0}
            if (abs(g) <= tol) != extreme:
                violations.append(f"extremes: f({x}, {y}) = {g}")
            if abs(g - f(negation(x), negation(y))) > tol:
                violations.append(f"negation: f({x}, {y}) != f(c({x}), c({y}))")
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                xz = table[i][k]
                if table[i][j] < xz - tol or table[j][k] < xz - tol:
                    violations.append(
                        f"monotonicity: x={pts[i]}, y={pts[j]}, z={pts[k]}"
                    )
    return violations
