"""Identity suite: cross-checks of the combinatorial identities by independent routes.

Each identity is run over every tree up to a maximal exotic order (and every
populated multi-index up to the configured length). Failures are data: the
report names the identity and the first counterexample.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Any, Callable, Iterable

import numpy as np

from .growth import (
    classical_tree_factorial,
    effective_cut_multiset,
    enumerate_trees,
    growth_weights,
    linear_extension_count,
    removal_multiset,
    symmetry_factor,
    tree_factorial,
)
from .jets import FunctionSpec, elementary_differential, iterated_generator
from .models import VerifySettings
from .multiindex import (
    contraction_oracle,
    counting_map,
    elementary_differential_multi,
    enumerate_multiindices,
    multi_gradings,
    symmetry_factor_multi,
    trees_for,
)
from .reduction import reduce_tree
from .series import SdeProblem, compare_series, expand_by_multiindices, expand_by_operator, expand_by_trees
from .trees import ExoticTree


logger = logging.getLogger(__name__)


Symmetry = Callable[[ExoticTree], int]


@dataclass(frozen=True)
class IdentityReport:
    identity: str
    max_order: int
    checked_count: int
    status: str
    counterexample: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == "pass"

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "checked_count": self.checked_count,
            "identity": self.identity,
            "max_order": self.max_order,
            "status": self.status,
        }
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        return out


@dataclass(frozen=True)
class SuiteResult:
    reports: tuple[IdentityReport, ...]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.reports)

    def json_lines(self) -> str:
        return "".join(json.dumps(r.to_json(), sort_keys=True, ensure_ascii=False) + "\n" for r in self.reports)

    def text(self) -> str:
        width = max((len(r.identity) for r in self.reports), default=0)
        lines = []
        for r in self.reports:
            line = f"{r.status.upper():4}  {r.identity:<{width}}  checked={r.checked_count}"
            if r.counterexample is not None:
                line += f"  counterexample: {r.counterexample}"
            lines.append(line)
        return "\n".join(lines) + "\n" if lines else ""


def random_problem(rng: np.random.Generator, degree: int = 3) -> SdeProblem:
    """Exact problem with random small rational polynomial coefficients."""

    def rational() -> Fraction:
        return Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 4)))

    def poly() -> FunctionSpec:
        return FunctionSpec.poly(rational() for _ in range(degree + 1))

    return SdeProblem(alpha=poly(), beta=poly(), f=poly(), u0=rational(), mode="exact")


def random_problems(count: int, seed: int, degree: int = 3) -> list[SdeProblem]:
    rng = np.random.default_rng(seed)
    return [random_problem(rng, degree) for _ in range(count)]


class _Check:
    """Counts checked items and remembers the first failure."""

    def __init__(self) -> None:
        self.count = 0
        self.counterexample: str | None = None

    def record(self, ok: bool, what: object) -> None:
        self.count += 1
        if not ok and self.counterexample is None:
            self.counterexample = str(what)


def _fact(t: ExoticTree) -> Fraction:
    return Fraction(factorial(t.exotic_order)) / tree_factorial(t)


def identity_suite(
    max_order: int,
    *,
    settings: VerifySettings | None = None,
    symmetry: Symmetry = symmetry_factor,
) -> SuiteResult:
    """Run every identity over trees with exotic order <= max_order.

    `symmetry` replaces the automorphism count; tests use it to inject a
    wrong symmetry factor and check that the suite notices.
    """

    if max_order < 0:
        raise ValueError("max_order must be >= 0")
    s = settings or VerifySettings()
    trees: list[ExoticTree] = []
    if max_order >= 1:
        for level in enumerate_trees(max_order - 1):
            trees.extend(level)
    grown = growth_weights(max_order - 1) if max_order >= 1 else {}
    problems = random_problems(s.random_problems, s.seed)
    logger.info("identity suite: %d trees up to exotic order %d", len(trees), max_order)

    def cm(t: ExoticTree) -> Fraction:
        return Fraction(factorial(t.exotic_order)) / (symmetry(t) * tree_factorial(t))

    checks: dict[str, _Check] = {}

    def check(name: str) -> _Check:
        return checks.setdefault(name, _Check())

    larger = [t for t in trees if t.exotic_order >= 2]

    for t in larger:
        rm = removal_multiset(t)
        rhs = sum((Fraction(e.site_count) / tree_factorial(e.tree) for e in rm), Fraction(0))
        check("kreimer_recursion").record(Fraction(t.exotic_order) / tree_factorial(t) == rhs, t)

        rhs = sum((e.site_count * symmetry(e.tree) * grown[e.tree.key] for e in rm), Fraction(0))
        check("cm_recursion").record(symmetry(t) * grown[t.key] == rhs, t)

        cuts = effective_cut_multiset(t)
        rhs = sum((e.site_count * _fact(e.tree) for e in cuts), Fraction(0))
        check("effective_cut").record(_fact(t) == rhs, t)

    for t in trees:
        check("cm_growth").record(cm(t) == grown.get(t.key, Fraction(0)), t)
        check("linear_extensions").record(_fact(t) == linear_extension_count(t), t)
        red = reduce_tree(t)
        rhs = sum(
            (Fraction(m * factorial(r.exotic_order), classical_tree_factorial(r)) for r, m in red.items()),
            Fraction(0),
        )
        check("reduction").record(_fact(t) == rhs, t)

    _check_multi(max_order, s, symmetry, check)
    _check_counting_map(trees, check)
    _check_elementary(trees, problems, max_order, check)
    _check_generator(trees, problems, max_order, cm, check)
    _check_triple(problems, max_order, check)

    names = (
        "kreimer_recursion",
        "cm_recursion",
        "cm_growth",
        "effective_cut",
        "linear_extensions",
        "reduction",
        "orbit_stabilizer",
        "counting_map_image",
        "elementary_differential_multi",
        "generator_tree",
        "triple_equality",
    )
    reports = []
    for name in names:
        c = checks.get(name, _Check())
        status = "pass" if c.counterexample is None else "fail"
        if status == "fail":
            logger.info("identity %s failed at %s", name, c.counterexample)
        reports.append(
            IdentityReport(
                identity=name,
                max_order=max_order,
                checked_count=c.count,
                status=status,
                counterexample=c.counterexample,
            )
        )
    return SuiteResult(reports=tuple(reports))


def _check_multi(max_order: int, s: VerifySettings, symmetry: Symmetry, check: Callable[[str], _Check]) -> None:
    for length in range(1, min(max_order, s.multi_max_length) + 1):
        for g in enumerate_multiindices(length):
            if multi_gradings(g).psi_legs > s.oracle_max_legs:
                continue
            sf = symmetry_factor_multi(g)
            expected = {t.key: Fraction(sf, symmetry(t)) for t in trees_for(g, max_length=length)}
            got = contraction_oracle(g, max_legs=s.oracle_max_legs)
            check("orbit_stabilizer").record(got == expected, g)


def _check_counting_map(trees: Iterable[ExoticTree], check: Callable[[str], _Check]) -> None:
    for t in trees:
        g = counting_map(t)
        gr = multi_gradings(g)
        ok = (
            gr.populated
            and gr.length == t.exotic_order
            and g in enumerate_multiindices(gr.length)
            and t in trees_for(g, max_length=gr.length)
        )
        check("counting_map_image").record(ok, t)


def _check_elementary(
    trees: list[ExoticTree],
    problems: list[SdeProblem],
    max_order: int,
    check: Callable[[str], _Check],
) -> None:
    for p in problems:
        alpha, beta, f = p.jets(2 * max(max_order, 0))
        for t in trees:
            g = counting_map(t)
            ok = elementary_differential_multi(g, alpha, beta, f) == elementary_differential(t, alpha, beta, f)
            check("elementary_differential_multi").record(ok, t)


def _check_generator(
    trees: list[ExoticTree],
    problems: list[SdeProblem],
    max_order: int,
    cm: Callable[[ExoticTree], Fraction],
    check: Callable[[str], _Check],
) -> None:
    for i, p in enumerate(problems):
        alpha, beta, f = p.jets(2 * max(max_order - 1, 0))
        for k in range(max_order):
            rhs = sum(
                (cm(t) * elementary_differential(t, alpha, beta, f) for t in trees if t.exotic_order == k + 1),
                Fraction(0),
            )
            check("generator_tree").record(iterated_generator(k, alpha, beta, f) == rhs, f"problem {i}, L^{k}")


def _check_triple(problems: list[SdeProblem], max_order: int, check: Callable[[str], _Check]) -> None:
    order = min(max_order - 1, 5)
    if order < 0:
        return
    for i, p in enumerate(problems):
        by_trees = expand_by_trees(p, order)
        for name, other in (("multi", expand_by_multiindices(p, order)), ("operator", expand_by_operator(p, order))):
            k = compare_series(by_trees, other)
            where = f"problem {i}, trees vs {name}" + (f" at t^{k}" if k is not None else "")
            check("triple_equality").record(k is None, where)
