"""Truncated expansions of E[f(u_t)] for du = alpha(u) dt + beta(u) dW.

Three independent routes produce the same polynomial in t: summing over
exotic trees, summing over Feynman multi-indices, and iterating the
generator on jets. Powers of t count effective edges.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from math import factorial
from typing import Any, Callable

from .errors import MethodDisagreement, ModeError
from .growth import FertilityRule, enumerate_trees, realization_coefficient, symmetry_factor
from .jets import (
    FunctionSpec,
    Jet,
    Mode,
    Scalar,
    elementary_differential,
    format_scalar,
    iterated_generator,
    jet_from_spec,
    mode_of,
    to_scalar,
    weight,
    zero,
)
from .multiindex import (
    FeynmanMultiIndex,
    elementary_differential_multi,
    enumerate_multiindices,
    realization_multi,
    symmetry_factor_multi,
)


logger = logging.getLogger(__name__)


METHODS = ("trees", "multi", "operator")


@dataclass(frozen=True)
class SdeProblem:
    alpha: FunctionSpec
    beta: FunctionSpec
    f: FunctionSpec
    u0: Scalar
    mode: Mode

    def __post_init__(self) -> None:
        if mode_of(self.u0) != self.mode:
            raise ModeError(message=f"u0 is {mode_of(self.u0)} but the problem is {self.mode}")

    def jets(self, order: int) -> tuple[Jet, Jet, Jet]:
        return (
            jet_from_spec(self.alpha, self.u0, order),
            jet_from_spec(self.beta, self.u0, order),
            jet_from_spec(self.f, self.u0, order),
        )

    def as_float(self) -> "SdeProblem":
        if self.mode == "float":
            return self
        return replace(
            self,
            alpha=self.alpha.converted("float"),
            beta=self.beta.converted("float"),
            f=self.f.converted("float"),
            u0=float(self.u0),
            mode="float",
        )


@dataclass(frozen=True)
class TruncatedSeries:
    coeffs: tuple[Scalar, ...]
    mode: Mode

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def coefficient(self, k: int) -> Scalar:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return zero(self.mode)

    def to_json(self) -> dict[str, Any]:
        return {
            "coeffs": {str(k): format_scalar(c) for k, c in enumerate(self.coeffs)},
            "mode": self.mode,
            "order": self.order,
        }


def fertility_rule_for(p: SdeProblem) -> FertilityRule:
    """Fertility caps implied by polynomial degrees; unbounded for other specs.

    A vertex whose fertility exceeds the degree of its coefficient carries a
    vanishing derivative, so such trees contribute zero.
    """

    return FertilityRule(alpha_max=p.alpha.degree, beta_max=p.beta.degree, root_max=p.f.degree)


def _check_order(order: int) -> None:
    if order < 0:
        raise ValueError("order must be >= 0")


def expand_by_trees(p: SdeProblem, order: int) -> TruncatedSeries:
    _check_order(order)
    alpha, beta, f = p.jets(2 * order)
    levels = enumerate_trees(order, fertility_rule_for(p))
    coeffs: list[Scalar] = []
    for k, level in enumerate(levels):
        acc = zero(p.mode)
        for t in level:
            ups = elementary_differential(t, alpha, beta, f)
            if ups:
                acc += weight(realization_coefficient(t) / symmetry_factor(t), p.mode) * ups
        coeffs.append(acc)
        logger.debug("trees: t^%d from %d trees", k, len(level))
    return TruncatedSeries(coeffs=tuple(coeffs), mode=p.mode)


def _exceeds(g: FeynmanMultiIndex, rule: FertilityRule) -> bool:
    def over(value: int, cap: int | None) -> bool:
        return cap is not None and value > cap

    if over(g.root, rule.root_max):
        return True
    if any(over(n, rule.alpha_max) for n, _ in g.gamma_alpha):
        return True
    return any(over(k2, rule.beta_max) for (_, k2), _ in g.gamma_beta)


def expand_by_multiindices(p: SdeProblem, order: int) -> TruncatedSeries:
    _check_order(order)
    alpha, beta, f = p.jets(2 * order)
    rule = fertility_rule_for(p)
    coeffs: list[Scalar] = []
    for k in range(order + 1):
        acc = zero(p.mode)
        for g in enumerate_multiindices(k + 1):
            if _exceeds(g, rule):
                continue
            ups = elementary_differential_multi(g, alpha, beta, f)
            if not ups:
                continue
            poly = realization_multi(g, max_length=order + 1)
            if k in poly:
                acc += weight(poly[k] / symmetry_factor_multi(g), p.mode) * ups
        coeffs.append(acc)
    return TruncatedSeries(coeffs=tuple(coeffs), mode=p.mode)


def expand_by_operator(p: SdeProblem, order: int) -> TruncatedSeries:
    _check_order(order)
    alpha, beta, f = p.jets(2 * order)
    coeffs: list[Scalar] = []
    for k in range(order + 1):
        lk = iterated_generator(k, alpha, beta, f)
        coeffs.append(lk * weight(Fraction(1, factorial(k)), p.mode))
    return TruncatedSeries(coeffs=tuple(coeffs), mode=p.mode)


EXPANDERS: dict[str, Callable[[SdeProblem, int], TruncatedSeries]] = {
    "trees": expand_by_trees,
    "multi": expand_by_multiindices,
    "operator": expand_by_operator,
}


def expand(p: SdeProblem, order: int, method: str) -> TruncatedSeries:
    try:
        fn = EXPANDERS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}") from None
    return fn(p, order)


def evaluate_series(s: TruncatedSeries, t: Scalar | int | str) -> Scalar:
    """Horner evaluation at t."""

    tt = to_scalar(t, s.mode)
    if isinstance(tt, float) and not math.isfinite(tt):
        raise ValueError("t must be finite")
    acc = zero(s.mode)
    for c in reversed(s.coeffs):
        acc = acc * tt + c
    return acc


def _same(a: Scalar, b: Scalar) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return math.isclose(float(a), float(b), rel_tol=1e-9, abs_tol=1e-12)


def compare_series(a: TruncatedSeries, b: TruncatedSeries) -> int | None:
    """First power at which the coefficients differ, or None.

    Exact series compare exactly; floating ones with a 1e-9 relative tolerance.
    """

    if a.mode != b.mode:
        raise ModeError(message=f"cannot compare {a.mode} and {b.mode} series")
    for k in range(max(a.order, b.order) + 1):
        if not _same(a.coefficient(k), b.coefficient(k)):
            return k
    return None


def compare_methods(p: SdeProblem, order: int, methods: tuple[str, ...] = METHODS) -> dict[str, TruncatedSeries]:
    """Expand with every method; raise MethodDisagreement on the first mismatch."""

    results = {m: expand(p, order, m) for m in methods}
    base = methods[0]
    for other in methods[1:]:
        k = compare_series(results[base], results[other])
        if k is not None:
            raise MethodDisagreement(
                power=k,
                left=format_scalar(results[base].coefficient(k)),
                right=format_scalar(results[other].coefficient(k)),
                methods=(base, other),
            )
    return results
