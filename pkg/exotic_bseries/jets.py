"""Derivative jets at the expansion point.

A jet stores derivative values g(u0), g'(u0), ..., never Taylor
coefficients. Scalars are either exact (Fraction) or floating (float); a
jet carries its mode and operations refuse to mix modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import comb, perm
from typing import Iterable, Literal, Union

import numpy as np

from .errors import JetError, ModeError
from .trees import Colour, ExoticTree


Mode = Literal["exact", "float"]
Scalar = Union[Fraction, float]


def mode_of(x: Scalar) -> Mode:
    if isinstance(x, Fraction):
        return "exact"
    if isinstance(x, float):
        return "float"
    raise ModeError(message=f"not a scalar: {x!r}")


def to_scalar(x: object, mode: Mode) -> Scalar:
    """Coerce int/str/Fraction (and floats in float mode) into `mode`."""

    if mode == "exact":
        if isinstance(x, bool):
            raise ModeError(message=f"not a number: {x!r}")
        if isinstance(x, float):
            raise ModeError(message=f"floating value {x!r} in exact mode")
        if isinstance(x, (int, Fraction)):
            return Fraction(x)
        if isinstance(x, str):
            try:
                return Fraction(x.strip())
            except (ValueError, ZeroDivisionError) as e:
                raise ModeError(message=f"not a rational number: {x!r}") from e
        raise ModeError(message=f"not a number: {x!r}")
    if mode == "float":
        if isinstance(x, bool):
            raise ModeError(message=f"not a number: {x!r}")
        if isinstance(x, (int, float, Fraction)):
            return float(x)
        if isinstance(x, str):
            try:
                return float(Fraction(x.strip()))
            except (ValueError, ZeroDivisionError):
                try:
                    return float(x)
                except ValueError as e:
                    raise ModeError(message=f"not a number: {x!r}") from e
        raise ModeError(message=f"not a number: {x!r}")
    raise ModeError(message=f"unknown mode {mode!r}")


def zero(mode: Mode) -> Scalar:
    return Fraction(0) if mode == "exact" else 0.0


def one(mode: Mode) -> Scalar:
    return Fraction(1) if mode == "exact" else 1.0


def weight(x: Fraction, mode: Mode) -> Scalar:
    """A combinatorial weight expressed in `mode`."""

    return x if mode == "exact" else float(x)


def format_scalar(x: Scalar) -> str:
    if isinstance(x, Fraction):
        return str(x)
    return repr(float(x))


class SpecKind(str, Enum):
    POLY = "poly"
    EXPSCALE = "expscale"
    DERIVS = "derivs"


@dataclass(frozen=True)
class FunctionSpec:
    kind: SpecKind
    coeffs: tuple[Scalar, ...] = ()
    c: Scalar | None = None
    lam: Scalar | None = None
    values: tuple[Scalar, ...] = ()

    @classmethod
    def poly(cls, coeffs: Iterable[Scalar]) -> "FunctionSpec":
        cs = tuple(coeffs)
        for x in cs:
            if isinstance(x, float) and not math.isfinite(x):
                raise JetError(message="polynomial coefficients must be finite")
        return cls(kind=SpecKind.POLY, coeffs=cs)

    @classmethod
    def expscale(cls, c: Scalar, lam: Scalar) -> "FunctionSpec":
        return cls(kind=SpecKind.EXPSCALE, c=c, lam=lam)

    @classmethod
    def derivs(cls, values: Iterable[Scalar]) -> "FunctionSpec":
        return cls(kind=SpecKind.DERIVS, values=tuple(values))

    @property
    def degree(self) -> int | None:
        """Polynomial degree (-1 for the zero polynomial); None when unbounded."""

        if self.kind is not SpecKind.POLY:
            return None
        for i in range(len(self.coeffs) - 1, -1, -1):
            if self.coeffs[i] != 0:
                return i
        return -1

    def scalars(self) -> tuple[Scalar, ...]:
        if self.kind is SpecKind.POLY:
            return self.coeffs
        if self.kind is SpecKind.EXPSCALE:
            return (self.c, self.lam)  # type: ignore[return-value]
        return self.values

    def converted(self, mode: Mode) -> "FunctionSpec":
        conv = [to_scalar(x, mode) for x in self.scalars()]
        if self.kind is SpecKind.POLY:
            return FunctionSpec.poly(conv)
        if self.kind is SpecKind.EXPSCALE:
            return FunctionSpec.expscale(conv[0], conv[1])
        return FunctionSpec.derivs(conv)

    def evaluate(self, u: np.ndarray) -> np.ndarray:
        """Pointwise values (floating), used by the Monte Carlo integrator."""

        if self.kind is SpecKind.POLY:
            return np.polynomial.polynomial.polyval(u, [float(x) for x in self.coeffs] or [0.0])
        if self.kind is SpecKind.EXPSCALE:
            return float(self.c) * np.exp(float(self.lam) * u)  # type: ignore[arg-type]
        raise JetError(message="a derivs spec cannot be evaluated pointwise")

    def to_json(self) -> dict[str, object]:
        if self.kind is SpecKind.POLY:
            return {"kind": "poly", "coeffs": [format_scalar(x) for x in self.coeffs]}
        if self.kind is SpecKind.EXPSCALE:
            return {"kind": "expscale", "c": format_scalar(self.c), "lambda": format_scalar(self.lam)}  # type: ignore[arg-type]
        return {"kind": "derivs", "values": [format_scalar(x) for x in self.values]}


@dataclass(frozen=True)
class Jet:
    base_point: Scalar
    derivs: tuple[Scalar, ...]
    mode: Mode

    @property
    def order(self) -> int:
        return len(self.derivs) - 1

    def __getitem__(self, k: int) -> Scalar:
        if k < 0 or k > self.order:
            raise JetError(message=f"derivative {k} requested from a jet of order {self.order}")
        return self.derivs[k]


def _check_mode(mode: Mode, xs: Iterable[Scalar], what: str) -> None:
    for x in xs:
        if mode_of(x) != mode:
            raise ModeError(message=f"{what}: {mode_of(x)} value in {mode} mode")


def jet_from_spec(s: FunctionSpec, u0: Scalar, order: int) -> Jet:
    """Derivatives 0..order of the spec at u0, in the mode of u0."""

    if order < 0:
        raise JetError(message="jet order must be >= 0")
    mode = mode_of(u0)

    if s.kind is SpecKind.POLY:
        _check_mode(mode, s.coeffs, "poly coefficients")
        d: list[Scalar] = []
        for k in range(order + 1):
            acc = zero(mode)
            for j in range(k, len(s.coeffs)):
                if s.coeffs[j]:
                    acc += s.coeffs[j] * perm(j, k) * u0 ** (j - k)
            d.append(acc)
        return Jet(base_point=u0, derivs=tuple(d), mode=mode)

    if s.kind is SpecKind.EXPSCALE:
        if mode != "float":
            raise ModeError(message="expscale functions are only available in float mode")
        _check_mode(mode, (s.c, s.lam), "expscale parameters")  # type: ignore[arg-type]
        c, lam = float(s.c), float(s.lam)  # type: ignore[arg-type]
        e = c * math.exp(lam * u0)
        return Jet(base_point=u0, derivs=tuple(e * lam**k for k in range(order + 1)), mode=mode)

    if len(s.values) < order + 1:
        raise JetError(message=f"derivs list has {len(s.values)} values, order {order} needs {order + 1}")
    _check_mode(mode, s.values, "derivs values")
    return Jet(base_point=u0, derivs=tuple(s.values[: order + 1]), mode=mode)


def check_compatible(g: Jet, h: Jet) -> None:
    if g.mode != h.mode:
        raise ModeError(message=f"cannot combine {g.mode} and {h.mode} jets")
    if g.base_point != h.base_point:
        raise JetError(message=f"base points differ: {g.base_point} != {h.base_point}")


def jet_product(g: Jet, h: Jet) -> Jet:
    """Leibniz rule; the result has the smaller of the two orders."""

    check_compatible(g, h)
    n = min(g.order, h.order)
    d = []
    for k in range(n + 1):
        acc = zero(g.mode)
        for i in range(k + 1):
            acc += comb(k, i) * g.derivs[i] * h.derivs[k - i]
        d.append(acc)
    return Jet(base_point=g.base_point, derivs=tuple(d), mode=g.mode)


def apply_generator(g: Jet, alpha: Jet, beta: Jet) -> Jet:
    """Jet of alpha*g' + 1/2*beta**2*g''."""

    check_compatible(g, alpha)
    check_compatible(g, beta)
    if g.order < 2:
        raise JetError(message=f"generator needs a jet of order >= 2, got {g.order}")
    beta2 = jet_product(beta, beta)
    n = min(g.order - 2, alpha.order, beta2.order)
    half = Fraction(1, 2) if g.mode == "exact" else 0.5
    d = []
    for j in range(n + 1):
        drift = zero(g.mode)
        diffusion = zero(g.mode)
        for i in range(j + 1):
            c = comb(j, i)
            drift += c * alpha.derivs[i] * g.derivs[j - i + 1]
            diffusion += c * beta2.derivs[i] * g.derivs[j - i + 2]
        d.append(drift + half * diffusion)
    return Jet(base_point=g.base_point, derivs=tuple(d), mode=g.mode)


def iterated_generator(k: int, alpha: Jet, beta: Jet, f: Jet) -> Scalar:
    """(L**k f)(u0)."""

    if k < 0:
        raise JetError(message="k must be >= 0")
    if f.order < 2 * k:
        raise JetError(message=f"L^{k} needs f to order {2 * k}, got {f.order}")
    g = f
    for _ in range(k):
        g = apply_generator(g, alpha, beta)
    return g.derivs[0]


def elementary_differential(t: ExoticTree, alpha: Jet, beta: Jet, f: Jet) -> Scalar:
    """f^(n_root)(u0) times the colour jets' fertility derivatives over the other vertices."""

    check_compatible(f, alpha)
    check_compatible(f, beta)
    jets = {Colour.ROOT: f, Colour.ALPHA: alpha, Colour.BETA: beta}
    acc = one(f.mode)
    for v, c in enumerate(t.colours):
        acc *= jets[c][t.fertility(v)]
        if not acc:
            return zero(f.mode)
    return acc
