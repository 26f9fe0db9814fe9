"""Feynman multi-indices: fertility counters for pre-Feynman diagrams.

A multi-index records how many alpha-vertices have each fertility, how many
beta pairs have each unordered fertility pair, and the root's fertility.
Text form (used by the CLI)::

    b.2 a0^2 B(0,0)

``b.M`` is the root with fertility M (exactly once), ``aN^K`` means K
alpha-vertices of fertility N, ``B(K1,K2)^K`` means K beta pairs whose
halves have fertilities K1 and K2. ``^1`` may be omitted; repeated tokens
add up.
"""

from __future__ import annotations

import itertools
import logging
import re
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Iterator, Mapping

from .errors import DegenerateTreeError, MultiIndexError, SizeGuardError
from .growth import FertilityRule, enumerate_trees, realization_coefficient, symmetry_factor
from .jets import Jet, Scalar, check_compatible
from .trees import Colour, ExoticTree


logger = logging.getLogger(__name__)


DEFAULT_MAX_LEGS = 8
DEFAULT_MAX_LENGTH = 8


@dataclass(frozen=True)
class FeynmanMultiIndex:
    root: int
    gamma_alpha: tuple[tuple[int, int], ...] = ()
    gamma_beta: tuple[tuple[tuple[int, int], int], ...] = ()

    @classmethod
    def of(
        cls,
        root: int,
        alpha: Mapping[int, int] | None = None,
        beta: Mapping[tuple[int, int], int] | None = None,
    ) -> "FeynmanMultiIndex":
        if root < 0:
            raise MultiIndexError(message="root fertility must be >= 0")
        ga: Counter[int] = Counter()
        for n, k in (alpha or {}).items():
            if n < 0 or k < 0:
                raise MultiIndexError(message=f"invalid alpha entry a{n}^{k}")
            ga[n] += k
        gb: Counter[tuple[int, int]] = Counter()
        for (k1, k2), k in (beta or {}).items():
            if k1 < 0 or k2 < 0 or k < 0:
                raise MultiIndexError(message=f"invalid beta entry B({k1},{k2})^{k}")
            gb[(min(k1, k2), max(k1, k2))] += k
        return cls(
            root=root,
            gamma_alpha=tuple(sorted((n, k) for n, k in ga.items() if k)),
            gamma_beta=tuple(sorted((ks, k) for ks, k in gb.items() if k)),
        )

    @property
    def alpha(self) -> dict[int, int]:
        return dict(self.gamma_alpha)

    @property
    def beta(self) -> dict[tuple[int, int], int]:
        return dict(self.gamma_beta)

    def __str__(self) -> str:
        parts = [f"b.{self.root}"]
        for n, k in self.gamma_alpha:
            parts.append(f"a{n}" + (f"^{k}" if k != 1 else ""))
        for (k1, k2), k in self.gamma_beta:
            parts.append(f"B({k1},{k2})" + (f"^{k}" if k != 1 else ""))
        return " ".join(parts)


@dataclass(frozen=True)
class MultiGradings:
    length: int
    psi_legs: int
    tilde_legs: int
    alpha_length: int
    beta_length: int
    root_length: int = 1

    @property
    def populated(self) -> bool:
        return self.psi_legs == self.tilde_legs


_TOKEN = re.compile(
    r"\s*(?:"
    r"b\.(?P<root>\d+)"
    r"|a(?P<an>\d+)(?:\^(?P<ak>\d+))?"
    r"|B\(\s*(?P<k1>\d+)\s*,\s*(?P<k2>\d+)\s*\)(?:\^(?P<bk>\d+))?"
    r")"
)


def parse_multiindex(text: str) -> FeynmanMultiIndex:
    root: int | None = None
    alpha: Counter[int] = Counter()
    beta: Counter[tuple[int, int]] = Counter()
    pos = 0
    stripped = text.rstrip()
    while pos < len(stripped):
        m = _TOKEN.match(stripped, pos)
        if m is None or m.end() == pos:
            raise MultiIndexError(message=f"invalid multi-index {text!r} at offset {pos}")
        if m.group("root") is not None:
            if root is not None:
                raise MultiIndexError(message=f"multi-index {text!r} has more than one root marker")
            root = int(m.group("root"))
        elif m.group("an") is not None:
            alpha[int(m.group("an"))] += int(m.group("ak") or 1)
        else:
            k1, k2 = int(m.group("k1")), int(m.group("k2"))
            beta[(min(k1, k2), max(k1, k2))] += int(m.group("bk") or 1)
        pos = m.end()
        if pos < len(stripped) and not stripped[pos].isspace():
            raise MultiIndexError(message=f"invalid multi-index {text!r} at offset {pos}")
    if root is None:
        raise MultiIndexError(message=f"multi-index {text!r} has no root marker b.M")
    return FeynmanMultiIndex.of(root, alpha, beta)


def multi_gradings(g: FeynmanMultiIndex) -> MultiGradings:
    n_alpha = sum(k for _, k in g.gamma_alpha)
    n_beta = sum(k for _, k in g.gamma_beta)
    psi = g.root + sum(n * k for n, k in g.gamma_alpha) + sum((k1 + k2) * k for (k1, k2), k in g.gamma_beta)
    return MultiGradings(
        length=n_alpha + n_beta + 1,
        psi_legs=psi,
        tilde_legs=n_alpha + 2 * n_beta,
        alpha_length=n_alpha,
        beta_length=n_beta,
    )


def symmetry_factor_multi(g: FeynmanMultiIndex) -> int:
    alpha = g.alpha
    out = 1
    for n in set(alpha) | {g.root}:
        count = alpha.get(n, 0)
        out *= factorial(count) * factorial(n) ** (count + (1 if n == g.root else 0))
    for (k1, k2), k in g.gamma_beta:
        out *= factorial(k) * (factorial(k1) * factorial(k2)) ** k
        if k1 == k2:
            out *= 2**k
    return out


def counting_map(t: ExoticTree) -> FeynmanMultiIndex:
    alpha: Counter[int] = Counter()
    for v, c in enumerate(t.colours):
        if c is Colour.ALPHA:
            alpha[t.fertility(v)] += 1
    beta: Counter[tuple[int, int]] = Counter()
    for v, w in t.pair_members():
        a, b = sorted((t.fertility(v), t.fertility(w)))
        beta[(a, b)] += 1
    return FeynmanMultiIndex.of(t.fertility(0), alpha, beta)


def _multisets(size: int, total: int, lo: int = 0) -> Iterator[tuple[int, ...]]:
    """Non-decreasing tuples of `size` integers >= lo summing to `total`."""

    if size == 0:
        if total == 0:
            yield ()
        return
    for first in range(lo, total // size + 1):
        for rest in _multisets(size - 1, total - first, first):
            yield (first,) + rest


def _pair_multisets(
    size: int,
    total: int,
    pairs: tuple[tuple[int, int], ...] | None = None,
    start: int = 0,
) -> Iterator[tuple[tuple[int, int], ...]]:
    """Multisets of `size` unordered fertility pairs with entries summing to `total`."""

    if pairs is None:
        pairs = tuple((k1, s - k1) for s in range(total + 1) for k1 in range(s // 2 + 1))
    if size == 0:
        if total == 0:
            yield ()
        return
    for i in range(start, len(pairs)):
        p = pairs[i]
        s = p[0] + p[1]
        # pairs are ordered by sum, so every later pick costs at least s
        if s * size > total:
            break
        for rest in _pair_multisets(size - 1, total - s, pairs, i):
            yield (p,) + rest


@lru_cache(maxsize=None)
def _populated_of_length(length: int) -> tuple[FeynmanMultiIndex, ...]:
    k = length - 1
    found: set[FeynmanMultiIndex] = set()
    for pairs in range(k + 1):
        n_alpha = k - pairs
        legs = n_alpha + 2 * pairs
        for root in range(legs + 1):
            rest = legs - root
            for a_total in range(rest + 1):
                for fert in _multisets(n_alpha, a_total):
                    for bp in _pair_multisets(pairs, rest - a_total):
                        found.add(FeynmanMultiIndex.of(root, Counter(fert), Counter(bp)))
    out = tuple(sorted(found, key=lambda g: (g.root, g.gamma_alpha, g.gamma_beta)))
    logger.debug("%d populated multi-indices of length %d", len(out), length)
    return out


def enumerate_multiindices(length: int) -> list[FeynmanMultiIndex]:
    """Every populated multi-index of the given length, whether or not a tree realises it."""

    if length < 1:
        raise MultiIndexError(message="multi-index length must be >= 1")
    return list(_populated_of_length(length))


def _require_populated(g: FeynmanMultiIndex) -> MultiGradings:
    gr = multi_gradings(g)
    if not gr.populated:
        raise MultiIndexError(
            message=f"multi-index {g} is not populated ({gr.psi_legs} psi-legs, {gr.tilde_legs} tilde-legs)"
        )
    return gr


def _rule_for(g: FeynmanMultiIndex) -> FertilityRule:
    return FertilityRule(
        alpha_max=max((n for n, _ in g.gamma_alpha), default=-1),
        beta_max=max((k2 for (_, k2), _ in g.gamma_beta), default=-1),
        root_max=g.root,
    )


@lru_cache(maxsize=None)
def _buckets(edges: int, rule: FertilityRule) -> Mapping[FeynmanMultiIndex, tuple[ExoticTree, ...]]:
    out: dict[FeynmanMultiIndex, list[ExoticTree]] = {}
    for t in enumerate_trees(edges, rule)[edges]:
        out.setdefault(counting_map(t), []).append(t)
    return {g: tuple(ts) for g, ts in out.items()}


def trees_for(g: FeynmanMultiIndex, max_length: int = DEFAULT_MAX_LENGTH) -> list[ExoticTree]:
    """Canonical trees whose counting map is g, sorted by canonical key."""

    gr = _require_populated(g)
    if gr.length > max_length:
        raise SizeGuardError(message=f"multi-index {g} has length {gr.length} > guard {max_length}")
    return list(_buckets(gr.length - 1, _rule_for(g)).get(g, ()))


def phi_expand(g: FeynmanMultiIndex, max_length: int = DEFAULT_MAX_LENGTH) -> dict[ExoticTree, Fraction]:
    """Trees with counting map g, each weighted by sigma_F(g) / sigma(tree)."""

    sf = symmetry_factor_multi(g)
    return {t: Fraction(sf, symmetry_factor(t)) for t in trees_for(g, max_length)}


def realization_multi(g: FeynmanMultiIndex, max_length: int = DEFAULT_MAX_LENGTH) -> dict[int, Fraction]:
    """Polynomial in t as {power: coefficient}; the zero polynomial is {}."""

    gr = multi_gradings(g)
    if not gr.populated:
        return {}
    total = sum(
        (w * realization_coefficient(t) for t, w in phi_expand(g, max_length).items()),
        Fraction(0),
    )
    return {gr.length - 1: total} if total else {}


# -- pairing oracle -----------------------------------------------------------


@dataclass(frozen=True)
class _Node:
    colour: Colour
    capacity: int
    pair: int = 0  # 1-based pair number for beta halves


def _nodes(g: FeynmanMultiIndex) -> list[_Node]:
    nodes = [_Node(Colour.ROOT, g.root)]
    for n, k in g.gamma_alpha:
        nodes.extend(_Node(Colour.ALPHA, n) for _ in range(k))
    pid = 0
    for (k1, k2), k in g.gamma_beta:
        for _ in range(k):
            pid += 1
            nodes.append(_Node(Colour.BETA, k1, pid))
            nodes.append(_Node(Colour.BETA, k2, pid))
    return nodes


def contraction_oracle(g: FeynmanMultiIndex, max_legs: int = DEFAULT_MAX_LEGS) -> dict[bytes, int]:
    """Count leg pairings of the pre-diagram g by the canonical tree they produce.

    Every tilde-leg (one per alpha-vertex and per beta half) is joined to a
    psi-leg. Pairings that close a self-loop or a directed cycle once the
    halves of each pair are identified are dropped (Theta(0) = 0), and so
    are disconnected ones.

    Leg bijections are not enumerated one by one: the walk picks, for each
    vertex, the set of children attached to its psi-legs, and assumes the
    prod(capacity!) orderings of those legs, so every labelled tree is
    weighted by that product.
    """

    gr = _require_populated(g)
    if gr.psi_legs > max_legs:
        raise SizeGuardError(message=f"multi-index {g} has {gr.psi_legs} legs > guard {max_legs}")

    nodes = _nodes(g)
    twin: dict[int, int] = {}
    for i, a in enumerate(nodes):
        for j, b in enumerate(nodes):
            if i != j and a.pair and a.pair == b.pair:
                twin[i] = j
    n = len(nodes)
    counts: dict[bytes, int] = {}

    def finish(parent: list[int]) -> None:
        w = 1
        for node in nodes:
            w *= factorial(node.capacity)
        try:
            t = ExoticTree.build(
                [x.colour for x in nodes],
                parent,
                [x.pair for x in nodes],
            )
        except DegenerateTreeError:
            return
        counts[t.key] = counts.get(t.key, 0) + w

    def grow(queue: list[int], parent: list[int], ancestors: list[frozenset[int]], unplaced: frozenset[int]) -> None:
        if not queue:
            if not unplaced:
                finish(parent)
            return
        v, rest = queue[0], queue[1:]
        cap = nodes[v].capacity
        if cap > len(unplaced):
            return
        line = ancestors[v] | {v}
        for chosen in itertools.combinations(sorted(unplaced), cap):
            # A half hanging below its twin closes a cycle after merging.
            if any(c in twin and twin[c] in line for c in chosen):
                continue
            nparent = list(parent)
            nanc = list(ancestors)
            for c in chosen:
                nparent[c] = v
                nanc[c] = line
            grow(rest + list(chosen), nparent, nanc, unplaced - set(chosen))

    grow([0], [-1] * n, [frozenset()] * n, frozenset(range(1, n)))
    logger.debug("oracle for %s: %d diagram classes", g, len(counts))
    return dict(sorted(counts.items()))


def elementary_differential_multi(g: FeynmanMultiIndex, alpha: Jet, beta: Jet, f: Jet) -> Scalar:
    check_compatible(f, alpha)
    check_compatible(f, beta)
    acc = f[g.root]
    for n, k in g.gamma_alpha:
        acc *= alpha[n] ** k
    for (k1, k2), k in g.gamma_beta:
        acc *= (beta[k1] * beta[k2]) ** k
    return acc
