"""Natural growth of exotic trees and the weights derived from it.

Growth attaches either one alpha-leaf or a fresh pair of beta-leaves to a
tree; every tree with k effective edges arises from trees with k-1 edges.
Everything here counts multiplicities per grafting/removal site and keeps
all weights as exact fractions. Trees are memoised by canonical key.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from types import MappingProxyType
from typing import Iterator, Mapping

from .errors import InputError
from .poset import linear_extensions
from .trees import Colour, ExoticTree, automorphism_count, merged_poset, parse_tree


logger = logging.getLogger(__name__)


TreeRef = ExoticTree | str | bytes


def _key_of(ref: TreeRef) -> bytes:
    if isinstance(ref, ExoticTree):
        return ref.key
    if isinstance(ref, str):
        return parse_tree(ref).key
    return ref


@dataclass(frozen=True)
class GraftEntry:
    tree: ExoticTree
    multiplicity: int
    weight: Fraction


@dataclass(frozen=True)
class WeightedTreeMultiset:
    """Grafting result: canonical key -> (tree, site multiplicity, weight)."""

    entries: Mapping[bytes, GraftEntry]

    def __getitem__(self, ref: TreeRef) -> GraftEntry:
        return self.entries[_key_of(ref)]

    def __contains__(self, ref: object) -> bool:
        return isinstance(ref, (ExoticTree, str, bytes)) and _key_of(ref) in self.entries

    def __iter__(self) -> Iterator[GraftEntry]:
        return iter(self.entries.values())

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class RemovalEntry:
    tree: ExoticTree
    site_count: int


@dataclass(frozen=True)
class RemovalMultiset:
    entries: Mapping[bytes, RemovalEntry]

    def __getitem__(self, ref: TreeRef) -> RemovalEntry:
        return self.entries[_key_of(ref)]

    def __contains__(self, ref: object) -> bool:
        return isinstance(ref, (ExoticTree, str, bytes)) and _key_of(ref) in self.entries

    def __iter__(self) -> Iterator[RemovalEntry]:
        return iter(self.entries.values())

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def total_sites(self) -> int:
        return sum(e.site_count for e in self.entries.values())


@dataclass(frozen=True)
class FertilityRule:
    """Maximum fertility per colour; None is unbounded, -1 forbids the colour."""

    alpha_max: int | None = None
    beta_max: int | None = None
    root_max: int | None = None

    def bound(self, colour: Colour) -> int | None:
        if colour is Colour.ALPHA:
            return self.alpha_max
        if colour is Colour.BETA:
            return self.beta_max
        return self.root_max

    def admits(self, t: ExoticTree) -> bool:
        for v, c in enumerate(t.colours):
            cap = self.bound(c)
            if cap is not None and t.fertility(v) > cap:
                return False
        return True

    def __str__(self) -> str:
        def fmt(x: int | None) -> str:
            return "*" if x is None else str(x)

        return f"a:{fmt(self.alpha_max)},b:{fmt(self.beta_max)},root:{fmt(self.root_max)}"

    @classmethod
    def parse(cls, text: str) -> "FertilityRule":
        """Read "a:MAX,b:MAX,root:MAX"; omitted colours and "*" are unbounded."""

        fields = {"a": "alpha_max", "b": "beta_max", "root": "root_max"}
        values: dict[str, int | None] = {}
        for part in text.split(","):
            name, sep, raw = part.strip().partition(":")
            if not sep or name not in fields:
                raise InputError(f"invalid fertility rule {text!r}: expected a:MAX,b:MAX,root:MAX")
            if fields[name] in values:
                raise InputError(f"invalid fertility rule {text!r}: {name} given twice")
            raw = raw.strip()
            if raw == "*":
                values[fields[name]] = None
                continue
            try:
                cap = int(raw)
            except ValueError:
                raise InputError(f"invalid fertility rule {text!r}: {name} must be an integer or *") from None
            if cap < -1:
                raise InputError(f"invalid fertility rule {text!r}: {name} must be >= -1")
            values[fields[name]] = cap
        return cls(**values)


def _collect(results: list[ExoticTree], weight_of) -> WeightedTreeMultiset:
    counts: dict[bytes, int] = {}
    trees: dict[bytes, ExoticTree] = {}
    for nt in results:
        counts[nt.key] = counts.get(nt.key, 0) + 1
        trees.setdefault(nt.key, nt)
    entries = {
        k: GraftEntry(tree=trees[k], multiplicity=m, weight=weight_of(m))
        for k, m in sorted(counts.items())
    }
    return WeightedTreeMultiset(entries=MappingProxyType(entries))


@lru_cache(maxsize=None)
def graft_alpha(t: ExoticTree) -> WeightedTreeMultiset:
    """Attach an alpha-leaf at every vertex."""

    return _collect([t.with_alpha_leaf(v) for v in range(t.size)], Fraction)


@lru_cache(maxsize=None)
def graft_beta_pair(t: ExoticTree) -> WeightedTreeMultiset:
    """Attach a fresh beta pair at every ordered vertex pair (v, w), v == w allowed.

    Weights carry the factor 1/2 of the beta part of the generator.
    """

    results: list[ExoticTree] = []
    for v in range(t.size):
        for w in range(v, t.size):
            nt = t.with_beta_pair(v, w)
            # (v, w) and (w, v) give the same tree.
            results.append(nt)
            if v != w:
                results.append(nt)
    return _collect(results, lambda m: Fraction(m, 2))


@lru_cache(maxsize=None)
def _levels(max_order: int, rule: FertilityRule | None) -> tuple[tuple[ExoticTree, ...], ...]:
    if max_order == 0:
        root = ExoticTree.root_only()
        return ((root,) if rule is None or rule.admits(root) else (),)

    prev = _levels(max_order - 1, rule)
    found: dict[bytes, ExoticTree] = {}
    for t in prev[-1]:
        for ms in (graft_alpha(t), graft_beta_pair(t)):
            for e in ms:
                if rule is not None and not rule.admits(e.tree):
                    continue
                found.setdefault(e.tree.key, e.tree)
    level = tuple(found[k] for k in sorted(found))
    logger.debug("grew %d trees with %d edges (rule=%s)", len(level), max_order, rule)
    return prev + (level,)


def enumerate_trees(max_order: int, rule: FertilityRule | None = None) -> list[list[ExoticTree]]:
    """All canonical trees by edge count 0..max_order, each level sorted by key.

    Under a rule, trees violating a fertility bound are pruned while growing;
    fertilities never decrease along growth, so nothing admissible is lost.
    """

    if max_order < 0:
        raise ValueError("max_order must be >= 0")
    return [list(level) for level in _levels(max_order, rule)]


def removal_multiset(t: ExoticTree) -> RemovalMultiset:
    """Trees obtained by removing one alpha-leaf or one pair of beta-leaves."""

    assert t.exotic_order >= 2, "the bare root has no removal sites"
    results: list[ExoticTree] = []
    for v in range(1, t.size):
        if t.colours[v] is Colour.ALPHA and t.is_leaf(v):
            results.append(t.without({v}))
    for v, w in t.pair_members():
        if t.is_leaf(v) and t.is_leaf(w):
            results.append(t.without({v, w}))
    assert results, f"no removal site in {t}"
    return _sites(results)


def effective_cut_multiset(t: ExoticTree) -> RemovalMultiset:
    """Remove one effective edge entering the root, regrafting orphans to the root.

    The effective edges are root-child alpha vertices and pairs whose both
    members are children of the root.
    """

    assert t.exotic_order >= 2, "the bare root has no effective edges"
    results: list[ExoticTree] = []
    for v in t.children[0]:
        if t.colours[v] is Colour.ALPHA:
            results.append(t.without({v}, regraft_to_root=True))
    for v, w in t.pair_members():
        if t.parents[v] == 0 and t.parents[w] == 0:
            results.append(t.without({v, w}, regraft_to_root=True))
    return _sites(results)


def _sites(results: list[ExoticTree]) -> RemovalMultiset:
    counts: dict[bytes, int] = {}
    trees: dict[bytes, ExoticTree] = {}
    for nt in results:
        counts[nt.key] = counts.get(nt.key, 0) + 1
        trees.setdefault(nt.key, nt)
    entries = {k: RemovalEntry(tree=trees[k], site_count=c) for k, c in sorted(counts.items())}
    return RemovalMultiset(entries=MappingProxyType(entries))


@lru_cache(maxsize=None)
def symmetry_factor(t: ExoticTree) -> int:
    return automorphism_count(t)


@lru_cache(maxsize=None)
def tree_factorial(t: ExoticTree) -> Fraction:
    """Exotic tree factorial from the leaf-removal recursion n/t! = sum 1/t'!."""

    if t.exotic_order == 1:
        return Fraction(1)
    total = sum(
        (Fraction(e.site_count) / tree_factorial(e.tree) for e in removal_multiset(t)),
        Fraction(0),
    )
    return Fraction(t.exotic_order) / total


@lru_cache(maxsize=None)
def classical_tree_factorial(t: ExoticTree) -> int:
    """|t| times the factorials of the root's subtrees, on beta-free trees."""

    if not t.is_beta_free:
        raise ValueError(f"classical tree factorial needs a beta-free tree, got {t}")

    def rec(v: int) -> tuple[int, int]:
        size, fact = 1, 1
        for c in t.children[v]:
            s, f = rec(c)
            size += s
            fact *= f
        return size, size * fact

    return rec(0)[1]


def cm_weight(t: ExoticTree) -> Fraction:
    return Fraction(factorial(t.exotic_order)) / (symmetry_factor(t) * tree_factorial(t))


@lru_cache(maxsize=None)
def _growth_weights(max_order: int) -> Mapping[bytes, Fraction]:
    if max_order == 0:
        return MappingProxyType({ExoticTree.root_only().key: Fraction(1)})

    prev = _growth_weights(max_order - 1)
    out = dict(prev)
    level = _levels(max_order - 1, None)[-1]
    fresh: dict[bytes, Fraction] = {}
    for t in level:
        w0 = prev[t.key]
        for ms in (graft_alpha(t), graft_beta_pair(t)):
            for e in ms:
                fresh[e.tree.key] = fresh.get(e.tree.key, Fraction(0)) + w0 * e.weight
    out.update(fresh)
    return MappingProxyType(out)


def growth_weights(max_order: int) -> Mapping[bytes, Fraction]:
    """Weighted count of growth histories for every tree with <= max_order edges.

    Each alpha graft contributes its site multiplicity, each pair graft its
    ordered-site multiplicity times 1/2.
    """

    if max_order < 0:
        raise ValueError("max_order must be >= 0")
    return _growth_weights(max_order)


def cm_weight_by_growth(t: ExoticTree) -> Fraction:
    return growth_weights(t.edge_count).get(t.key, Fraction(0))


def realization_coefficient(t: ExoticTree) -> Fraction:
    """r with Pi_t(t) = r * t**edge_count."""

    return Fraction(factorial(t.exotic_order)) / (tree_factorial(t) * factorial(t.edge_count))


def linear_extension_count(t: ExoticTree) -> int:
    return linear_extensions(merged_poset(t))
