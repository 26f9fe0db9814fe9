"""Reduction of exotic trees to multisets of ordinary (beta-free) trees.

Paired beta-vertices are first merged, which turns the tree into a DAG in
which a merged pair may have two parents. Each such element closes a branch:
the two paths from its parents up to their lowest common ancestor. The
branch is resolved by replacing it with every order-preserving interleaving
of the two paths, one chain per shuffle. Repeating until no element has two
parents leaves ordinary rooted trees.
"""

from __future__ import annotations

import itertools
from collections import Counter
from math import comb

from .trees import Colour, ExoticTree, merged_poset


def shuffle_count(n: int, m: int) -> int:
    """Interleavings of two chains with n and m vertices."""

    if n < 0 or m < 0:
        raise ValueError("chain lengths must be >= 0")
    return comb(n + m, n)


def shuffles(left: list[int], right: list[int]) -> list[list[int]]:
    k = len(left) + len(right)
    out: list[list[int]] = []
    for slots in itertools.combinations(range(k), len(left)):
        chosen = set(slots)
        li = iter(left)
        ri = iter(right)
        out.append([next(li) if i in chosen else next(ri) for i in range(k)])
    return out


def _initial_parents(t: ExoticTree) -> dict[int, frozenset[int]]:
    """Node 0 is the root; merged element i becomes node i + 1."""

    p = merged_poset(t)
    node_of = {0: 0}
    for i, members in enumerate(p.elements):
        for v in members:
            node_of[v] = i + 1
    parents: dict[int, frozenset[int]] = {}
    for i, members in enumerate(p.elements):
        parents[i + 1] = frozenset(node_of[t.parents[v]] for v in members)
    return parents


def _ancestors(parents: dict[int, frozenset[int]], node: int) -> set[int]:
    seen: set[int] = set()
    stack = list(parents.get(node, ()))
    while stack:
        x = stack.pop()
        if x in seen:
            continue
        seen.add(x)
        stack.extend(parents.get(x, ()))
    return seen


def _chain_up(parents: dict[int, frozenset[int]], start: int) -> list[int]:
    """start, its parent, ... up to the root; every step has a single parent."""

    out = [start]
    while out[-1] != 0:
        (nxt,) = parents[out[-1]]
        out.append(nxt)
    return out


def _resolve(parents: dict[int, frozenset[int]]) -> list[dict[int, frozenset[int]]]:
    multi = [x for x, ps in parents.items() if len(ps) > 1]
    if not multi:
        return [parents]

    # Topmost closing element: its ancestors all have a single parent.
    m = min(x for x in multi if not any(len(parents.get(a, ())) > 1 for a in _ancestors(parents, x)))
    p1, p2 = sorted(parents[m])
    up1 = _chain_up(parents, p1)
    up2 = _chain_up(parents, p2)
    common = set(up1) & set(up2)
    lca = next(x for x in up1 if x in common)
    # Top-down paths strictly below the common ancestor.
    path1 = list(reversed(up1[: up1.index(lca)]))
    path2 = list(reversed(up2[: up2.index(lca)]))

    out: list[dict[int, frozenset[int]]] = []
    for chain in shuffles(path1, path2):
        nxt = dict(parents)
        above = lca
        for x in chain:
            nxt[x] = frozenset((above,))
            above = x
        nxt[m] = frozenset((above,))
        out.extend(_resolve(nxt))
    return out


def _as_tree(parents: dict[int, frozenset[int]]) -> ExoticTree:
    nodes = sorted(parents)
    index = {0: 0}
    for i, x in enumerate(nodes):
        index[x] = i + 1
    colours = [Colour.ROOT] + [Colour.ALPHA] * len(nodes)
    parent_list = [-1] + [index[next(iter(parents[x]))] for x in nodes]
    return ExoticTree.build(colours, parent_list, [0] * len(colours))


def reduce_tree(t: ExoticTree) -> Counter[ExoticTree]:
    """Multiset of beta-free trees, one per shuffle resolution of the closing branches."""

    if t.is_beta_free:
        return Counter({t: 1})
    return Counter(_as_tree(p) for p in _resolve(_initial_parents(t)))
