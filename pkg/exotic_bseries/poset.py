from __future__ import annotations

import networkx as nx

from .trees import MergedPoset


# Exhaustive DP over downsets; 2**n table entries.
MAX_ELEMENTS = 20


def as_digraph(p: MergedPoset) -> nx.DiGraph:
    """Cover graph with edges pointing from lower to upper element."""

    g = nx.DiGraph()
    g.add_nodes_from(range(p.size))
    g.add_edges_from(p.covers)
    return g


def linear_extensions(p: MergedPoset) -> int:
    """Count linear extensions by dynamic programming over downsets.

    An element may be placed once every element below it is placed; the
    table is indexed by the bitmask of placed elements.
    """

    n = p.size
    if n > MAX_ELEMENTS:
        raise ValueError(f"poset too large for exhaustive counting ({n} > {MAX_ELEMENTS})")
    if not nx.is_directed_acyclic_graph(as_digraph(p)):
        raise ValueError("poset relation has a cycle")

    below = [0] * n
    for lo, up in p.covers:
        below[up] |= 1 << lo

    ways = [0] * (1 << n)
    ways[0] = 1
    for mask in range(1 << n):
        w = ways[mask]
        if not w:
            continue
        for i in range(n):
            bit = 1 << i
            if not mask & bit and below[i] & mask == below[i]:
                ways[mask | bit] += w
    return ways[(1 << n) - 1]
