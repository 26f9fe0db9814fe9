from __future__ import annotations

from collections import defaultdict

import networkx as nx
import numpy as np
import pytest
from networkx.algorithms.isomorphism import DiGraphMatcher

from exotic_bseries.errors import DegenerateTreeError, TreeStructureError, TreeSyntaxError
from exotic_bseries.growth import enumerate_trees
from exotic_bseries.trees import (
    ExoticTree,
    automorphism_count,
    canonical_key,
    format_tree,
    gradings,
    merged_poset,
    parse_tree,
)


def _graph(t: ExoticTree) -> nx.DiGraph:
    g = nx.DiGraph()
    for v, c in enumerate(t.colours):
        g.add_node(v, colour=c.value)
    for v, p in enumerate(t.parents):
        if p >= 0:
            g.add_edge(p, v, kind="child")
    for v, w in t.pair_members():
        g.add_edge(v, w, kind="pair")
        g.add_edge(w, v, kind="pair")
    return g


def _matcher(a: ExoticTree, b: ExoticTree) -> DiGraphMatcher:
    return DiGraphMatcher(
        _graph(a),
        _graph(b),
        node_match=lambda x, y: x["colour"] == y["colour"],
        edge_match=lambda x, y: x["kind"] == y["kind"],
    )


def _relabel(t: ExoticTree, rng: np.random.Generator) -> ExoticTree:
    order = [int(x) for x in rng.permutation(t.size)]
    new_of = {old: i for i, old in enumerate(order)}
    k = t.pair_count
    colours = [t.colours[old] for old in order]
    parents = [-1 if t.parents[old] < 0 else new_of[t.parents[old]] for old in order]
    pairs = [k + 1 - t.pairs[old] if t.pairs[old] else 0 for old in order]
    return ExoticTree.build(colours, parents, pairs)


def _all_trees(max_edges: int) -> list[ExoticTree]:
    return [t for level in enumerate_trees(max_edges) for t in level]


def test_parse_root_only() -> None:
    t = parse_tree("o")
    assert t.size == 1
    assert t.exotic_order == 1
    assert format_tree(t) == "o"


def test_parse_crossed_pair_keeps_raw_vertices() -> None:
    t = parse_tree("o(a(b#1),a(b#1))")
    assert t.size == 5
    assert t.beta_count == 2
    assert t.pair_members() == [(2, 4)]


def test_parse_ignores_whitespace() -> None:
    assert format_tree(parse_tree(" o ( a , a ) ")) == "o(a,a)"


def test_format_renumbers_pair_ids() -> None:
    assert format_tree(parse_tree("o(a(b#7),a(b#7))")) == "o(a(b#1),a(b#1))"


def test_format_sorts_children() -> None:
    assert format_tree(parse_tree("o(a(b#1),a(b#1),a)")) == "o(a,a(b#1),a(b#1))"
    assert format_tree(parse_tree("o(b#1,a(b#1))")) == "o(a(b#1),b#1)"


def test_key_ignores_child_order() -> None:
    assert canonical_key(parse_tree("o(a,a(b#1,b#1))")) == canonical_key(parse_tree("o(a(b#1,b#1),a)"))


def test_key_separates_shapes() -> None:
    assert canonical_key(parse_tree("o(a(b#1),a(b#1))")) != canonical_key(parse_tree("o(a(b#1,b#1),a)"))


def test_key_ignores_pair_relabelling() -> None:
    a = parse_tree("o(a(b#1,b#2),a(b#1,b#2))")
    b = parse_tree("o(a(b#2,b#1),a(b#2,b#1))")
    c = parse_tree("o(a(b#1,b#2),a(b#2,b#1))")
    assert a.key == b.key == c.key


def test_pair_on_common_root_path_is_degenerate() -> None:
    with pytest.raises(DegenerateTreeError) as exc:
        parse_tree("o(b#1(b#1))")
    assert "degenerate" in str(exc.value)


def test_pairs_closing_a_cycle_are_degenerate() -> None:
    with pytest.raises(DegenerateTreeError):
        parse_tree("o(b#1(b#2),b#2(b#1))")


@pytest.mark.parametrize(
    ("text", "rule"),
    [
        ("x", "tree"),
        ("o(a#1)", "node"),
        ("o(c)", "node"),
        ("o(a", "children"),
        ("o(b#)", "INT"),
        ("o(b#0,b#0)", "INT"),
        ("o(b#²,b#²)", "INT"),
        ("o(a))", "tree"),
    ],
)
def test_syntax_errors_name_the_rule(text: str, rule: str) -> None:
    with pytest.raises(TreeSyntaxError) as exc:
        parse_tree(text)
    assert exc.value.rule == rule
    assert f"rule {rule}" in str(exc.value)


def test_pair_id_used_once_is_rejected() -> None:
    with pytest.raises(TreeStructureError) as exc:
        parse_tree("o(b#1)")
    assert not isinstance(exc.value, DegenerateTreeError)
    assert "used 1 times" in str(exc.value)


def test_pair_id_used_three_times_is_rejected() -> None:
    with pytest.raises(TreeStructureError):
        parse_tree("o(b#1,b#1,b#1)")


@pytest.mark.parametrize(
    ("text", "expected"),
    [
        ("o(a,a)", 2),
        ("o(a(b#1,b#1,b#2,b#2))", 8),
        ("o(a,a(b#1,b#1),a)", 4),
        ("o(a(b#1),a(b#1))", 2),
        ("o(a(b#1),a(b#1),a)", 2),
        ("o(b#1,b#1)", 2),
        ("o", 1),
    ],
)
def test_automorphism_count(text: str, expected: int) -> None:
    assert automorphism_count(parse_tree(text)) == expected


def test_automorphism_count_matches_graph_automorphisms() -> None:
    for t in _all_trees(4):
        brute = sum(1 for _ in _matcher(t, t).isomorphisms_iter())
        assert automorphism_count(t) == brute, t


def test_enumerated_trees_are_pairwise_non_isomorphic() -> None:
    # up to exotic order 5; isomorphic graphs share a WL hash
    for level in enumerate_trees(4):
        buckets: dict[str, list[ExoticTree]] = defaultdict(list)
        for t in level:
            h = nx.weisfeiler_lehman_graph_hash(_graph(t), node_attr="colour", edge_attr="kind")
            buckets[h].append(t)
        for bucket in buckets.values():
            for i, a in enumerate(bucket):
                for b in bucket[i + 1 :]:
                    assert not _matcher(a, b).is_isomorphic(), (a, b)


def test_canonical_form_survives_relabelling() -> None:
    rng = np.random.default_rng(11)
    for t in _all_trees(4):
        for _ in range(3):
            assert _relabel(t, rng) == t


def test_format_then_parse_is_identity() -> None:
    # up to exotic order 6
    for t in _all_trees(5):
        assert parse_tree(format_tree(t)).key == t.key


def test_gradings() -> None:
    g = gradings(parse_tree("o(a(b#1),a(b#1))"))
    assert (g.vertex_count, g.alpha_count, g.beta_count) == (5, 2, 2)
    assert g.exotic_order == 4
    assert g.edge_count == 3
    assert g.fertility == (2, 1, 0, 1, 0)

    root = gradings(parse_tree("o"))
    assert (root.exotic_order, root.edge_count) == (1, 0)

    cherry = gradings(parse_tree("o(b#1,b#1)"))
    assert (cherry.exotic_order, cherry.edge_count) == (2, 1)


def test_merged_poset_single_alpha() -> None:
    p = merged_poset(parse_tree("o(a)"))
    assert p.size == 1
    assert p.covers == frozenset()


def test_merged_poset_crossed_pair() -> None:
    p = merged_poset(parse_tree("o(a(b#1),a(b#1))"))
    assert p.size == 3
    (m,) = [i for i, members in enumerate(p.elements) if len(members) == 2]
    others = tuple(i for i in range(p.size) if i != m)
    assert p.upper_covers(m) == others
    assert p.lower_covers(m) == ()
    for i in others:
        assert p.upper_covers(i) == ()


def test_merged_poset_cherry_is_one_element() -> None:
    p = merged_poset(parse_tree("o(b#1,b#1)"))
    assert p.size == 1


def test_merged_poset_size_is_edge_count() -> None:
    for t in _all_trees(4):
        assert merged_poset(t).size == t.exotic_order - 1


def test_build_rejects_two_roots() -> None:
    with pytest.raises(TreeStructureError):
        ExoticTree.build(["o", "o"], [-1, -1], [0, 0])


def test_with_beta_pair_and_without_round_trip() -> None:
    t = parse_tree("o(a,a)")
    grown = t.with_beta_pair(1, 2)
    assert grown.text == "o(a(b#1),a(b#1))"
    v, w = grown.pair_members()[0]
    assert grown.without({v, w}) == t


def test_without_refuses_inner_vertex() -> None:
    t = parse_tree("o(a(a))")
    with pytest.raises(TreeStructureError):
        t.without({1})
