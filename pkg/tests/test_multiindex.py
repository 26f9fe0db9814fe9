from __future__ import annotations

from fractions import Fraction

import pytest

from exotic_bseries.errors import MultiIndexError, SizeGuardError
from exotic_bseries.growth import enumerate_trees, symmetry_factor
from exotic_bseries.jets import FunctionSpec, jet_from_spec, elementary_differential
from exotic_bseries.multiindex import (
    FeynmanMultiIndex,
    contraction_oracle,
    counting_map,
    elementary_differential_multi,
    enumerate_multiindices,
    multi_gradings,
    parse_multiindex,
    phi_expand,
    realization_multi,
    symmetry_factor_multi,
    trees_for,
)
from exotic_bseries.trees import parse_tree


M = parse_multiindex


def test_parse_and_format() -> None:
    g = M("b.2 a1^2 B(0,0)")
    assert g.root == 2
    assert g.alpha == {1: 2}
    assert g.beta == {(0, 0): 1}
    assert str(g) == "b.2 a1^2 B(0,0)"


def test_parse_normalises_pairs_and_repeats() -> None:
    assert M("b.1 B(2,0) a0 a0") == M("b.1 a0^2 B(0,2)")


@pytest.mark.parametrize("text", ["a0", "b.1 b.2", "b.2 x", "b.1a0", ""])
def test_parse_rejects(text: str) -> None:
    with pytest.raises(MultiIndexError):
        M(text)


def test_of_rejects_negative_root() -> None:
    with pytest.raises(MultiIndexError):
        FeynmanMultiIndex.of(-1)


def test_gradings_and_population() -> None:
    gr = multi_gradings(M("b.2 a1^2 B(0,0)"))
    assert gr.length == 4
    assert gr.psi_legs == 4
    assert gr.tilde_legs == 4
    assert gr.populated

    assert not multi_gradings(M("b.1")).populated


@pytest.mark.parametrize(
    ("text", "expected"),
    [
        ("b.2 a0^2", 4),
        ("b.2 B(0,0)", 4),
        ("b.0", 1),
        ("b.2 a1^2 B(0,0)", 8),
        ("b.1 a1 a0", 1),
    ],
)
def test_symmetry_factor_multi(text: str, expected: int) -> None:
    assert symmetry_factor_multi(M(text)) == expected


def test_counting_map() -> None:
    assert str(counting_map(parse_tree("o(a(b#1),a(b#1),a)"))) == "b.3 a0 a1^2 B(0,0)"
    assert str(counting_map(parse_tree("o"))) == "b.0"
    assert str(counting_map(parse_tree("o(a(b#1),b#1)"))) == "b.2 a1 B(0,0)"


def test_trees_for_bucket() -> None:
    trees = trees_for(M("b.2 a1^2 B(0,0)"))
    assert [t.text for t in trees] == ["o(a(a(b#1)),b#1)", "o(a(b#1),a(b#1))"]


def test_trees_for_two_shapes_with_one_index() -> None:
    trees = trees_for(M("b.1 a2 a1 a0^2"))
    assert [t.text for t in trees] == ["o(a(a(a,a)))", "o(a(a,a(a)))"]
    assert all(counting_map(t) == M("b.1 a2 a1 a0^2") for t in trees)


def test_trees_for_rejects_unpopulated_and_oversized() -> None:
    with pytest.raises(MultiIndexError):
        trees_for(M("b.1"))
    with pytest.raises(SizeGuardError):
        trees_for(M("b.2 a1^2 B(0,0)"), max_length=3)


def test_enumerate_multiindices_short_lengths() -> None:
    assert enumerate_multiindices(1) == [M("b.0")]
    two = enumerate_multiindices(2)
    assert len(two) == 6
    assert all(multi_gradings(g).populated and multi_gradings(g).length == 2 for g in two)
    with pytest.raises(MultiIndexError):
        enumerate_multiindices(0)


def test_counting_map_lands_in_enumeration() -> None:
    for level in enumerate_trees(3):
        for t in level:
            g = counting_map(t)
            assert g in enumerate_multiindices(t.exotic_order)
            assert t in trees_for(g)


def test_unrealised_index_has_no_trees() -> None:
    # root of fertility 0 cannot carry the alpha-vertex
    g = M("b.0 a1")
    assert multi_gradings(g).populated
    assert trees_for(g) == []
    assert realization_multi(g) == {}
    assert contraction_oracle(g) == {}


def test_phi_expand_weights() -> None:
    phi = phi_expand(M("b.2 a1^2 B(0,0)"))
    assert {t.text: w for t, w in phi.items()} == {
        "o(a(a(b#1)),b#1)": Fraction(8),
        "o(a(b#1),a(b#1))": Fraction(4),
    }


def test_realization_multi() -> None:
    assert realization_multi(M("b.2 a1^2 B(0,0)")) == {3: Fraction(8, 3)}
    assert realization_multi(M("b.0")) == {0: Fraction(1)}
    assert realization_multi(M("b.1")) == {}


@pytest.mark.parametrize(
    ("text", "expected"),
    [
        ("o(a,a)", 2),
        ("o(a(a))", 1),
        ("o(a(b#1),a(b#1))", 4),
        ("o(a(a(b#1)),b#1)", 8),
        ("o", 1),
    ],
)
def test_contraction_oracle_counts(text: str, expected: int) -> None:
    t = parse_tree(text)
    assert contraction_oracle(counting_map(t))[t.key] == expected


def test_contraction_oracle_matches_orbit_stabilizer() -> None:
    for length in range(1, 5):
        for g in enumerate_multiindices(length):
            expected = {t.key: Fraction(symmetry_factor_multi(g), symmetry_factor(t)) for t in trees_for(g)}
            assert contraction_oracle(g) == expected, str(g)


def test_contraction_oracle_size_guard() -> None:
    with pytest.raises(SizeGuardError):
        contraction_oracle(M("b.2 a0^2"), max_legs=1)


def test_elementary_differential_multi_matches_trees() -> None:
    u0 = Fraction(1, 2)
    alpha = jet_from_spec(FunctionSpec.poly([Fraction(1), Fraction(-2), Fraction(3)]), u0, 8)
    beta = jet_from_spec(FunctionSpec.poly([Fraction(2), Fraction(1, 3), Fraction(0), Fraction(1)]), u0, 8)
    f = jet_from_spec(FunctionSpec.poly([Fraction(0), Fraction(1), Fraction(-1), Fraction(1, 2)]), u0, 8)
    for level in enumerate_trees(3):
        for t in level:
            g = counting_map(t)
            assert elementary_differential_multi(g, alpha, beta, f) == elementary_differential(t, alpha, beta, f)
