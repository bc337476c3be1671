from itertools import permutations

import pytest

from hp2kit.atlas import c5_on_10, named_group, rp2_6, table_sphere, NAMED_GROUPS
from hp2kit.complex import from_facets
from hp2kit.errors import GroupTooLarge, ParseError
from hp2kit.symmetry import (
    Permutation, describe_group, fixed_point_complex, group_from_generators, is_invariant,
    orbits_on_ksubsets, parse_permutation, stabilizer_order, trivial_group, vertex_orbits,
)


def test_parse_and_print():
    p = parse_permutation("(1 2 3)(4,5)", 6)
    assert p.images == (1, 2, 0, 4, 3, 5)
    assert str(p) == "(1 2 3)(4 5)"
    assert parse_permutation("()", 3) == Permutation.identity(3)
    for bad in ("(1 2", "(1 1)", "(0 1)", "(a b)", "1 2"):
        with pytest.raises(ParseError):
            parse_permutation(bad, 4)


def test_composition_convention():
    a = parse_permutation("(1 2)", 3)
    b = parse_permutation("(2 3)", 3)
    assert (a * b)(1) == a(b(1)) == 2
    assert (a * a.inverse()) == Permutation.identity(3)


def test_symmetric_group_order():
    G = group_from_generators(5, [parse_permutation("(1 2)", 5), parse_permutation("(1 2 3 4 5)", 5)])
    assert G.order == 120
    assert describe_group(G) == "S5"
    with pytest.raises(GroupTooLarge):
        group_from_generators(8, [parse_permutation("(1 2)", 8), parse_permutation("(1 2 3 4 5 6 7 8)", 8)], cap=1000)


@pytest.mark.parametrize("name, order, tag", [
    ("A5", 60, "A5"), ("A4", 12, "A4"), ("C6xC2", 12, "C6xC2"), ("C7", 7, "C7"), ("S3", 6, "S3"),
    ("C5_on_10", 5, "C5"), ("C5_fixed5", 5, "C5"),
])
def test_named_groups(name, order, tag):
    G = named_group(name)
    assert G.order == order
    assert describe_group(G) == tag


def test_group_tables_cover_named():
    assert set(NAMED_GROUPS) >= {"A5", "A4", "C6xC2", "C7", "S3", "C5_on_10"}


def test_a5_is_transitive_on_15():
    G = named_group("A5")
    assert vertex_orbits(G) == [(1 << 15) - 1]


def test_orbits_partition_ksubsets():
    G = c5_on_10()
    orbits = orbits_on_ksubsets(G, 4)
    masks = [m for o in orbits for m in o]
    assert len(masks) == len(set(masks)) == 210
    for o in orbits:
        assert o[0] == min(o)
        assert len(o) * stabilizer_order(G, o[0]) == G.order


def test_invariance_and_fixed_points():
    G = c5_on_10()
    L = table_sphere("L1")
    assert is_invariant(L, G)
    assert not is_invariant(from_facets(10, [0b1111]), G)
    fp = fixed_point_complex(rp2_6(), trivial_group(6))
    assert len(fp.labels) == 6


def test_group_element_order_is_reproducible():
    a = group_from_generators(6, [parse_permutation("(1 2 3)", 6), parse_permutation("(4 5)", 6)])
    b = group_from_generators(6, [parse_permutation("(1 2 3)", 6), parse_permutation("(4 5)", 6)])
    assert a.elements == b.elements
    assert {tuple(g.images) for g in a} == {
        tuple(p.images) for p in (x * y for x in a for y in a)}


def test_brute_force_closure_matches():
    gens = [parse_permutation("(1 2 3 4)", 4), parse_permutation("(1 3)", 4)]
    G = group_from_generators(4, gens)
    closure = {Permutation.identity(4)}
    while True:
        bigger = closure | {g * h for g in closure for h in gens}
        if bigger == closure:
            break
        closure = bigger
    assert set(G.elements) == closure
    assert len(closure) == 8 and describe_group(G) == "D4"
    assert all(Permutation(p) in G or Permutation(p) not in closure for p in permutations(range(4)))
