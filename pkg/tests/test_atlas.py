import pytest

from hp2kit.atlas import (
    ATLAS_NAMES, MANDATORY_CASES, PRINTED_M2, TABLE_NAMES, atlas_entry, c5_on_10, close_under, from_json,
    hp2_seed, load_dat, mandatory_subcomplex, named_group, save_dat, table_sphere, to_json,
)
from hp2kit.complex import euler_characteristic, f_vector, from_facets, is_weak_pseudomanifold, mask_of
from hp2kit.errors import ParseError, UnknownEntry
from hp2kit.homology import is_homology_manifold, is_homology_sphere
from hp2kit.symmetry import is_invariant

HP2_F = (15, 105, 455, 1365, 3003, 4515, 4230, 2205, 490)


def test_every_entry_loads_and_roundtrips():
    for name in ATLAS_NAMES:
        e = atlas_entry(name)
        assert e.provenance
        assert load_dat(save_dat([e.complex])) == [e.complex]
        assert from_json(to_json([e.complex])) == [e.complex]


@pytest.mark.parametrize("name", [n for n in TABLE_NAMES if "star" not in n])
def test_table_spheres(name):
    L = table_sphere(name)
    assert is_invariant(L, c5_on_10())
    assert is_homology_sphere(L, 3)


def test_starred_entries_are_pseudomanifolds_but_not_spheres():
    for name in ("L1star", "L2star"):
        L = table_sphere(name)
        assert is_weak_pseudomanifold(L, 3)
        assert not is_homology_sphere(L, 3)
    assert table_sphere("L1*") == table_sphere("L1star")


def test_printed_m2_row_is_not_a_pseudomanifold():
    reps = [mask_of(10 if c == "X" else int(c) for c in r) for r in PRINTED_M2]
    K = from_facets(10, close_under(c5_on_10(), reps))
    assert not is_weak_pseudomanifold(K, 3)


@pytest.mark.parametrize("name", ["hp2_a5", "hp2_c6xc2"])
def test_seeds(name):
    K = hp2_seed(name)
    assert f_vector(K) == HP2_F
    assert euler_characteristic(K) == 3
    assert is_invariant(K, named_group({"hp2_a5": "A5", "hp2_c6xc2": "C6xC2"}[name]))
    assert is_homology_manifold(K, 8)


def test_mandatory_cases_are_invariant_sets():
    for case in MANDATORY_CASES:
        G, facets = mandatory_subcomplex(case)
        assert G.n == 15 and facets
        assert all(f.bit_count() == 9 for f in facets)


def test_unknown_names():
    with pytest.raises(UnknownEntry):
        atlas_entry("nope")
    with pytest.raises(UnknownEntry):
        named_group("nope")
    with pytest.raises(UnknownEntry):
        mandatory_subcomplex("nope")


def test_dat_parsing():
    text = "# two complexes\nn=4\n1100\n0110\n\n0011\n"
    a, b = load_dat(text)
    assert a.facets == (0b0011, 0b0110) and b.facets == (0b1100,)
    for bad in ("110\n1100\n", "1120\n", "n=x\n"):
        with pytest.raises(ParseError):
            load_dat(bad)
    with pytest.raises(ParseError):
        from_json("{not json")
    with pytest.raises(ParseError):
        from_json({"complexes": [{"facets": []}]})
