from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from hp2kit.atlas import cp2_9, rp2_6
from hp2kit.complex import (
    boundary, check_complementarity, check_condition_star, euler_characteristic, f_vector,
    format_simplex, from_facets, is_strongly_connected, is_weak_pseudomanifold, join, link,
    mask_of, neighborliness, ridge_degrees, submasks, vertices_of,
)
from hp2kit.errors import InvalidVertex, NotASimplex, NotPure, OverlappingSupports


def naive_faces(facets):
    out = set()
    for f in facets:
        vs = vertices_of(f)
        for k in range(len(vs) + 1):
            out.update(mask_of(c) for c in combinations(vs, k))
    return out


complexes = st.integers(3, 8).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.integers(1, (1 << n) - 1), min_size=1, max_size=10)))


def test_mask_roundtrip():
    assert mask_of([1, 3, 4]) == 0b1101
    assert vertices_of(0b1101) == [1, 3, 4]
    assert format_simplex(0b1101) == "{1,3,4}"
    with pytest.raises(InvalidVertex):
        mask_of([0])


def test_from_facets_drops_faces():
    K = from_facets(4, [0b0111, 0b0011, 0b1000])
    assert K.facets == (0b0111, 0b1000)
    assert not K.is_pure
    with pytest.raises(InvalidVertex):
        from_facets(3, [0b1000])


def test_boundary_of_tetrahedron():
    K = boundary(4, 0b1111)
    assert f_vector(K) == (4, 6, 4)
    assert euler_characteristic(K) == 2
    assert is_weak_pseudomanifold(K, 2)
    assert neighborliness(K) == 3


def test_link_and_join():
    K = rp2_6()
    L = link(K, 1)
    assert L.dim == 1 and len(L.facets) == 5
    with pytest.raises(NotASimplex):
        link(K, 0b111111)
    assert f_vector(join(from_facets(4, [0b0011]), from_facets(4, [0b1100]))) == (4, 6, 4, 1)
    with pytest.raises(OverlappingSupports):
        join(K, K)


def test_rp2_6():
    K = rp2_6()
    assert f_vector(K) == (6, 15, 10)
    assert euler_characteristic(K) == 1
    assert check_complementarity(K) is None
    assert check_condition_star(K) is None
    assert is_strongly_connected(K, 2)
    assert neighborliness(K) == 2


def test_cp2_9_numbers():
    K = cp2_9()
    assert len(K.facets) == 36
    assert f_vector(K) == (9, 36, 84, 90, 36)
    assert euler_characteristic(K) == 3
    assert check_complementarity(K) is None
    assert set(ridge_degrees(K, 4).values()) == {2}


def test_complementarity_witness_on_sphere():
    # both a simplex and its complement are faces of the tetrahedron boundary
    assert check_complementarity(boundary(4, 0b1111)) is not None


def test_impure_is_not_pseudomanifold():
    K = from_facets(4, [0b0111, 0b1000])
    assert not is_weak_pseudomanifold(K, 2)
    with pytest.raises(NotPure):
        ridge_degrees(K, 2)


@given(complexes)
@settings(max_examples=150, deadline=None)
def test_faces_match_naive_closure(data):
    n, sims = data
    K = from_facets(n, sims)
    assert K.faces == naive_faces(K.facets)
    assert all(not (a != b and a & b == a) for a in K.facets for b in K.facets)
    for s in sims:
        assert s in K


@given(complexes)
@settings(max_examples=150, deadline=None)
def test_star_condition_matches_face_scan(data):
    n, sims = data
    K = from_facets(n, sims)
    full = (1 << n) - 1
    naive = any(s in K.faces and (full ^ s) in K.faces for s in range(1 << n))
    assert (check_condition_star(K) is not None) == naive


@given(complexes)
@settings(max_examples=100, deadline=None)
def test_submasks_count(data):
    _, sims = data
    for s in sims:
        assert len(set(submasks(s))) == 1 << s.bit_count()
