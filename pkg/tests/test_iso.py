from itertools import permutations

import pytest
from hypothesis import given, settings, strategies as st

from hp2kit.atlas import ATLAS_NAMES, atlas_entry, c5_on_10, cp2_9, hp2_seed, rp2_6, table_sphere
from hp2kit.complex import boundary, f_vector, from_facets
from hp2kit.errors import ShapeMismatch
from hp2kit.iso import (
    canonical_key, certificate, find_isomorphism, find_weak_G_isomorphism, group_by_isomorphism,
    m_distribution, pack_certificate, symmetry_group, symmetry_order,
)
from hp2kit.symmetry import Permutation


def brute_isomorphic(K1, K2):
    target = set(K2.facets)
    for p in permutations(range(K1.n)):
        if {sum(1 << p[v] for v in range(K1.n) if f >> v & 1) for f in K1.facets} == target:
            return True
    return False


def brute_sym_order(K):
    # automorphisms act on the vertex set; empty slots are not vertices
    facets = set(K.facets)
    verts = [v for v in range(K.n) if K.vertex_mask >> v & 1]
    count = 0
    for q in permutations(verts):
        p = dict(zip(verts, q))
        if {sum(1 << p[v] for v in verts if f >> v & 1) for f in facets} == facets:
            count += 1
    return count


small = st.integers(3, 6).flatmap(
    lambda n: st.lists(st.integers(1, (1 << n) - 1), min_size=1, max_size=6).map(lambda s: from_facets(n, s)))


def test_symmetry_orders():
    assert symmetry_order(rp2_6()) == 60
    assert symmetry_order(cp2_9()) == 54
    assert symmetry_order(boundary(5, 0b11111)) == 120
    assert symmetry_group(cp2_9()).order == 54


@given(small)
@settings(max_examples=120, deadline=None)
def test_sym_order_matches_brute_force(K):
    assert symmetry_order(K) == brute_sym_order(K)


@given(small, st.randoms(use_true_random=False))
@settings(max_examples=120, deadline=None)
def test_isomorphism_matches_brute_force(K, rnd):
    p = list(range(K.n))
    rnd.shuffle(p)
    L = K.relabel(p)
    assert canonical_key(K) == canonical_key(L)
    f = find_isomorphism(K, L)
    assert f is not None and K.relabel(list(f.images)) == L
    # a random second complex on the same slots
    M = from_facets(K.n, [rnd.randrange(1, 1 << K.n) for _ in range(len(K.facets))])
    same = brute_isomorphic(K, M)
    assert (canonical_key(K) == canonical_key(M)) == same
    assert (find_isomorphism(K, M) is not None) == same


def test_atlas_keys_agree_with_isomorphism():
    complexes = {n: atlas_entry(n).complex for n in ATLAS_NAMES}
    keys = {n: canonical_key(K) for n, K in complexes.items()}
    for a in ATLAS_NAMES:
        for b in ATLAS_NAMES:
            if a < b and complexes[a].n == complexes[b].n:
                assert (keys[a] == keys[b]) == (find_isomorphism(complexes[a], complexes[b]) is not None)
    # L2 and L3 differ only as C5-complexes; this map was found by exhaustive search
    L2, L3 = complexes["L2"], complexes["L3"]
    assert L2.relabel([0, 2, 4, 1, 3, 5, 6, 7, 8, 9]) == L3
    assert keys["L2"] == keys["L3"]
    assert len(set(keys.values())) == len(ATLAS_NAMES) - 1


def test_group_by_isomorphism():
    K = rp2_6()
    L = K.relabel([1, 0, 2, 3, 4, 5])
    classes = group_by_isomorphism([K, boundary(6, 0b1111), L])
    assert [c.members for c in classes] == [[0, 2], [1]]


def test_certificate_needs_an_8_complex():
    with pytest.raises(ShapeMismatch):
        m_distribution(cp2_9())
    K = hp2_seed("hp2_a5")
    m = m_distribution(K)
    assert sum(m) == f_vector(K)[6] and certificate(K) == pack_certificate(m)


def test_weak_iso_between_table_spheres():
    G = c5_on_10()
    L = table_sphere("L1")
    w = find_weak_G_isomorphism(L, L, G)
    assert w is not None
    # relabel by a permutation normalizing G: the map i -> 2i on each 5-orbit
    images = [(2 * i) % 5 + 5 * (i // 5) for i in range(10)]
    f = Permutation(images)
    if all(f * g * f.inverse() in G for g in G.generators):
        assert find_weak_G_isomorphism(L, L.relabel(images), G) is not None
    assert find_weak_G_isomorphism(L, table_sphere("L2"), G) is None
