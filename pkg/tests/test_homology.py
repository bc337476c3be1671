import pytest
from hypothesis import given, settings, strategies as st

from hp2kit.atlas import cp2_9, rp2_6, table_sphere
from hp2kit.complex import boundary, from_facets, join
from hp2kit.errors import Hp2Error, NotAPseudomanifold
from hp2kit.homology import (
    SphereVerdict, boundary_matrix, certify_sphere_bistellar, check_boundary_squared, euler_from_betti,
    homology, is_homology_manifold, is_homology_sphere, is_orientable, normalize_coeff, smith_normal_form,
    sparse_invariant_factors,
)

from oracles import dense_rank_mod_p

PRIMES = (2, 3, 5, 7)


def test_normalize_coeff():
    assert normalize_coeff("Z") == 0
    assert normalize_coeff("F3") == 3
    assert normalize_coeff(5) == 5
    with pytest.raises(Hp2Error):
        normalize_coeff(4)


def test_snf_small():
    assert smith_normal_form([[2, 4], [6, 8]]) == (2, 4)
    assert smith_normal_form([[0, 0], [0, 0]]) == ()
    assert sparse_invariant_factors([{0: 2}, {1: 3}]) == (1, 6)


def test_rp2_homology():
    K = rp2_6()
    assert homology(K).betti == (1, 0, 0)
    assert homology(K).torsion == ((), (2,), ())
    assert homology(K, 2).betti == (1, 1, 1)
    assert homology(K, 3).betti == (1, 0, 0)
    assert is_homology_manifold(K, 2)
    assert not is_orientable(K, 2)
    assert str(homology(K)) == "H0=Z, H1=Z/2, H2=0"


def test_cp2_homology():
    K = cp2_9()
    h = homology(K)
    assert h.betti == (1, 0, 1, 0, 1)
    assert all(t == () for t in h.torsion)
    assert is_homology_manifold(K, 4)
    assert is_orientable(K, 4)
    assert euler_from_betti(h) == 3


def test_sphere_predicates():
    S = boundary(5, 0b11111)
    assert is_homology_sphere(S, 3)
    assert certify_sphere_bistellar(S, 3) is SphereVerdict.CERTIFIED
    assert certify_sphere_bistellar(rp2_6(), 2) is SphereVerdict.NOT_SPHERE
    assert not is_homology_sphere(rp2_6(), 2)


def test_table_sphere_reduces_to_simplex_boundary():
    L = table_sphere("L1")
    assert is_homology_sphere(L, 3)
    assert certify_sphere_bistellar(L, 3, budget=20000) is SphereVerdict.CERTIFIED


def test_orientability_needs_pseudomanifold():
    with pytest.raises(NotAPseudomanifold):
        is_orientable(from_facets(4, [0b0111]), 2)


def test_join_of_spheres_is_sphere():
    K = join(boundary(6, 0b000111), boundary(6, 0b111000))
    assert is_homology_sphere(K, 3)


@given(st.integers(3, 8).flatmap(
    lambda n: st.lists(st.integers(1, (1 << n) - 1), min_size=1, max_size=8).map(lambda s: from_facets(n, s))))
@settings(max_examples=200, deadline=None)
def test_boundary_squared_vanishes(K):
    for k in range(0, K.dim):
        assert check_boundary_squared(K, k)
    # and as matrices
    for k in range(2, K.dim + 1):
        A = boundary_matrix(K, k - 1)
        B = boundary_matrix(K, k)
        if A and B and A[0]:
            prod = [[sum(A[i][m] * B[m][j] for m in range(len(B))) for j in range(len(B[0]))]
                    for i in range(len(A))]
            assert all(v == 0 for row in prod for v in row)


@given(st.lists(st.lists(st.integers(-6, 6), min_size=3, max_size=3), min_size=1, max_size=4))
@settings(max_examples=200, deadline=None)
def test_snf_divisibility_and_det(M):
    d = smith_normal_form(M)
    assert all(b % a == 0 for a, b in zip(d, d[1:]))
    assert all(x > 0 for x in d)
    for p in PRIMES:
        assert dense_rank_mod_p(M, p) == sum(1 for x in d if x % p)
