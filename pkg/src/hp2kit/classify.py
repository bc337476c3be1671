"""Sorting search output into weak G-isomorphism classes of homology spheres."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .complex import Complex, full_mask, is_strongly_connected
from .homology import is_homology_sphere, is_orientable
from .iso import find_weak_G_isomorphism, symmetry_group
from .search import SearchProblem, solve
from .symmetry import PermGroup, vertex_orbits


def has_faceless_orbit(K: Complex, G: PermGroup, k: int) -> bool:
    """True when some free vertex orbit spans no k-simplex of K."""
    by_size = K.faces_by_size
    faces = by_size[k + 1] if k + 1 < len(by_size) else []
    for orbit in vertex_orbits(G):
        if orbit.bit_count() != G.order:
            continue
        if not any(f & orbit == f for f in faces):
            return True
    return False


def weak_classes(complexes: Sequence[Complex], G: PermGroup) -> list[list[int]]:
    """Indices split into weak G-isomorphism classes, in first-seen order."""
    classes: list[list[int]] = []
    syms: list[PermGroup] = []
    for i, K in enumerate(complexes):
        for c, sym in zip(classes, syms):
            if find_weak_G_isomorphism(complexes[c[0]], K, G, sym) is not None:
                c.append(i)
                break
        else:
            classes.append([i])
            syms.append(symmetry_group(K))
    return classes


@dataclass
class SphereCensus:
    solutions: int
    pool: list[Complex]
    spheres: list[Complex]
    classes: list[list[int]]  # indices into spheres

    def representatives(self) -> list[Complex]:
        return [self.spheres[c[0]] for c in self.classes]

    def match(self, K: Complex, G: PermGroup) -> list[int]:
        """Class indices weakly G-isomorphic to K."""
        sym = symmetry_group(K)
        return [i for i, R in enumerate(self.representatives())
                if find_weak_G_isomorphism(K, R, G, sym) is not None]

    def in_pool(self, K: Complex, G: PermGroup) -> bool:
        sym = symmetry_group(K)
        return any(find_weak_G_isomorphism(K, P, G, sym) is not None for P in self.pool)


def sphere_census(G: PermGroup, d: int, n: int,
                  extra: Callable[[Complex], bool] | None = None, **search_kwargs) -> SphereCensus:
    """Invariant pseudomanifolds with no (*) constraint, filtered to spheres.

    The pool keeps strongly connected complexes on all ``n`` vertices that
    pass ``extra``; the spheres are the Z-homology spheres of the pool.
    """
    sols = solve(SearchProblem(d=d, n=n, N=0, G=G, enforce_star=False), **search_kwargs)
    everything = full_mask(n)
    pool = [K for K in sols if K.vertex_mask == everything and is_strongly_connected(K, d)
            and (extra is None or extra(K))]
    spheres = [K for K in pool if is_homology_sphere(K, d)]
    return SphereCensus(len(sols), pool, spheres, weak_classes(spheres, G))


def nonorientable(K: Complex) -> bool:
    return not is_orientable(K, K.dim)
