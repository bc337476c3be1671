"""Bit-mask simplicial complexes on at most 32 vertex slots.

A simplex is a plain ``int`` whose bit ``i`` marks vertex ``i + 1``.  A
:class:`Complex` keeps the vertex-slot count and the maximal simplices in
increasing mask order, so equal complexes compare equal as tuples.
"""
from __future__ import annotations

from collections import defaultdict, deque
from functools import cached_property
from itertools import combinations
from math import comb
from typing import Callable, Iterable, Iterator, Sequence

from .errors import InvalidVertex, NotASimplex, NotPure, OverlappingSupports

MAX_SLOTS = 32


def popcount(mask: int) -> int:
    return mask.bit_count()


def mask_of(vertices: Iterable[int], one_based: bool = True) -> int:
    """Mask of a vertex collection (1-based labels by default)."""
    shift = 1 if one_based else 0
    mask = 0
    for v in vertices:
        if v - shift < 0:
            raise InvalidVertex(f"vertex {v} out of range")
        mask |= 1 << (v - shift)
    return mask


def vertices_of(mask: int, one_based: bool = True) -> list[int]:
    shift = 1 if one_based else 0
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i + shift)
        mask >>= 1
        i += 1
    return out


def bits(mask: int) -> Iterator[int]:
    """Yield the 0-based slot indices set in ``mask``."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def submasks(mask: int) -> Iterator[int]:
    """All submasks of ``mask``, including 0 and ``mask`` itself."""
    s = mask
    while True:
        yield s
        if s == 0:
            return
        s = (s - 1) & mask


def full_mask(n: int) -> int:
    return (1 << n) - 1


def format_simplex(mask: int) -> str:
    return "{" + ",".join(str(v) for v in vertices_of(mask)) + "}"


def mask_mapper(images: Sequence[int]) -> Callable[[int], int]:
    """Return a fast function applying the slot map ``i -> images[i]`` to masks.

    The map is split into byte-sized lookup tables, so applying it costs a
    handful of table reads regardless of the mask's weight.
    """
    n = len(images)
    tables = []
    for start in range(0, n, 8):
        width = min(8, n - start)
        table = [0] * (1 << width)
        for m in range(1, 1 << width):
            low = m & -m
            table[m] = table[m ^ low] | (1 << images[start + low.bit_length() - 1])
        tables.append(table)
    if len(tables) == 1:
        t0 = tables[0]
        return lambda m: t0[m]
    if len(tables) == 2:
        t0, t1 = tables
        return lambda m: t0[m & 255] | t1[m >> 8]
    if len(tables) == 3:
        t0, t1, t2 = tables
        return lambda m: t0[m & 255] | t1[(m >> 8) & 255] | t2[m >> 16]

    def apply(m: int) -> int:
        out = 0
        for table in tables:
            out |= table[m & 255]
            m >>= 8
        return out

    return apply


class Complex:
    """An immutable simplicial complex given by its facets.

    Build instances with :func:`from_facets`; the constructor trusts its
    input to be canonical (maximal masks, sorted, within ``n`` slots).
    """

    __slots__ = ("n", "facets", "__dict__")

    def __init__(self, n: int, facets: tuple[int, ...]):
        self.n = n
        self.facets = facets

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Complex):
            return NotImplemented
        return self.n == other.n and self.facets == other.facets

    def __hash__(self) -> int:
        return hash((self.n, self.facets))

    def __repr__(self) -> str:
        return f"Complex(n={self.n}, facets={len(self.facets)}, dim={self.dim})"

    def __len__(self) -> int:
        return len(self.facets)

    def __iter__(self) -> Iterator[int]:
        return iter(self.facets)

    @property
    def dim(self) -> int:
        if not self.facets:
            return -1
        return max(f.bit_count() for f in self.facets) - 1

    @cached_property
    def vertex_mask(self) -> int:
        out = 0
        for f in self.facets:
            out |= f
        return out

    @property
    def num_vertices(self) -> int:
        return self.vertex_mask.bit_count()

    @cached_property
    def is_pure(self) -> bool:
        return len({f.bit_count() for f in self.facets}) <= 1

    @cached_property
    def faces(self) -> frozenset[int]:
        """Every simplex of the complex, including the empty one."""
        out: set[int] = {0}
        for f in self.facets:
            if f in out:
                continue
            out.update(submasks(f))
        return frozenset(out)

    @cached_property
    def faces_by_size(self) -> list[list[int]]:
        """``faces_by_size[k]`` lists the k-vertex simplices in mask order."""
        buckets: list[list[int]] = [[] for _ in range(self.dim + 2)]
        for s in self.faces:
            buckets[s.bit_count()].append(s)
        for b in buckets:
            b.sort()
        return buckets

    def __contains__(self, mask: int) -> bool:
        return mask in self.faces

    def relabel(self, images: Sequence[int]) -> "Complex":
        """Apply the slot permutation ``i -> images[i]`` (0-based)."""
        apply = mask_mapper(images)
        return Complex(self.n, tuple(sorted(apply(f) for f in self.facets)))


def from_facets(n: int, simplices: Iterable[int]) -> Complex:
    """Complex on ``n`` slots generated by ``simplices``."""
    if n < 0 or n > MAX_SLOTS:
        raise InvalidVertex(f"vertex count {n} outside 0..{MAX_SLOTS}")
    limit = 1 << n
    unique = set()
    for s in simplices:
        if s < 0 or s >= limit:
            raise InvalidVertex(f"simplex {s:#x} uses a slot outside 1..{n}")
        unique.add(s)
    unique.discard(0)
    by_size: dict[int, list[int]] = defaultdict(list)
    for s in unique:
        by_size[s.bit_count()].append(s)
    kept: list[int] = []
    for size in sorted(by_size, reverse=True):
        larger = list(kept)
        for s in by_size[size]:
            if not any(s & f == s for f in larger):
                kept.append(s)
    return Complex(n, tuple(sorted(kept)))


def simplex(n: int, mask: int) -> Complex:
    return from_facets(n, [mask])


def boundary(n: int, mask: int) -> Complex:
    """The boundary of the simplex ``mask`` (all codimension-one faces)."""
    return from_facets(n, [mask ^ (1 << i) for i in bits(mask)])


def f_vector(K: Complex) -> tuple[int, ...]:
    """(f_0, ..., f_d) counted by enumerating all faces."""
    return tuple(len(b) for b in K.faces_by_size[1:])


def euler_characteristic(K: Complex) -> int:
    return sum((-1) ** k * f for k, f in enumerate(f_vector(K)))


def link(K: Complex, sigma: int) -> Complex:
    if sigma not in K.faces:
        raise NotASimplex(f"{format_simplex(sigma)} is not a simplex")
    return Complex(K.n, tuple(sorted(f ^ sigma for f in K.facets if f & sigma == sigma)))


def star_facets(K: Complex, sigma: int) -> list[int]:
    return [f for f in K.facets if f & sigma == sigma]


def join(K1: Complex, K2: Complex) -> Complex:
    if K1.vertex_mask & K2.vertex_mask:
        raise OverlappingSupports("joined complexes share vertices")
    n = max(K1.n, K2.n)
    a = K1.facets or (0,)
    b = K2.facets or (0,)
    return from_facets(n, [x | y for x in a for y in b])


def _require_pure(K: Complex, d: int) -> None:
    if any(f.bit_count() != d + 1 for f in K.facets) or not K.facets:
        raise NotPure(f"complex is not pure of dimension {d}")


def ridge_degrees(K: Complex, d: int) -> dict[int, int]:
    """Number of facets through each (d-1)-face of a pure d-complex."""
    _require_pure(K, d)
    degrees: dict[int, int] = defaultdict(int)
    for f in K.facets:
        for i in bits(f):
            degrees[f ^ (1 << i)] += 1
    return dict(degrees)


def is_weak_pseudomanifold(K: Complex, d: int) -> bool:
    try:
        degrees = ridge_degrees(K, d)
    except NotPure:
        return False
    if d == 0:
        return True
    return all(c == 2 for c in degrees.values())


def facet_adjacency(K: Complex) -> dict[int, list[int]]:
    """Facet index -> indices of facets sharing a codimension-one face."""
    by_ridge: dict[int, list[int]] = defaultdict(list)
    for idx, f in enumerate(K.facets):
        for i in bits(f):
            by_ridge[f ^ (1 << i)].append(idx)
    adj: dict[int, list[int]] = {i: [] for i in range(len(K.facets))}
    for members in by_ridge.values():
        for a, b in combinations(members, 2):
            adj[a].append(b)
            adj[b].append(a)
    return adj


def is_strongly_connected(K: Complex, d: int) -> bool:
    _require_pure(K, d)
    adj = facet_adjacency(K)
    seen = {0}
    queue = deque([0])
    while queue:
        a = queue.popleft()
        for b in adj[a]:
            if b not in seen:
                seen.add(b)
                queue.append(b)
    return len(seen) == len(K.facets)


def check_condition_star(K: Complex) -> int | None:
    """None if no simplex has a simplex complement, else a witness mask.

    A face and its complement are both simplices exactly when two facets
    together cover every slot, so the scan runs over facet pairs.
    """
    full = full_mask(K.n)
    facets = K.facets
    if not facets:
        return None if K.n > 0 else 0
    for f1 in facets:
        need = full & ~f1
        for f2 in facets:
            if f2 & need == need:
                return full & ~f2
    return None


def check_complementarity(K: Complex) -> int | None:
    """None if exactly one of every pair (sigma, complement) is a simplex."""
    full = full_mask(K.n)
    faces = K.faces
    if K.n == 0:
        return 0
    top = 1 << (K.n - 1)
    for sigma in range(top):
        if (sigma in faces) == ((full ^ sigma) in faces):
            return sigma
    return None


def neighborliness(K: Complex) -> int:
    """Largest k with every k-subset of the occupied vertices a simplex."""
    m = K.num_vertices
    buckets = K.faces_by_size
    k = 0
    while k + 1 < len(buckets) and len(buckets[k + 1]) == comb(m, k + 1):
        k += 1
    return k
