"""Small permutation groups acting on vertex slots."""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from math import gcd
from typing import Iterable, Sequence

from .complex import Complex, from_facets, mask_mapper
from .errors import GroupTooLarge, NotInvariant, ParseError

GROUP_CAP = 10**6


class Permutation:
    """A bijection of ``range(n)``; printed in 1-based cycle notation."""

    __slots__ = ("images", "__dict__")

    def __init__(self, images: Sequence[int]):
        self.images = tuple(images)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(range(n))

    @classmethod
    def from_cycles(cls, n: int, cycles: Iterable[Sequence[int]], one_based: bool = True) -> "Permutation":
        shift = 1 if one_based else 0
        images = list(range(n))
        seen: set[int] = set()
        for cyc in cycles:
            pts = [p - shift for p in cyc]
            for p in pts:
                if p < 0 or p >= n:
                    raise ParseError(f"point {p + shift} outside 1..{n}")
                if p in seen:
                    raise ParseError(f"point {p + shift} appears twice")
                seen.add(p)
            for a, b in zip(pts, pts[1:] + pts[:1]):
                images[a] = b
        return cls(images)

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def __mul__(self, other: "Permutation") -> "Permutation":
        """``(self * other)(i) = self(other(i))``."""
        mine = self.images
        return Permutation([mine[j] for j in other.images])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Permutation) and self.images == other.images

    def __lt__(self, other: "Permutation") -> bool:
        return self.images < other.images

    def __hash__(self) -> int:
        return hash(self.images)

    def __repr__(self) -> str:
        return f"Permutation({self})"

    def __str__(self) -> str:
        text = "".join("(" + " ".join(str(p + 1) for p in cyc) + ")" for cyc in self.cycles())
        return text or "()"

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.images)
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(inv)

    def cycles(self) -> list[tuple[int, ...]]:
        """Nontrivial cycles, each starting at its smallest point."""
        seen = [False] * len(self.images)
        out = []
        for start in range(len(self.images)):
            if seen[start]:
                continue
            cyc = [start]
            seen[start] = True
            j = self.images[start]
            while j != start:
                cyc.append(j)
                seen[j] = True
                j = self.images[j]
            if len(cyc) > 1:
                out.append(tuple(cyc))
        return out

    def order(self) -> int:
        out = 1
        for cyc in self.cycles():
            out = out * len(cyc) // gcd(out, len(cyc))
        return out

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images))

    @cached_property
    def map_mask(self):
        return mask_mapper(self.images)


_CYCLE = re.compile(r"\(([^()]*)\)")


def parse_permutation(text: str, n: int) -> Permutation:
    """Parse cycle notation such as ``"(1 2 3)(4 5 6)"`` or ``"(1,2,3)"``.

    Points are 1-based; omitted points are fixed; ``"()"`` or an empty
    string is the identity.
    """
    stripped = text.strip()
    if not stripped:
        return Permutation.identity(n)
    if _CYCLE.sub("", stripped).strip():
        raise ParseError(f"unexpected characters in permutation {text!r}")
    cycles = []
    for body in _CYCLE.findall(stripped):
        tokens = [t for t in re.split(r"[\s,]+", body.strip()) if t]
        try:
            cycles.append([int(t) for t in tokens])
        except ValueError:
            raise ParseError(f"non-integer point in {text!r}") from None
    return Permutation.from_cycles(n, cycles)


class PermGroup:
    """A permutation group stored as its full element list."""

    def __init__(self, n: int, generators: Sequence[Permutation], elements: Sequence[Permutation]):
        self.n = n
        self.generators = tuple(generators)
        self.elements = tuple(elements)
        self._members = frozenset(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, g: Permutation) -> bool:
        return g in self._members

    def __iter__(self):
        return iter(self.elements)

    def __repr__(self) -> str:
        gens = ", ".join(str(g) for g in self.generators)
        return f"PermGroup(n={self.n}, order={self.order}, gens=[{gens}])"

    def describe(self) -> str:
        return describe_group(self)


def group_from_generators(n: int, gens: Iterable[Permutation], cap: int = GROUP_CAP) -> PermGroup:
    """Closure of ``gens`` by breadth-first multiplication.

    Elements are listed in discovery order; each breadth-first layer is
    sorted lexicographically by image tuple so the order is reproducible.
    """
    gens = [g for g in gens]
    for g in gens:
        if g.n != n or sorted(g.images) != list(range(n)):
            raise ParseError(f"generator {g} is not a permutation of {n} slots")
    ident = Permutation.identity(n)
    elements = [ident]
    seen = {ident}
    layer = [ident]
    while layer:
        fresh = set()
        for e in layer:
            for g in gens:
                h = g * e
                if h not in seen:
                    seen.add(h)
                    fresh.add(h)
                    if len(seen) > cap:
                        raise GroupTooLarge(f"group order exceeds {cap}")
        layer = sorted(fresh)
        elements.extend(layer)
    return PermGroup(n, gens, elements)


def trivial_group(n: int) -> PermGroup:
    return group_from_generators(n, [])


def vertex_orbits(G: PermGroup) -> list[int]:
    """Orbits on slots as masks, sorted by smallest element."""
    seen = 0
    out = []
    for v in range(G.n):
        if seen >> v & 1:
            continue
        orbit = 0
        for g in G.elements:
            orbit |= 1 << g.images[v]
        seen |= orbit
        out.append(orbit)
    return out


def orbit_of_mask(G: PermGroup, mask: int) -> list[int]:
    return sorted({g.map_mask(mask) for g in G.elements})


def orbits_on_ksubsets(G: PermGroup, k: int) -> list[tuple[int, ...]]:
    """Partition of all k-subsets into G-orbits.

    Each orbit is a sorted tuple of masks; its first entry (the numerically
    smallest mask) is the representative.  Orbits are listed in increasing
    representative order.
    """
    maps = [g.map_mask for g in G.elements]
    masks = sorted(sum(1 << i for i in c) for c in combinations(range(G.n), k))
    seen: set[int] = set()
    out = []
    for m in masks:
        if m in seen:
            continue
        orbit = {f(m) for f in maps}
        seen.update(orbit)
        out.append(tuple(sorted(orbit)))
    return out


def stabilizer_order(G: PermGroup, mask: int) -> int:
    return sum(1 for g in G.elements if g.map_mask(mask) == mask)


def is_invariant(K: Complex, G: PermGroup) -> bool:
    facets = set(K.facets)
    for g in G.generators:
        f = g.map_mask
        if any(f(x) not in facets for x in K.facets):
            return False
    return True


@dataclass(frozen=True)
class FixedPointComplex:
    complex: Complex
    labels: tuple[int, ...]  # quotient slot -> orbit mask in the source complex


def fixed_point_complex(K: Complex, G: PermGroup) -> FixedPointComplex:
    """The complex K^G on the G-orbits of vertices that are simplices.

    A set of such orbits spans a simplex when their union is a simplex of K.
    """
    if not is_invariant(K, G):
        raise NotInvariant("complex is not invariant under the group")
    faces = K.faces
    labels = tuple(o for o in vertex_orbits(G) if o & K.vertex_mask == o and o in faces)
    quotient = []
    for f in K.facets:
        q = 0
        for i, o in enumerate(labels):
            if o & f == o:
                q |= 1 << i
        if q:
            quotient.append(q)
    return FixedPointComplex(from_facets(len(labels), quotient), labels)


def element_orders(G: PermGroup) -> Counter:
    return Counter(g.order() for g in G.elements)


def is_abelian(G: PermGroup) -> bool:
    gens = G.generators
    return all(a * b == b * a for a in gens for b in gens)


def _prime_factors(m: int) -> list[int]:
    out = []
    p = 2
    while p * p <= m:
        if m % p == 0:
            out.append(p)
            while m % p == 0:
                m //= p
        p += 1
    if m > 1:
        out.append(m)
    return out


def _abelian_invariants(G: PermGroup) -> list[int]:
    """Invariant factors of a finite abelian group from its element orders."""
    orders = [g.order() for g in G.elements]
    primary: list[list[int]] = []
    for p in _prime_factors(G.order):
        # number of parts of size >= k in the p-partition is log_p(N(p^k)/N(p^(k-1)))
        parts_at_least = []
        prev = 1
        k = 1
        while True:
            count = sum(1 for o in orders if (p**k) % o == 0)
            ratio = count // prev
            if ratio == 1:
                break
            e = 0
            while ratio > 1:
                ratio //= p
                e += 1
            parts_at_least.append(e)
            prev = count
            k += 1
        # conjugate partition
        sizes = [sum(1 for c in parts_at_least if c > i) for i in range(parts_at_least[0])] if parts_at_least else []
        primary.append([p**s for s in sizes])
    width = max((len(x) for x in primary), default=0)
    factors = []
    for i in range(width):
        f = 1
        for x in primary:
            if i < len(x):
                f *= x[i]
        factors.append(f)
    return factors


def describe_group(G: PermGroup) -> str:
    """Isomorphism-type tag for the small groups met in this setting."""
    order = G.order
    if order == 1:
        return "C1"
    if is_abelian(G):
        factors = _abelian_invariants(G)
        return "x".join(f"C{f}" for f in factors)
    orders = element_orders(G)
    if order == 6:
        return "S3"
    if order == 12:
        if orders.get(6):
            return "D6" if orders.get(2, 0) == 7 else "Dic3"
        return "A4"
    if order == 60 and set(orders) == {1, 2, 3, 5}:
        return "A5"
    if order == 8:
        return "D4" if orders.get(2, 0) == 5 else "Q8"
    if order == 24 and orders.get(4) and not orders.get(6):
        return "S4"
    if order == 120 and orders.get(6) and orders.get(4):
        return "S5"
    if order % 2 == 0 and orders.get(2, 0) == order // 2 and orders.get(order // 2):
        return f"D{order // 2}"
    return f"G{order}"
