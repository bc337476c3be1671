"""Isomorphisms, automorphism groups, canonical keys and certificates.

The search is individualization-refinement on the vertex-facet incidence
structure: vertex colours are refined by the multiset of coloured facets
through each vertex until stable, then a vertex of the smallest
non-singleton cell is individualized and the process recurses.  Colour
ids are always derived by sorting signatures, never from vertex labels,
which is what makes the canonical form label-invariant.
"""
from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Sequence

from .complex import Complex, bits
from .errors import DegreeOutOfRange, NotInvariant, ShapeMismatch
from .symmetry import Permutation, PermGroup, group_from_generators, is_invariant

Coloring = tuple[int, ...]


class _Structure:
    """Incidence data of one complex over its occupied vertices."""

    def __init__(self, K: Complex):
        self.K = K
        self.slots = list(bits(K.vertex_mask))
        local = {s: i for i, s in enumerate(self.slots)}
        self.m = len(self.slots)
        self.facets = [[local[v] for v in bits(f)] for f in K.facets]
        self.incidence: list[list[int]] = [[] for _ in range(self.m)]
        for idx, fv in enumerate(self.facets):
            for v in fv:
                self.incidence[v].append(idx)
        self.facet_set = frozenset(K.facets)

    def invariant(self, v: int) -> tuple:
        """Cheap labeling-independent data about vertex ``v``."""
        return self._invariants[v]

    @property
    def _invariants(self) -> list[tuple]:
        cached = self.__dict__.get("_inv")
        if cached is not None:
            return cached
        sizes = [Counter() for _ in range(self.m)]
        for fv in self.facets:
            for v in fv:
                sizes[v][len(fv)] += 1
        codim2: list[Counter] = [Counter() for _ in range(self.m)]
        if self.K.is_pure and self.K.dim >= 2:
            degree: Counter = Counter()
            for f in self.K.facets:
                vs = [1 << v for v in bits(f)]
                for a, b in combinations(vs, 2):
                    degree[f ^ a ^ b] += 1
            local = {1 << slot: i for i, slot in enumerate(self.slots)}
            for rho, c in degree.items():
                while rho:
                    low = rho & -rho
                    codim2[local[low]][c] += 1
                    rho ^= low
        inv = [(tuple(sorted(sizes[v].items())), tuple(sorted(codim2[v].items()))) for v in range(self.m)]
        self.__dict__["_inv"] = inv
        return inv

    def facet_colors(self, colors: Coloring) -> list[tuple]:
        get = colors.__getitem__
        return [tuple(sorted(map(get, fv))) for fv in self.facets]

    def vertex_signatures(self, colors: Coloring, fcolors: list[tuple], facet_ids: dict) -> list[tuple]:
        fsig = [facet_ids[fc] for fc in fcolors]
        return [(colors[v], tuple(sorted([fsig[i] for i in self.incidence[v]]))) for v in range(self.m)]


def _relabel(sigs_list: list[list]) -> list[Coloring] | None:
    """Replace signatures by their rank among all distinct signatures."""
    distinct = sorted(set().union(*sigs_list))
    ids = {s: i for i, s in enumerate(distinct)}
    out = [tuple(ids[s] for s in sigs) for sigs in sigs_list]
    if len(out) > 1:
        first = Counter(out[0])
        if any(Counter(o) != first for o in out[1:]):
            return None
    return out


def _refine(structs: Sequence[_Structure], colorings: list[Coloring]) -> list[Coloring] | None:
    """Refine colourings jointly until the number of cells stops growing."""
    current = colorings
    cells = len(set(current[0]))
    while True:
        fcols = [s.facet_colors(c) for s, c in zip(structs, current)]
        fid = {sig: i for i, sig in enumerate(sorted(set().union(*fcols)))}
        sigs = [s.vertex_signatures(c, fc, fid) for s, c, fc in zip(structs, current, fcols)]
        nxt = _relabel(sigs)
        if nxt is None:
            return None
        new_cells = len(set(nxt[0]))
        current = nxt
        if new_cells == cells:
            return current
        cells = new_cells


def _initial(structs: Sequence[_Structure]) -> list[Coloring] | None:
    if len({s.m for s in structs}) > 1:
        return None
    start = _relabel([[s.invariant(v) for v in range(s.m)] for s in structs])
    if start is None:
        return None
    return _refine(structs, start)


def _target_cell(colors: Coloring) -> list[int] | None:
    counts = Counter(colors)
    best = None
    for c, size in counts.items():
        if size > 1 and (best is None or (size, c) < best):
            best = (size, c)
    if best is None:
        return None
    return [v for v, c in enumerate(colors) if c == best[1]]


def _individualize(colors: Coloring, v: int) -> Coloring:
    out = [2 * c for c in colors]
    out[v] += 1
    return tuple(out)


def _leaf_map(a: _Structure, b: _Structure, ca: Coloring, cb: Coloring) -> Permutation | None:
    """Slot permutation matching equal colours, if it carries facets to facets."""
    where = {c: v for v, c in enumerate(cb)}
    n = a.K.n
    images = [-1] * n
    for v, c in enumerate(ca):
        images[a.slots[v]] = b.slots[where[c]]
    free_src = [i for i in range(n) if images[i] < 0]
    used = set(images)
    free_dst = [i for i in range(n) if i not in used]
    for i, j in zip(free_src, free_dst):
        images[i] = j
    perm = Permutation(images)
    f = perm.map_mask
    target = b.facet_set
    if all(f(x) in target for x in a.K.facets):
        return perm
    return None


def _isomorphisms(a: _Structure, b: _Structure, ca: Coloring, cb: Coloring) -> Iterator[Permutation]:
    cell = _target_cell(ca)
    if cell is None:
        perm = _leaf_map(a, b, ca, cb)
        if perm is not None:
            yield perm
        return
    v = cell[0]
    color = ca[v]
    for w in (u for u, c in enumerate(cb) if c == color):
        nxt = _refine((a, b), [_individualize(ca, v), _individualize(cb, w)])
        if nxt is not None:
            yield from _isomorphisms(a, b, nxt[0], nxt[1])


def find_isomorphism(K1: Complex, K2: Complex) -> Permutation | None:
    """A slot permutation carrying the facets of K1 onto those of K2."""
    if K1.n != K2.n or len(K1.facets) != len(K2.facets) or K1.num_vertices != K2.num_vertices:
        return None
    if sorted(f.bit_count() for f in K1.facets) != sorted(f.bit_count() for f in K2.facets):
        return None
    a, b = _Structure(K1), _Structure(K2)
    start = _initial((a, b))
    if start is None:
        return None
    return next(_isomorphisms(a, b, start[0], start[1]), None)


class _UnionFind:
    def __init__(self, m: int):
        self.parent = list(range(m))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[max(rx, ry)] = min(rx, ry)


def automorphism_generators(K: Complex) -> tuple[list[Permutation], int]:
    """Generators of Sym(K) and its order.

    Walks the first path of the search tree; at each level it looks for one
    automorphism per candidate image of the individualized vertex that is
    not already reached by the generators found deeper down.  The order is
    the product of the orbit lengths along the path.
    """
    return _automorphisms(_Structure(K))


def _automorphisms(s: _Structure, start: list[Coloring] | None = None) -> tuple[list[Permutation], int]:
    if start is None:
        start = _initial((s,))
    if start is None or s.m == 0:
        return [], 1
    levels = []
    colors = start[0]
    while True:
        cell = _target_cell(colors)
        if cell is None:
            break
        v = cell[0]
        levels.append((colors, v, cell))
        colors = _refine((s,), [_individualize(colors, v)])[0]
    local = {slot: i for i, slot in enumerate(s.slots)}
    gens: list[Permutation] = []
    uf = _UnionFind(s.m)
    order = 1
    for colors, v, cell in reversed(levels):
        left = _individualize(colors, v)
        for w in cell:
            if w == v or uf.find(w) == uf.find(v):
                continue
            pair = _refine((s, s), [left, _individualize(colors, w)])
            if pair is None:
                continue
            perm = next(_isomorphisms(s, s, pair[0], pair[1]), None)
            if perm is None:
                continue
            gens.append(perm)
            for x in range(s.m):
                uf.union(x, local[perm.images[s.slots[x]]])
        root = uf.find(v)
        order *= sum(1 for w in cell if uf.find(w) == root)
    return gens, order


def symmetry_group(K: Complex) -> PermGroup:
    gens, _ = automorphism_generators(K)
    return group_from_generators(K.n, gens)


def symmetry_order(K: Complex) -> int:
    return automorphism_generators(K)[1]


def canonical_labeling(K: Complex, group: PermGroup | None = None) -> tuple[Permutation, tuple[int, ...]]:
    """Best labeling of K and the sorted facet masks it produces.

    Explores the whole search tree, pruning children that are equivalent
    under automorphisms fixing the individualized prefix.  ``group`` may be
    passed when Sym(K) is already known.
    """
    s = _Structure(K)
    if s.m == 0:
        return Permutation.identity(K.n), ()
    initial = _initial((s,))
    if group is None:
        group = group_from_generators(K.n, _automorphisms(s, initial)[0])
    start = initial[0]
    local = {slot: i for i, slot in enumerate(s.slots)}
    elems = [[local[g.images[slot]] for slot in s.slots] for g in group.elements]
    best: list = [None, None]

    def visit(colors: Coloring, stab: list[list[int]]) -> None:
        cell = _target_cell(colors)
        if cell is None:
            order = sorted(range(s.m), key=lambda v: colors[v])
            rank = [0] * s.m
            for r, v in enumerate(order):
                rank[v] = r
            form = tuple(sorted(sum(1 << rank[u] for u in fv) for fv in s.facets))
            if best[0] is None or form < best[0]:
                best[0] = form
                best[1] = rank
            return
        reached: set[int] = set()
        for w in cell:
            if w in reached:
                continue
            reached.update(g[w] for g in stab)
            reached.add(w)
            child = _refine((s,), [_individualize(colors, w)])[0]
            visit(child, [g for g in stab if g[w] == w])

    visit(start, elems)
    rank = best[1]
    images = [-1] * K.n
    for v, slot in enumerate(s.slots):
        images[slot] = rank[v]
    spare = iter(range(s.m, K.n))
    for i in range(K.n):
        if images[i] < 0:
            images[i] = next(spare)
    return Permutation(images), best[0]


def canonical_key(K: Complex, group: PermGroup | None = None) -> bytes:
    """Byte string equal for two complexes exactly when they are isomorphic."""
    _, form = canonical_labeling(K, group)
    return key_from_form(K, form)


def key_from_form(K: Complex, form: tuple[int, ...]) -> bytes:
    head = bytes([K.n, K.num_vertices])
    return head + b"".join(f.to_bytes(4, "little") for f in form)


# -------------------------------------------------------------- certificates


def codim2_degrees(K: Complex) -> Counter:
    """For a pure complex: how many codimension-two faces lie in s facets, per s."""
    d = K.dim
    if not K.is_pure or d < 1:
        raise ShapeMismatch("codimension-two degrees need a pure complex of dimension >= 1")
    degree: Counter = Counter()
    for f in K.facets:
        vs = list(bits(f))
        for a, b in combinations(vs, 2):
            degree[f ^ (1 << a) ^ (1 << b)] += 1
    return Counter(degree.values())


def m_distribution(K: Complex) -> tuple[int, ...]:
    """(m_3, ..., m_8): 6-faces of an 8-complex counted by facet degree."""
    if not K.is_pure or K.dim != 8:
        raise ShapeMismatch("m-distribution is defined for pure 8-dimensional complexes")
    dist = codim2_degrees(K)
    bad = sorted(s for s in dist if s < 3 or s > 8)
    if bad:
        raise DegreeOutOfRange(f"6-face degrees {bad} outside 3..8")
    return tuple(dist.get(s, 0) for s in range(3, 9))


def pack_certificate(m: Sequence[int]) -> int:
    """m4 + 2^12 m5 + 2^24 m6 + 2^36 m7 + 2^48 m8 from (m3, ..., m8)."""
    assert all(x < 4096 for x in m[1:5]), "certificate field overflow"
    return m[1] + (m[2] << 12) + (m[3] << 24) + (m[4] << 36) + (m[5] << 48)


def certificate(K: Complex) -> int:
    return pack_certificate(m_distribution(K))


def invariant_key(K: Complex) -> tuple:
    """Cheap isomorphism invariant used to bucket complexes."""
    s = _Structure(K)
    if K.is_pure and K.dim == 8:
        try:
            return ("cert", K.n, certificate(K))
        except DegreeOutOfRange:
            pass
    return ("inv", K.n, len(K.facets), tuple(sorted(s.invariant(v) for v in range(s.m))))


# ----------------------------------------------------------- grouping


@dataclass
class IsoClass:
    representative: int  # index into the input list
    members: list[int]


def group_by_isomorphism(complexes: Sequence[Complex]) -> list[IsoClass]:
    """Partition into isomorphism classes, in order of first occurrence."""
    classes: list[IsoClass] = []
    buckets: dict[tuple, list[IsoClass]] = defaultdict(list)
    for idx, K in enumerate(complexes):
        key = invariant_key(K)
        for cls in buckets[key]:
            if find_isomorphism(complexes[cls.representative], K) is not None:
                cls.members.append(idx)
                break
        else:
            cls = IsoClass(idx, [idx])
            buckets[key].append(cls)
            classes.append(cls)
    return classes


# ------------------------------------------------------ weak G-isomorphism


@dataclass(frozen=True)
class WeakIsomorphism:
    perm: Permutation
    phi: dict  # group element -> its conjugate by perm


def conjugation_map(f: Permutation, G: PermGroup) -> dict | None:
    """g -> f g f^-1 when this permutes G, else None."""
    finv = f.inverse()
    for g in G.generators:
        if f * g * finv not in G:
            return None
    return {g: f * g * finv for g in G.elements}


def _orbit_profile(K: Complex, G: PermGroup) -> Counter:
    out: Counter = Counter()
    for f in K.facets:
        orbit = frozenset(g.map_mask(f) for g in G.elements)
        out[len(orbit)] += 1
    return out


def find_weak_G_isomorphism(K1: Complex, K2: Complex, G: PermGroup,
                            sym1: PermGroup | None = None) -> WeakIsomorphism | None:
    """An isomorphism f: K1 -> K2 normalizing G, with phi(g) = f g f^-1.

    Every isomorphism is f0 composed with an automorphism of K1, so the
    candidates are enumerated from one isomorphism and Sym(K1).
    """
    if not is_invariant(K1, G) or not is_invariant(K2, G):
        raise NotInvariant("both complexes must be invariant under the group")
    if _orbit_profile(K1, G) != _orbit_profile(K2, G):
        return None
    f0 = find_isomorphism(K1, K2)
    if f0 is None:
        return None
    if sym1 is None:
        sym1 = symmetry_group(K1)
    for a in sym1.elements:
        f = f0 * a
        phi = conjugation_map(f, G)
        if phi is not None:
            return WeakIsomorphism(f, phi)
    return None
