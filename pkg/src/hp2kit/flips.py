"""Triple flips, flip graphs and certificate random walks.

A distinguished triple (D1, D2, D3) of a pure d-complex on 3(d/2 + 1)
vertices consists of three disjoint (d/2)-simplices with
link(Di) = boundary(D(i+1)) cyclically.  Its subcomplex is the union of
the joins Di * boundary(D(i+1)); the flip swaps it for the union of
boundary(Di) * D(i+1).  After the flip (D1, D3, D2) is distinguished and
flipping it restores the original complex.
"""
from __future__ import annotations

import hashlib
import json
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from .complex import Complex, bits, f_vector
from .errors import NotAdmissible, NotDistinguished, NotInvariant, ShapeMismatch
from .iso import canonical_labeling, certificate, key_from_form, find_weak_G_isomorphism, symmetry_group
from .symmetry import Permutation, PermGroup, describe_group, is_invariant

Triple = tuple[int, int, int]


# ------------------------------------------------------------ triples


def _canonical_rotation(a: int, b: int, c: int) -> Triple:
    low = (a | b | c) & -(a | b | c)
    if b & low:
        return (b, c, a)
    if c & low:
        return (c, a, b)
    return (a, b, c)


def _shape(K: Complex) -> int:
    """Half-dimension h for a complex of the right shape."""
    d = K.dim
    if d < 0 or d % 2 or not K.is_pure or K.num_vertices != 3 * (d // 2 + 1):
        raise ShapeMismatch(f"need a pure even-dimensional complex on 3(d/2+1) vertices, "
                            f"got dim {d} with {K.num_vertices} vertices")
    return d // 2


def _successors(K: Complex, h: int) -> dict[int, int]:
    """Map D -> D' for every h-simplex D with link(D) = boundary(D')."""
    containing: dict[int, list[int]] = defaultdict(list)
    size = h + 1
    for f in K.facets:
        verts = list(bits(f))
        _subsets(verts, size, f, containing)
    out = {}
    for D, facets in containing.items():
        if len(facets) != size:
            continue
        union = 0
        for f in facets:
            union |= f
        rest = union ^ D
        if rest.bit_count() == size:
            out[D] = rest
    return out


def _subsets(verts: list[int], k: int, f: int, into: dict[int, list[int]]) -> None:
    for combo in combinations(verts, k):
        m = 0
        for v in combo:
            m |= 1 << v
        into[m].append(f)


def distinguished_triples(K: Complex) -> list[Triple]:
    """All distinguished triples, each once, in canonical rotation, sorted."""
    h = _shape(K)
    succ = _successors(K, h)
    vm = K.vertex_mask
    out = set()
    for a, b in succ.items():
        c = succ.get(b)
        if c is None or succ.get(c) != a:
            continue
        if a | b | c != vm or a & b or b & c or a & c:
            continue
        out.add(_canonical_rotation(a, b, c))
    return sorted(out)


def inverse_triple(t: Triple) -> Triple:
    return _canonical_rotation(t[0], t[2], t[1])


def triple_subcomplex(t: Triple) -> list[int]:
    """Facets of D1*bd(D2) + D2*bd(D3) + D3*bd(D1)."""
    out = []
    for i in range(3):
        a, b = t[i], t[(i + 1) % 3]
        for v in bits(b):
            out.append(a | (b ^ (1 << v)))
    return sorted(out)


def map_triple(g: Permutation, t: Triple) -> Triple:
    f = g.map_mask
    return _canonical_rotation(f(t[0]), f(t[1]), f(t[2]))


def is_distinguished(K: Complex, t: Triple) -> bool:
    try:
        h = _shape(K)
    except ShapeMismatch:
        return False
    if any(x.bit_count() != h + 1 for x in t) or t[0] | t[1] | t[2] != K.vertex_mask:
        return False
    facets = set(K.facets)
    if not all(f in facets for f in triple_subcomplex(t)):
        return False
    # the subcomplex must be the whole star of each Di
    for i in range(3):
        if sum(1 for f in K.facets if f & t[i] == t[i]) != h + 1:
            return False
    return True


def _flip_facets(facets: Iterable[int], t: Triple) -> set[int]:
    out = set(facets)
    old = triple_subcomplex(t)
    new = triple_subcomplex(inverse_triple(t))
    for f in old:
        out.discard(f)
    for f in new:
        if f in out:
            raise NotDistinguished("flip would create a facet that is already present")
        out.add(f)
    return out


def apply_triple_flip(K: Complex, t: Triple) -> Complex:
    if not is_distinguished(K, t):
        raise NotDistinguished(f"{t} is not a distinguished triple of the complex")
    out = Complex(K.n, tuple(sorted(_flip_facets(K.facets, t))))
    assert f_vector(out) == f_vector(K), "triple flip changed the f-vector"
    return out


# ------------------------------------------------------------ orbits


def triple_orbits(triples: Sequence[Triple], group: PermGroup) -> list[tuple[Triple, ...]]:
    """Orbits of ``group`` on a set of triples, sorted, ordered by first member."""
    index = set(triples)
    seen: set[Triple] = set()
    out = []
    for t in sorted(triples):
        if t in seen:
            continue
        orbit = {map_triple(g, t) for g in group.elements}
        assert orbit <= index, "group does not preserve the triples"
        seen |= orbit
        out.append(tuple(sorted(orbit)))
    return out


@dataclass(frozen=True)
class TripleOrbit:
    members: tuple[Triple, ...]
    admissible: bool


def admissible_orbits(K: Complex, G: PermGroup) -> list[TripleOrbit]:
    """G-orbits of distinguished subcomplexes with their admissibility.

    An orbit is admissible when distinct members share no facet.
    """
    out = []
    for orbit in triple_orbits(distinguished_triples(K), G):
        seen: set[int] = set()
        ok = True
        for t in orbit:
            sub = triple_subcomplex(t)
            if seen.intersection(sub):
                ok = False
                break
            seen.update(sub)
        out.append(TripleOrbit(orbit, ok))
    return out


def apply_equivariant_flip(K: Complex, G: PermGroup, orbit: TripleOrbit | Sequence[Triple]) -> Complex:
    members = orbit.members if isinstance(orbit, TripleOrbit) else tuple(orbit)
    if isinstance(orbit, TripleOrbit) and not orbit.admissible:
        raise NotAdmissible("orbit members share facets")
    used: set[int] = set()
    for t in members:
        if not is_distinguished(K, t):
            raise NotDistinguished(f"{t} is not a distinguished triple of the complex")
        sub = triple_subcomplex(t)
        if used.intersection(sub):
            raise NotAdmissible("orbit members share facets")
        used.update(sub)
    facets = set(K.facets)
    for t in members:
        facets = _flip_facets(facets, t)
    out = Complex(K.n, tuple(sorted(facets)))
    backwards = set(K.facets)
    for t in reversed(members):
        backwards = _flip_facets(backwards, t)
    assert backwards == facets, "member flips do not commute"
    assert f_vector(out) == f_vector(K), "equivariant flip changed the f-vector"
    assert is_invariant(out, G), "equivariant flip broke invariance"
    return out


# ------------------------------------------------------------ flip graphs


@dataclass
class FlipNode:
    key: bytes
    complex: Complex
    sym_order: int
    group: str
    certificate: int | None
    label: str = ""
    half_edges: int = 0


@dataclass
class FlipGraph:
    nodes: list[FlipNode] = field(default_factory=list)
    edges: dict[tuple[int, int], int] = field(default_factory=dict)
    loops: dict[int, dict[str, int]] = field(default_factory=dict)
    truncated: bool = False
    group: str | None = None  # set for equivariant graphs

    def degree(self, i: int) -> int:
        deg = sum(m for (a, b), m in self.edges.items() for x in (a, b) if x == i)
        lp = self.loops.get(i, {})
        return deg + lp.get("self_inverse", 0) + 2 * lp.get("non_self_inverse", 0)

    @property
    def edge_count(self) -> int:
        return sum(self.edges.values())

    @property
    def loop_count(self) -> int:
        return sum(sum(v.values()) for v in self.loops.values())

    def census(self) -> dict[str, int]:
        out: dict[str, int] = defaultdict(int)
        for node in self.nodes:
            out[node.group] += 1
        return dict(out)

    def to_json(self) -> dict:
        return {
            "group": self.group,
            "truncated": self.truncated,
            "nodes": [{
                "id": i, "label": nd.label, "symmetry": nd.group, "sym_order": nd.sym_order,
                "certificate": nd.certificate, "key": nd.key.hex(), "degree": self.degree(i),
                "facets": [[v + 1 for v in bits(f)] for f in nd.complex.facets],
            } for i, nd in enumerate(self.nodes)],
            "edges": [{"a": a, "b": b, "multiplicity": m} for (a, b), m in sorted(self.edges.items())],
            "loops": [{"node": i, **v} for i, v in sorted(self.loops.items())],
        }

    def to_dot(self) -> str:
        lines = ["graph flips {"]
        for i, nd in enumerate(self.nodes):
            lines.append(f'  n{i} [label="{nd.label}"];')
        for (a, b), m in sorted(self.edges.items()):
            for _ in range(m):
                lines.append(f"  n{a} -- n{b};")
        for i, v in sorted(self.loops.items()):
            for _ in range(v.get("non_self_inverse", 0)):
                lines.append(f"  n{i} -- n{i};")
            for _ in range(v.get("self_inverse", 0)):
                lines.append(f"  n{i} -- n{i} [style=dashed];")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _certificate_or_none(K: Complex) -> int | None:
    return certificate(K) if K.dim == 8 and K.is_pure else None


@dataclass
class _Info:
    sym: PermGroup
    canon: Permutation
    orbits: list[tuple[Triple, ...]]
    orbit_of: dict


def _analyze(K: Complex) -> tuple[bytes, _Info]:
    sym = symmetry_group(K)
    perm, form = canonical_labeling(K, sym)
    key = key_from_form(K, form)
    orbits = triple_orbits(distinguished_triples(K), sym)
    orbit_of = {t: i for i, o in enumerate(orbits) for t in o}
    return key, _Info(sym, perm, orbits, orbit_of)


def _label_nodes(graph: FlipGraph) -> None:
    counts: dict[str, int] = defaultdict(int)
    for nd in graph.nodes:
        counts[nd.group] += 1
        nd.label = f"{nd.group},{counts[nd.group]}"


def _flip_job(args: tuple[Complex, Triple]) -> tuple[Complex, bytes, _Info]:
    K, t = args
    K2 = apply_triple_flip(K, t)
    key, info = _analyze(K2)
    return K2, key, info


def flip_graph_component(seed: Complex, max_nodes: int = 10_000, threads: int = 1) -> FlipGraph:
    """Connected component of ``seed`` in the graph of triple flips.

    Nodes are isomorphism classes.  A half-edge is a Sym(K)-orbit of
    distinguished triples; two half-edges are joined when flipping one
    gives the other's complex and the reverse flip lands in the other
    orbit.  Expansion is breadth-first by frontier; a frontier's flips may
    be computed in a process pool and are merged in a fixed order.
    """
    _shape(seed)
    graph = FlipGraph()
    key0, info0 = _analyze(seed)
    infos: list[_Info] = [info0]
    registry: dict[int | None, dict[bytes, int]] = defaultdict(dict)

    def add_node(K: Complex, key: bytes, info: _Info) -> int:
        cert = _certificate_or_none(K)
        graph.nodes.append(FlipNode(key, K, info.sym.order, describe_group(info.sym), cert,
                                    half_edges=len(info.orbits)))
        if len(infos) < len(graph.nodes):
            infos.append(info)
        registry[cert][key] = len(graph.nodes) - 1
        return len(graph.nodes) - 1

    add_node(seed, key0, info0)
    partner: dict[tuple[int, int], tuple[int, int]] = {}
    frontier = [0]
    pool = None
    if threads > 1:
        import multiprocessing as mp
        pool = mp.get_context("fork").Pool(threads)
    try:
        while frontier:
            jobs = []
            for i in frontier:
                for a, orbit in enumerate(infos[i].orbits):
                    if (i, a) not in partner:
                        jobs.append((i, a, orbit[0]))
            args = [(graph.nodes[i].complex, t) for i, _, t in jobs]
            results = pool.map(_flip_job, args) if pool and len(args) > 1 else map(_flip_job, args)
            nxt = []
            for (i, a, t), (K2, key, info) in zip(jobs, results):
                if (i, a) in partner:
                    continue
                cert = _certificate_or_none(K2)
                j = registry[cert].get(key)
                if j is None:
                    if len(graph.nodes) >= max_nodes:
                        graph.truncated = True
                        continue
                    j = add_node(K2, key, info)
                    nxt.append(j)
                    phi = Permutation.identity(K2.n)
                else:
                    phi = infos[j].canon.inverse() * info.canon
                back = map_triple(phi, inverse_triple(t))
                b = infos[j].orbit_of[back]
                partner[(i, a)] = (j, b)
                partner[(j, b)] = (i, a)
            frontier = nxt
    finally:
        if pool:
            pool.close()
            pool.join()
    _collect_edges(graph, partner)
    _label_nodes(graph)
    return graph


def _collect_edges(graph: FlipGraph, partner: dict[tuple[int, int], tuple[int, int]]) -> None:
    done = set()
    for (i, a), (j, b) in sorted(partner.items()):
        if (i, a) in done:
            continue
        done.add((i, a))
        done.add((j, b))
        if i == j:
            kind = "self_inverse" if a == b else "non_self_inverse"
            slot = graph.loops.setdefault(i, {"self_inverse": 0, "non_self_inverse": 0})
            slot[kind] += 1
        else:
            e = (min(i, j), max(i, j))
            graph.edges[e] = graph.edges.get(e, 0) + 1


def normalizer_in(sym: PermGroup, G: PermGroup) -> list[Permutation]:
    """Elements s of ``sym`` with s G s^-1 = G."""
    out = []
    for s in sym.elements:
        sinv = s.inverse()
        if all(s * g * sinv in G for g in G.generators):
            out.append(s)
    return out


@dataclass
class _EqInfo:
    sym: PermGroup
    orbits: list[TripleOrbit]          # admissible G-orbits only
    half_edge_of: dict                 # frozenset(members) -> half-edge index
    half_edges: list[int]              # representative orbit index per half-edge


def _eq_analyze(K: Complex, G: PermGroup) -> _EqInfo:
    sym = symmetry_group(K)
    norm = normalizer_in(sym, G)
    orbits = [o for o in admissible_orbits(K, G) if o.admissible]
    half_edge_of: dict = {}
    reps = []
    for idx, o in enumerate(orbits):
        key = frozenset(o.members)
        if key in half_edge_of:
            continue
        h = len(reps)
        reps.append(idx)
        for s in norm:
            half_edge_of[frozenset(map_triple(s, t) for t in o.members)] = h
    return _EqInfo(sym, orbits, half_edge_of, reps)


def equivariant_component(seed: Complex, G: PermGroup, max_nodes: int = 1_000) -> FlipGraph:
    """Component of ``seed`` in the graph of equivariant flips.

    Nodes are weak G-isomorphism classes of G-invariant complexes; moves
    are simultaneous flips along admissible G-orbits, taken up to the
    normalizer of G in Sym(K).
    """
    _shape(seed)
    if not is_invariant(seed, G):
        raise NotInvariant("seed is not invariant under the group")
    graph = FlipGraph(group=describe_group(G))
    infos: list[_EqInfo] = []
    keys: list[bytes] = []

    def add_node(K: Complex, info: _EqInfo, key: bytes) -> int:
        graph.nodes.append(FlipNode(key, K, info.sym.order, describe_group(info.sym),
                                    _certificate_or_none(K), half_edges=len(info.half_edges)))
        infos.append(info)
        keys.append(key)
        return len(graph.nodes) - 1

    key0 = _analyze(seed)[0]
    add_node(seed, _eq_analyze(seed, G), key0)
    partner: dict[tuple[int, int], tuple[int, int]] = {}
    queue = [0]
    while queue:
        i = queue.pop(0)
        K = graph.nodes[i].complex
        for a, idx in enumerate(infos[i].half_edges):
            if (i, a) in partner:
                continue
            orbit = infos[i].orbits[idx]
            K2 = apply_equivariant_flip(K, G, orbit)
            key2, _ = _analyze(K2)
            match = None
            for j, key in enumerate(keys):
                if key != key2:
                    continue
                w = find_weak_G_isomorphism(K2, graph.nodes[j].complex, G)
                if w is not None:
                    match = (j, w.perm)
                    break
            if match is None:
                if len(graph.nodes) >= max_nodes:
                    graph.truncated = True
                    continue
                j = add_node(K2, _eq_analyze(K2, G), key2)
                queue.append(j)
                perm = Permutation.identity(K.n)
            else:
                j, perm = match
            back = frozenset(map_triple(perm, inverse_triple(t)) for t in orbit.members)
            b = infos[j].half_edge_of[back]
            partner[(i, a)] = (j, b)
            partner[(j, b)] = (i, a)
    _collect_edges(graph, partner)
    _label_nodes(graph)
    return graph


# ------------------------------------------------------------ random walk


MASK64 = (1 << 64) - 1


class SplitMix64:
    """splitmix64; used only to expand a user seed into generator state."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)


class XorShift64Star:
    """xorshift64* seeded through splitmix64; fully specified, portable."""

    def __init__(self, seed: int):
        s = SplitMix64(seed).next()
        self.state = s or 0x9E3779B97F4A7C15

    def next(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & MASK64

    def below(self, k: int) -> int:
        """Uniform integer in range(k) by rejection sampling."""
        if k <= 0:
            raise ValueError("empty range")
        limit = (1 << 64) - (1 << 64) % k
        while True:
            x = self.next()
            if x < limit:
                return x % k


@dataclass
class WalkStats:
    seed: int
    steps: int = 0
    halted_no_moves: bool = False
    certificates: dict[tuple[int, str], set[int]] = field(default_factory=dict)
    trace: list[int] = field(default_factory=list)

    def distinct(self) -> int:
        return len(set().union(*self.certificates.values())) if self.certificates else 0

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "steps": self.steps,
            "halted_no_moves": self.halted_no_moves,
            "distinct_certificates": self.distinct(),
            "by_symmetry": [{"order": o, "group": g, "count": len(c), "certificates": sorted(c)}
                            for (o, g), c in sorted(self.certificates.items(), key=lambda kv: (-kv[0][0], kv[0][1]))],
        }


def _walk_identity(K: Complex) -> int:
    cert = _certificate_or_none(K)
    if cert is not None:
        return cert
    _, form = canonical_labeling(K)
    digest = hashlib.sha256(b"".join(f.to_bytes(4, "little") for f in form)).digest()
    return int.from_bytes(digest[:8], "little")


def random_walk(seed: Complex, steps: int, rng_seed: int = 0, keep_trace: bool = False) -> WalkStats:
    """Walk by uniformly random triple flips, recording certificates.

    Symmetry orders are computed once per new certificate; the walk keeps
    only certificates, never the complexes themselves.
    """
    _shape(seed)
    rng = XorShift64Star(rng_seed)
    stats = WalkStats(rng_seed)
    sym_of: dict[int, tuple[int, str]] = {}

    def record(K: Complex) -> None:
        cert = _walk_identity(K)
        tag = sym_of.get(cert)
        if tag is None:
            G = symmetry_group(K)
            tag = (G.order, describe_group(G))
            sym_of[cert] = tag
        stats.certificates.setdefault(tag, set()).add(cert)
        if keep_trace:
            stats.trace.append(cert)

    K = seed
    record(K)
    for _ in range(steps):
        triples = distinguished_triples(K)
        if not triples:
            stats.halted_no_moves = True
            break
        K = apply_triple_flip(K, triples[rng.below(len(triples))])
        stats.steps += 1
        record(K)
    return stats


def walk_stats_json(stats: WalkStats) -> str:
    return json.dumps(stats.to_json(), indent=2)

