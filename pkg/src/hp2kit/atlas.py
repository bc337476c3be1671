"""Named complexes, group configurations, and the .dat / JSON formats."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from itertools import combinations, permutations
from typing import Iterable, Sequence

from .complex import Complex, boundary, from_facets, join, mask_of, vertices_of
from .errors import ParseError, UnknownEntry
from .symmetry import PermGroup, Permutation, group_from_generators, orbit_of_mask, parse_permutation

# --------------------------------------------------------------- complexes


def rp2_6() -> Complex:
    """Six-vertex real projective plane."""
    rows = ["123", "134", "145", "156", "126", "235", "346", "245", "356", "246"]
    return from_facets(6, [mask_of(int(c) for c in r) for r in rows])


def affine_slot(x: int, y: int) -> int:
    """0-based slot of the point (x, y) of the affine plane over F3."""
    return 3 * (y % 3) + (x % 3)


def affine_lines() -> tuple[list[int], list[int]]:
    """(special lines y = 0, 1, 2 in order, the nine other lines) as masks."""
    pts = [(x, y) for y in range(3) for x in range(3)]
    special = [sum(1 << affine_slot(x, t) for x in range(3)) for t in range(3)]
    others = set()
    for (x0, y0), (x1, y1) in combinations(pts, 2):
        dx, dy = x1 - x0, y1 - y0
        line = sum(1 << affine_slot(x0 + k * dx, y0 + k * dy) for k in range(3))
        if line not in special:
            others.add(line)
    return special, sorted(others)


def cp2_9() -> Complex:
    """Nine-vertex complex projective plane on the affine plane over F3."""
    special, others = affine_lines()
    facets = []
    for m1, m2 in combinations(others, 2):
        if m1 & m2:
            facets.append(m1 | m2)
    for t in range(3):
        nxt = special[(t + 1) % 3]
        for v in vertices_of(nxt, one_based=False):
            facets.append(special[t] | (nxt ^ (1 << v)))
    return from_facets(9, facets)


C5_ON_10 = "(1 2 3 4 5)(6 7 8 9 10)"

_TABLE_ORBITS = {
    "L1": ["1236", "1246", "1346", "2346"],
    "L2": ["1267", "2367", "3467", "4567", "1567"],
    "L3": ["1367", "3567", "2567", "2467", "1467"],
    "L4": ["1267", "2367", "1367", "1356", "2356"],
    "L5": ["1267", "2367", "3467", "1467", "1346", "1356"],
    "L6": ["1267", "2367", "3467", "1467", "1456", "3456"],
    "L7": ["1367", "2367", "2467", "1467", "1246", "2356"],
    "L8": ["1267", "2367", "1367", "2368", "3568", "2568"],
    "L9": ["1267", "2367", "3467", "1467", "1368", "3568", "1568"],
    "M1": ["1236", "1256", "1367", "2368", "1679", "3679"],
    # the printed row ends with 3679, 5679, which leaves ridges of degree 1 and 4;
    # 1689, 168(10) is the only two-representative change giving a 3-sphere
    "M2": ["1236", "1256", "2467", "2368", "2468", "1689", "168X"],
    "M3": ["1236", "1256", "1367", "1567", "4568", "4678", "5678"],
    "M4": ["1236", "1456", "1267", "1368", "4568", "1679", "2679"],
    "L1star": ["1267", "2467", "3467", "1367", "1256", "2346"],
    "L2star": ["1267", "2467", "3467", "1367", "2368", "3468", "2468"],
}

PRINTED_M2 = ["1236", "1256", "2467", "2368", "2468", "3679", "5679"]

TABLE_NAMES = tuple(_TABLE_ORBITS)


def _digits(row: str) -> list[int]:
    return [10 if c == "X" else int(c) for c in row]


def c5_on_10() -> PermGroup:
    return group_from_generators(10, [parse_permutation(C5_ON_10, 10)])


def close_under(G: PermGroup, masks: Iterable[int]) -> list[int]:
    out: set[int] = set()
    for m in masks:
        out.update(orbit_of_mask(G, m))
    return sorted(out)


def table_sphere(name: str) -> Complex:
    """C5-closure of the listed orbit representatives on ten vertices."""
    key = name.replace("*", "star")
    if key not in _TABLE_ORBITS:
        raise UnknownEntry(f"no tabulated complex named {name!r}")
    reps = [mask_of(_digits(r)) for r in _TABLE_ORBITS[key]]
    return from_facets(10, close_under(c5_on_10(), reps))


# ------------------------------------------------------------------ groups

FIFTEEN = 15


def _double_transpositions() -> list[tuple[int, ...]]:
    """The 15 involutions of A5 as image tuples on {0..4}, in a fixed order."""
    out = []
    for a, b, c, d in permutations(range(5), 4):
        if a < b and c < d and a < c:
            img = list(range(5))
            img[a], img[b], img[c], img[d] = b, a, d, c
            out.append(tuple(img))
    return sorted(set(out), key=lambda p: [(i, p[i]) for i in range(5) if p[i] != i])


def _conjugation_action(gens5: Sequence[tuple[int, ...]]) -> list[Permutation]:
    invs = _double_transpositions()
    index = {p: i for i, p in enumerate(invs)}
    out = []
    for g in gens5:
        ginv = [0] * 5
        for i, j in enumerate(g):
            ginv[j] = i
        images = []
        for p in invs:
            conj = tuple(g[p[ginv[i]]] for i in range(5))
            images.append(index[conj])
        out.append(Permutation(images))
    return out


def a5_transitive() -> PermGroup:
    """A5 acting on its 15 involutions by conjugation (transitive on 15)."""
    five_cycle = (1, 2, 3, 4, 0)
    three_cycle = (1, 2, 0, 3, 4)
    return group_from_generators(FIFTEEN, _conjugation_action([five_cycle, three_cycle]))


def a4_in_a5() -> PermGroup:
    """Point stabilizer of A5 in the same action: orbits of lengths 12 and 3."""
    three_cycle = (1, 2, 0, 3, 4)
    double = (1, 0, 3, 2, 4)
    return group_from_generators(FIFTEEN, _conjugation_action([three_cycle, double]))


def c6xc2_12_3() -> PermGroup:
    """C6 x C2 acting regularly on 1..12 and through its C3 quotient on 13..15."""
    def point(a: int, b: int) -> int:
        return 2 * (a % 6) + (b % 2)

    x = [0] * FIFTEEN
    y = [0] * FIFTEEN
    for a in range(6):
        for b in range(2):
            x[point(a, b)] = point(a + 1, b)
            y[point(a, b)] = point(a, b + 1)
    for r in range(3):
        x[12 + r] = 12 + (r + 1) % 3
        y[12 + r] = 12 + r
    return group_from_generators(FIFTEEN, [Permutation(x), Permutation(y)])


def _group(*cycles: str) -> PermGroup:
    return group_from_generators(FIFTEEN, [parse_permutation(c, FIFTEEN) for c in cycles])


S3_GENS = ("(1 2 3)(4 5 6)(7 8 9)(10 11 12)(13 14 15)", "(1 4)(2 6)(3 5)(7 8)(10 11)(13 14)")
C6_GEN = "(1 2 3 4 5 6)(7 8 9 10 11 12)(13 14 15)"
C2XC2_GENS = ("(1 2)(3 4)(5 6)(7 8)(9 10)(11 12)", "(1 3)(2 4)(5 7)(6 8)(9 11)(10 12)")
C5_FIXED5_GEN = "(1 2 3 4 5)(6 7 8 9 10)"
C7_GEN = "(1 2 3 4 5 6 7)(8 9 10 11 12 13 14)"
C5_FREE_GEN = "(1 2 3 4 5)(6 7 8 9 10)(11 12 13 14 15)"

_S3_FACETS = [
    range(1, 10),
    [1, 2, 3, 4, 5, 6, 10, 11, 12],
    [1, 2, 3, 7, 8, 9, 10, 11, 12],
    range(4, 13),
]
_C6_FACETS = [
    [1, 2, 3, 4, 5, 6, 7, 9, 11], [1, 2, 3, 4, 5, 6, 8, 10, 12],
    [1, 3, 5, 7, 8, 9, 10, 11, 12], [2, 4, 6, 7, 8, 9, 10, 11, 12],
    [1, 2, 4, 5, 7, 8, 10, 11, 13], [2, 3, 5, 6, 8, 9, 11, 12, 13],
    [1, 2, 3, 4, 5, 6, 8, 11, 13], [1, 2, 3, 4, 5, 6, 9, 12, 13],
    [2, 5, 7, 8, 9, 10, 11, 12, 13], [3, 6, 7, 8, 9, 10, 11, 12, 13],
]
_C2XC2_FACETS = [
    [1, 2, 3, 4, 5, 6, 7, 8, 15], [1, 2, 3, 4, 5, 6, 7, 8, 13],
    [5, 6, 7, 8, 9, 10, 11, 12, 13], [5, 6, 7, 8, 9, 10, 11, 12, 14],
    [1, 2, 3, 4, 9, 10, 11, 12, 14], [1, 2, 3, 4, 9, 10, 11, 12, 15],
    [1, 2, 3, 4, 5, 6, 9, 10, 14], [1, 2, 3, 4, 5, 6, 9, 10, 15],
    [1, 2, 5, 6, 7, 8, 9, 10, 15], [1, 2, 5, 6, 7, 8, 9, 10, 13],
    [1, 2, 5, 6, 9, 10, 11, 12, 13], [1, 2, 5, 6, 9, 10, 11, 12, 14],
]


def cyclic_triple_subcomplex(n: int, d1: int, d2: int, d3: int) -> list[int]:
    """Facets of (D1 * bd D2) + (D2 * bd D3) + (D3 * bd D1)."""
    out: list[int] = []
    for a, b in ((d1, d2), (d2, d3), (d3, d1)):
        out.extend(join(from_facets(n, [a]), boundary(n, b)).facets)
    return sorted(out)


MANDATORY_CASES = ("S3", "C6", "C2xC2", "C5_fixed5")


def mandatory_subcomplex(case: str) -> tuple[PermGroup, list[int]]:
    """Group and forced facets of one of the mandatory-subcomplex runs."""
    if case == "S3":
        return _group(*S3_GENS), [mask_of(f) for f in _S3_FACETS]
    if case == "C6":
        return _group(C6_GEN), [mask_of(f) for f in _C6_FACETS]
    if case == "C2xC2":
        return _group(*C2XC2_GENS), [mask_of(f) for f in _C2XC2_FACETS]
    if case == "C5_fixed5":
        d1, d2, d3 = mask_of(range(1, 6)), mask_of(range(6, 11)), mask_of(range(11, 16))
        facets = cyclic_triple_subcomplex(FIFTEEN, d1, d2, d3)
        facets.append(mask_of([1, 2, 3, 4, 6, 7, 8, 9, 11]))
        return _group(C5_FIXED5_GEN), facets
    raise UnknownEntry(f"no mandatory configuration named {case!r}")


NAMED_GROUPS = {
    "A5": a5_transitive,
    "A4": a4_in_a5,
    "C6xC2": c6xc2_12_3,
    "C7": lambda: _group(C7_GEN),
    "C5": lambda: _group(C5_FREE_GEN),
    "S3": lambda: _group(*S3_GENS),
    "C6": lambda: _group(C6_GEN),
    "C2xC2": lambda: _group(*C2XC2_GENS),
    "C5_fixed5": lambda: _group(C5_FIXED5_GEN),
    "C5_on_10": c5_on_10,
}


def named_group(name: str) -> PermGroup:
    try:
        return NAMED_GROUPS[name]()
    except KeyError:
        raise UnknownEntry(f"no named group {name!r}") from None


# ----------------------------------------------------------------- registry


@dataclass(frozen=True)
class AtlasEntry:
    name: str
    complex: Complex
    provenance: str


_DESCRIPTIONS = {
    "rp2_6": "antipodal quotient of the icosahedron boundary",
    "cp2_9": "nine-vertex complex projective plane, vertices = affine plane over F3 (slot 3y+x+1)",
    "hp2_a5": "first solution of the 15-vertex search under the transitive A5 (N=490, star on)",
    "hp2_c6xc2": "first solution of the 15-vertex search under C6xC2 with orbits 12+3 (N=490, star on)",
}
for _name in TABLE_NAMES:
    _DESCRIPTIONS[_name] = f"C5-closure of the orbit representatives listed for {_name}"

HP2_SEEDS = {"hp2_a5": "A5", "hp2_c6xc2": "C6xC2"}
ATLAS_NAMES = ("rp2_6", "cp2_9") + TABLE_NAMES + tuple(HP2_SEEDS)
_DATA = Path(__file__).parent / "data"


def hp2_seed(name: str, use_cache: bool = True) -> Complex:
    """A 15-vertex solution with the given symmetry, as frozen package data.

    The data files hold the first solution emitted by the search; when a
    file is missing (or ``use_cache`` is false) the search is rerun.
    """
    if name not in HP2_SEEDS:
        raise UnknownEntry(f"no seed named {name!r}")
    path = _DATA / f"{name}.dat"
    if use_cache and path.exists():
        return load_dat(path.read_text())[0]
    from .search import SearchProblem, enumerate_solutions

    found: list[Complex] = []

    def keep_first(K: Complex) -> None:
        if not found:
            found.append(K)

    enumerate_solutions(SearchProblem(8, FIFTEEN, 490, named_group(HP2_SEEDS[name])), keep_first)
    return found[0]


def atlas_entry(name: str) -> AtlasEntry:
    key = name.replace("*", "star")
    if key == "rp2_6":
        K = rp2_6()
    elif key == "cp2_9":
        K = cp2_9()
    elif key in HP2_SEEDS:
        K = hp2_seed(key)
    else:
        K = table_sphere(key)
    return AtlasEntry(key, K, _DESCRIPTIONS[key])


# --------------------------------------------------------------- .dat files


def _complex_from_rows(rows: list[tuple[int, str]], n: int | None) -> Complex:
    width = n if n is not None else len(rows[0][1])
    masks = []
    for lineno, row in rows:
        if len(row) != width:
            raise ParseError(f"row has {len(row)} digits, expected {width}", lineno)
        if not 1 <= width <= 32:
            raise ParseError(f"row length {width} outside 1..32", lineno)
        mask = 0
        for i, ch in enumerate(row):
            if ch == "1":
                mask |= 1 << i
            elif ch != "0":
                raise ParseError(f"unexpected character {ch!r}", lineno)
        masks.append(mask)
    return from_facets(width, masks)


def load_dat(text: str) -> list[Complex]:
    """Parse complexes written one facet per line as 0/1 rows.

    Blank lines separate complexes.  A line ``n=<k>`` fixes the row length
    for the complexes that follow; ``#`` starts a comment line.
    """
    out: list[Complex] = []
    rows: list[tuple[int, str]] = []
    n: int | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#"):
            continue
        if not line:
            if rows:
                out.append(_complex_from_rows(rows, n))
                rows = []
            continue
        if line.lower().startswith("n="):
            if rows:
                out.append(_complex_from_rows(rows, n))
                rows = []
            try:
                n = int(line[2:])
            except ValueError:
                raise ParseError(f"bad header {line!r}", lineno) from None
            if not 1 <= n <= 32:
                raise ParseError(f"vertex count {n} outside 1..32", lineno)
            continue
        rows.append((lineno, line))
    if rows:
        out.append(_complex_from_rows(rows, n))
    return out


def facet_row(mask: int, n: int) -> str:
    return "".join("1" if mask >> i & 1 else "0" for i in range(n))


def save_dat(complexes: Sequence[Complex]) -> str:
    blocks = []
    for K in complexes:
        blocks.append("\n".join(facet_row(f, K.n) for f in K.facets))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def to_json(complexes: Sequence[Complex]) -> dict:
    return {"complexes": [{"n": K.n, "facets": [vertices_of(f) for f in K.facets]} for K in complexes]}


def from_json(data: dict | str) -> list[Complex]:
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ParseError(str(exc), exc.lineno) from None
    try:
        return [from_facets(int(c["n"]), [mask_of(f) for f in c["facets"]]) for c in data["complexes"]]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed complex record: {exc}") from None
