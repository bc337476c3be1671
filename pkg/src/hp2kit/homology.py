"""Simplicial homology over Z and F_p, manifold predicates, orientability."""
from __future__ import annotations

import enum
import random
from collections import defaultdict, deque
from dataclasses import dataclass
from math import gcd
from typing import Sequence

from .complex import Complex, bits, link, submasks
from .complex import is_strongly_connected, is_weak_pseudomanifold
from .errors import NotAPseudomanifold, Hp2Error

Z = 0  # coefficient tag for the integers; a prime p means F_p


def normalize_coeff(coeff: int | str) -> int:
    if isinstance(coeff, str):
        text = coeff.strip().upper()
        if text == "Z":
            return Z
        if text.startswith("F"):
            text = text[1:]
        coeff = int(text)
    if coeff != Z and (coeff < 2 or any(coeff % q == 0 for q in range(2, int(coeff**0.5) + 1))):
        raise Hp2Error(f"coefficient {coeff} is neither Z nor a prime")
    return coeff


@dataclass(frozen=True)
class HomologyProfile:
    betti: tuple[int, ...]
    torsion: tuple[tuple[int, ...], ...]
    coeff: int = Z

    def __str__(self) -> str:
        ring = "Z" if self.coeff == Z else f"F{self.coeff}"
        parts = []
        for k, (b, t) in enumerate(zip(self.betti, self.torsion)):
            terms = ([f"{ring}^{b}" if b > 1 else ring] if b else []) + [f"Z/{x}" for x in t]
            parts.append(f"H{k}=" + (" + ".join(terms) if terms else "0"))
        return ", ".join(parts)


def sphere_profile(d: int, coeff: int = Z) -> HomologyProfile:
    if d == 0:
        return HomologyProfile((2,), ((),), coeff)
    betti = [0] * (d + 1)
    betti[0] = betti[d] = 1
    return HomologyProfile(tuple(betti), ((),) * (d + 1), coeff)


# ---------------------------------------------------------------- matrices


def smith_normal_form(M: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Invariant factors d1 | d2 | ... | dr of an integer matrix.

    Exact integer elimination; each step pivots on the nonzero entry of
    least absolute value in the remaining block.
    """
    A = [list(map(int, row)) for row in M]
    rows = len(A)
    cols = len(A[0]) if rows else 0
    diag: list[int] = []
    t = 0
    while t < min(rows, cols):
        best = None
        for i in range(t, rows):
            row = A[i]
            for j in range(t, cols):
                v = row[j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        A[t], A[i] = A[i], A[t]
        for row in A:
            row[t], row[j] = row[j], row[t]
        while True:
            p = A[t][t]
            done = True
            for i in range(t + 1, rows):
                v = A[i][t]
                if v:
                    q = v // p
                    if q:
                        ri, rt = A[i], A[t]
                        for j in range(t, cols):
                            ri[j] -= q * rt[j]
                    if A[i][t]:
                        done = False
            for j in range(t + 1, cols):
                v = A[t][j]
                if v:
                    q = v // p
                    if q:
                        for row in A:
                            row[j] -= q * row[t]
                    if A[t][j]:
                        done = False
            if done:
                break
            # move the smallest remaining entry of row/column t into the pivot
            cand = [(abs(A[i][t]), i, t) for i in range(t, rows) if A[i][t]]
            cand += [(abs(A[t][j]), t, j) for j in range(t, cols) if A[t][j]]
            _, i, j = min(cand)
            A[t], A[i] = A[i], A[t]
            for row in A:
                row[t], row[j] = row[j], row[t]
        diag.append(abs(A[t][t]))
        t += 1
    return _divisibility_chain(diag)


def _divisibility_chain(diag: list[int]) -> tuple[int, ...]:
    d = sorted(x for x in diag if x)
    changed = True
    while changed:
        changed = False
        for i in range(len(d)):
            for j in range(i + 1, len(d)):
                if d[j] % d[i]:
                    g = gcd(d[i], d[j])
                    d[i], d[j] = g, d[i] * d[j] // g
                    changed = True
        d.sort()
    return tuple(d)


SparseColumns = list  # list of dict row -> nonzero integer value


def sparse_invariant_factors(columns: SparseColumns) -> tuple[int, ...]:
    """Invariant factors of a sparse integer matrix given by columns.

    Unit pivots are eliminated first (each contributes a factor 1 and the
    Schur complement keeps the remaining factors); whatever block is left
    is handed to :func:`smith_normal_form`.
    """
    rows: dict[int, dict[int, int]] = defaultdict(dict)
    col_rows: dict[int, set[int]] = {}
    for j, col in enumerate(columns):
        if col:
            col_rows[j] = set(col)
            for i, v in col.items():
                rows[i][j] = v
    ones = 0
    progress = True
    while progress:
        progress = False
        for j in sorted(col_rows, key=lambda c: len(col_rows[c])):
            members = col_rows.get(j)
            if not members:
                col_rows.pop(j, None)
                continue
            pivot = None
            for i in members:
                if abs(rows[i][j]) == 1 and (pivot is None or len(rows[i]) < len(rows[pivot])):
                    pivot = i
            if pivot is None:
                continue
            prow = rows.pop(pivot)
            pv = prow[j]
            for i in list(members):
                if i == pivot:
                    continue
                row = rows[i]
                factor = row[j] * pv
                for c, v in prow.items():
                    nv = row.get(c, 0) - factor * v
                    if nv:
                        if c not in row:
                            col_rows[c].add(i)
                        row[c] = nv
                    elif c in row:
                        del row[c]
                        col_rows[c].discard(i)
            for c in prow:
                col_rows[c].discard(pivot)
            del col_rows[j]
            ones += 1
            progress = True
    left_cols = sorted(c for c, m in col_rows.items() if m)
    left_rows = sorted({i for c in left_cols for i in col_rows[c]})
    rest: tuple[int, ...] = ()
    if left_cols:
        ridx = {r: k for k, r in enumerate(left_rows)}
        dense = [[0] * len(left_cols) for _ in left_rows]
        for jj, c in enumerate(left_cols):
            for i in col_rows[c]:
                dense[ridx[i]][jj] = rows[i][c]
        rest = smith_normal_form(dense)
    return (1,) * ones + rest


def rank_mod_p(columns: SparseColumns, p: int) -> int:
    if p == 2:
        return _rank_f2([sum(1 << i for i, v in col.items() if v % 2) for col in columns])
    pivots: dict[int, dict[int, int]] = {}
    rank = 0
    for col in columns:
        vec = {i: v % p for i, v in col.items() if v % p}
        while vec:
            lead = max(vec)
            piv = pivots.get(lead)
            if piv is None:
                inv = pow(vec[lead], -1, p)
                pivots[lead] = {i: v * inv % p for i, v in vec.items()}
                rank += 1
                break
            f = vec[lead]
            for i, v in piv.items():
                nv = (vec.get(i, 0) - f * v) % p
                if nv:
                    vec[i] = nv
                else:
                    vec.pop(i, None)
    return rank


def _rank_f2(columns: list[int]) -> int:
    """Rank over F2 of bit-packed columns."""
    pivots: dict[int, int] = {}
    rank = 0
    for c in columns:
        while c:
            top = c.bit_length() - 1
            piv = pivots.get(top)
            if piv is None:
                pivots[top] = c
                rank += 1
                break
            c ^= piv
    return rank


# ---------------------------------------------------------- chain complexes


def boundary_columns(K: Complex, k: int) -> tuple[SparseColumns, list[int], list[int]]:
    """Sparse matrix of the boundary map from k-faces to (k-1)-faces.

    Returns ``(columns, k_faces, km1_faces)``; bases are the faces in mask
    order and the i-th vertex (in increasing order) carries sign (-1)^i.
    """
    by_size = K.faces_by_size
    top = by_size[k + 1] if k + 1 < len(by_size) else []
    low = by_size[k] if k >= 0 else []
    if k == 0:
        return [{} for _ in top], top, low
    index = {s: i for i, s in enumerate(low)}
    cols = []
    for s in top:
        col = {}
        sign = 1
        for v in bits(s):
            col[index[s ^ (1 << v)]] = sign
            sign = -sign
        cols.append(col)
    return cols, top, low


def boundary_matrix(K: Complex, k: int) -> list[list[int]]:
    """Dense version of :func:`boundary_columns` (rows = (k-1)-faces)."""
    cols, top, low = boundary_columns(K, k)
    M = [[0] * len(top) for _ in low]
    for j, col in enumerate(cols):
        for i, v in col.items():
            M[i][j] = v
    return M


def check_boundary_squared(K: Complex, k: int) -> bool:
    """True when the composite boundary from (k+1)-faces to (k-1)-faces vanishes."""
    for s in K.faces_by_size[k + 2] if k + 2 < len(K.faces_by_size) else []:
        acc: dict[int, int] = defaultdict(int)
        sign = 1
        for v in bits(s):
            face = s ^ (1 << v)
            inner = 1
            for w in bits(face):
                acc[face ^ (1 << w)] += sign * inner
                inner = -inner
            sign = -sign
        if any(acc.values()):
            return False
    return True


def homology(K: Complex, coeff: int | str = Z) -> HomologyProfile:
    """Unreduced simplicial homology in dimensions 0..dim K."""
    coeff = normalize_coeff(coeff)
    d = K.dim
    if d < 0:
        return HomologyProfile((), (), coeff)
    f = [len(K.faces_by_size[k + 1]) for k in range(d + 1)]
    ranks = [0] * (d + 2)
    torsion: list[tuple[int, ...]] = [()] * (d + 1)
    for k in range(1, d + 1):
        cols, _, _ = boundary_columns(K, k)
        assert check_boundary_squared(K, k - 1), "boundary of boundary is nonzero"
        if coeff == Z:
            factors = sparse_invariant_factors(cols)
            ranks[k] = len(factors)
            torsion[k - 1] = tuple(x for x in factors if x > 1)
        else:
            ranks[k] = rank_mod_p(cols, coeff)
    betti = tuple(f[k] - ranks[k] - ranks[k + 1] for k in range(d + 1))
    return HomologyProfile(betti, tuple(torsion), coeff)


def euler_from_betti(profile: HomologyProfile) -> int:
    return sum((-1) ** k * b for k, b in enumerate(profile.betti))


# ----------------------------------------------------------- predicates


def _compress(L: Complex) -> tuple[int, ...]:
    """Facets of ``L`` with the occupied slots renumbered 0.. in order."""
    slots = list(bits(L.vertex_mask))
    if len(slots) == L.n or slots == list(range(len(slots))):
        return L.facets
    pos = {s: i for i, s in enumerate(slots)}
    out = []
    for f in L.facets:
        m = 0
        for v in bits(f):
            m |= 1 << pos[v]
        out.append(m)
    return tuple(sorted(out))


def _link_is_sphere(facets: tuple[int, ...], dim: int, coeff: int) -> bool:
    if dim == 0:
        return len(facets) == 2
    vmask = 0
    for f in facets:
        vmask |= f
    nv = vmask.bit_count()
    if dim == 1:
        # graph: sphere homology iff connected with as many edges as vertices
        if len(facets) != nv:
            return False
        adj: dict[int, list[int]] = defaultdict(list)
        for e in facets:
            a, b = bits(e)
            adj[a].append(b)
            adj[b].append(a)
        start = next(iter(adj))
        seen = {start}
        queue = [start]
        while queue:
            x = queue.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        return len(seen) == nv
    L = Complex(vmask.bit_length(), facets)
    return homology(L, coeff) == sphere_profile(dim, coeff)


def is_homology_manifold(K: Complex, d: int, coeff: int | str = Z) -> bool:
    """Pure of dimension d, every proper face link has sphere homology."""
    coeff = normalize_coeff(coeff)
    if not K.facets or any(f.bit_count() != d + 1 for f in K.facets):
        return False
    if d == 0:
        return True
    cache: dict[tuple[int, ...], bool] = {}
    # small links first: cheap failures surface early
    for size in range(d, 0, -1):
        for sigma in K.faces_by_size[size]:
            L = link(K, sigma)
            key = _compress(L)
            verdict = cache.get(key)
            if verdict is None:
                verdict = _link_is_sphere(key, d - size, coeff)
                cache[key] = verdict
            if not verdict:
                return False
    return True


def is_homology_sphere(K: Complex, d: int, coeff: int | str = Z) -> bool:
    coeff = normalize_coeff(coeff)
    if not is_homology_manifold(K, d, coeff):
        return False
    return homology(K, coeff) == sphere_profile(d, coeff)


def is_orientable(K: Complex, d: int) -> bool:
    """Consistent facet signs exist so that every ridge cancels."""
    if not is_weak_pseudomanifold(K, d) or not is_strongly_connected(K, d):
        raise NotAPseudomanifold("orientability needs a strongly connected weak pseudomanifold")
    facets = K.facets

    def induced(f: int, ridge: int) -> int:
        # sign of the face obtained by deleting the vertex at position i
        missing = f ^ ridge
        pos = (f & (missing - 1)).bit_count()
        return -1 if pos % 2 else 1

    by_ridge: dict[int, list[int]] = defaultdict(list)
    for idx, f in enumerate(facets):
        for v in bits(f):
            by_ridge[f ^ (1 << v)].append(idx)
    sign = [0] * len(facets)
    sign[0] = 1
    queue = deque([0])
    while queue:
        a = queue.popleft()
        fa = facets[a]
        for v in bits(fa):
            r = fa ^ (1 << v)
            for b in by_ridge[r]:
                if b == a:
                    continue
                want = -sign[a] * induced(fa, r) * induced(facets[b], r)
                if sign[b] == 0:
                    sign[b] = want
                    queue.append(b)
                elif sign[b] != want:
                    return False
    return True


# ------------------------------------------------------- bistellar moves


class SphereVerdict(enum.Enum):
    CERTIFIED = "certified"
    NOT_SPHERE = "not_sphere"
    UNKNOWN = "unknown"


def bistellar_moves(facets: set[int], d: int, include_vertex_insertion: bool = False) -> list[tuple[int, int]]:
    """All moves (A, B) with link(A) = boundary of B and B not a face.

    Applying (A, B) replaces the facets A + (B - b) by (A - a) + B.
    """
    star: dict[int, list[int]] = defaultdict(list)
    for f in facets:
        for s in submasks(f):
            if s:
                star[s].append(f)
    faces = star.keys()
    moves = []
    for A, members in star.items():
        a = A.bit_count()
        b = d + 2 - a
        if a == d + 1 and not include_vertex_insertion:
            continue
        if len(members) != b:
            continue
        B = 0
        for f in members:
            B |= f
        B ^= A
        if B.bit_count() != b or (b > 1 and B in faces):
            continue
        moves.append((A, B))
    moves.sort()
    return moves


def apply_bistellar(facets: set[int], A: int, B: int) -> set[int]:
    out = set(facets)
    for v in bits(B):
        out.discard(A | (B ^ (1 << v)))
    for v in bits(A):
        out.add((A ^ (1 << v)) | B)
    return out


def certify_sphere_bistellar(K: Complex, d: int, budget: int = 10000, seed: int = 0) -> SphereVerdict:
    """Try to reduce K to the boundary of a (d+1)-simplex by bistellar moves.

    Greedy on (facet count, ridge count) with random tie breaks and a
    bounded amount of neutral or uphill moves when stuck.  A certified
    answer is a proof; ``UNKNOWN`` means the budget ran out.
    """
    if not is_weak_pseudomanifold(K, d):
        raise NotAPseudomanifold("bistellar reduction needs a weak pseudomanifold")
    if homology(K) != sphere_profile(d):
        return SphereVerdict.NOT_SPHERE
    rng = random.Random(seed)
    facets = set(K.facets)
    best = len(facets)
    stuck = 0
    previous: frozenset[int] | None = None
    for _ in range(budget + 1):
        if len(facets) == d + 2:
            return SphereVerdict.CERTIFIED
        moves = bistellar_moves(facets, d)
        if not moves:
            return SphereVerdict.UNKNOWN
        change = {m: m[0].bit_count() - m[1].bit_count() for m in moves}
        downhill = [m for m in moves if change[m] < 0]
        if downhill and stuck < 1:
            steepest = min(change[m] for m in downhill)
            pool = [m for m in downhill if change[m] == steepest]
        else:
            pool = [m for m in moves if change[m] <= 0] or moves
            if stuck > 20:
                pool = moves
        A, B = rng.choice(pool)
        nxt = apply_bistellar(facets, A, B)
        if previous is not None and frozenset(nxt) == previous and len(pool) > 1:
            A, B = rng.choice(pool)
            nxt = apply_bistellar(facets, A, B)
        previous = frozenset(facets)
        facets = nxt
        if len(facets) < best:
            best = len(facets)
            stuck = 0
        else:
            stuck = stuck + 1 if stuck < 40 else 0
    return SphereVerdict.UNKNOWN
