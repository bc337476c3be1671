"""Independent reference computations used by several test modules."""
from itertools import combinations

from hp2kit.complex import from_facets, link


def dense_rank_mod_p(M, p):
    """Plain row reduction mod p, kept separate from the library code."""
    A = [[x % p for x in row] for row in M]
    rank, cols = 0, len(A[0]) if A else 0
    for c in range(cols):
        piv = next((r for r in range(rank, len(A)) if A[r][c]), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        inv = pow(A[rank][c], -1, p)
        A[rank] = [x * inv % p for x in A[rank]]
        for r in range(len(A)):
            if r != rank and A[r][c]:
                f = A[r][c]
                A[r] = [(x - f * y) % p for x, y in zip(A[r], A[rank])]
        rank += 1
    return rank


def oracle_triples(K):
    """Triples of disjoint h-simplices with link(Di) = bd(D(i+1)), straight from the definition."""
    h = K.dim // 2
    simplices = [sum(1 << v for v in c) for c in combinations(range(K.n), h + 1)]
    faces = K.faces

    def bd(D):
        return from_facets(K.n, [D ^ (1 << v) for v in range(K.n) if D >> v & 1])

    succ = {}
    for D in simplices:
        if D not in faces:
            continue
        L = link(K, D)
        E = L.vertex_mask  # the only candidate: bd(E) has exactly E's vertices
        if E.bit_count() == h + 1 and not D & E and L == bd(E):
            succ[D] = E
    out = set()
    for a, b in succ.items():
        c = succ.get(b)
        if c is not None and succ.get(c) == a and not (a & c) and a | b | c == K.vertex_mask:
            low = (a | b | c) & -(a | b | c)
            out.add(next(r for r in ((a, b, c), (b, c, a), (c, a, b)) if r[0] & low))
    return sorted(out)
