"""Compiled depth-first search over orbit decisions.

A line-by-line port of the state machine in :mod:`hp2kit.search` onto flat
arrays, so that numba can compile it.  Both implementations visit the same
nodes in the same order; the tests compare them directly.
"""
from __future__ import annotations

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    njit = None

AVAILABLE = njit is not None


def _build():
    @njit(cache=True)
    def exclude(o, status, cand, deg, nf_av, size, N, optr, oidx, queue, qlen):
        st = status[o]
        if st != 0:
            return st == -1, qlen
        status[o] = -1
        nf_av[1] -= size[o]
        if nf_av[1] < N:
            return False, qlen
        for p in range(optr[o], optr[o + 1]):
            r = oidx[p]
            c = cand[r] - 1
            cand[r] = c
            if c <= 1 and deg[r] < 2:
                queue[qlen] = r
                qlen += 1
        return True, qlen

    @njit(cache=True)
    def include(o, status, cand, deg, nf_av, opn, olen, size, N, optr, oidx, omult, has2,
                cptr, cidx, queue, qlen):
        st = status[o]
        if st != 0:
            return st == 1, qlen, olen
        status[o] = 1
        nf_av[0] += size[o]
        for p in range(optr[o], optr[o + 1]):
            r = oidx[p]
            d = deg[r] + omult[p]
            if d > 2:
                return False, qlen, olen
            deg[r] = d
            c = cand[r] - 1
            cand[r] = c
            if d == 1:
                opn[olen] = r
                olen += 1
                if c <= 1 or has2[r]:
                    queue[qlen] = r
                    qlen += 1
            elif c != 0 and (d == 2 or c == 1):
                queue[qlen] = r
                qlen += 1
        for p in range(cptr[o], cptr[o + 1]):
            o2 = cidx[p]
            s2 = status[o2]
            if s2 == 1:
                return False, qlen, olen
            if s2 == 0:
                ok, qlen = exclude(o2, status, cand, deg, nf_av, size, N, optr, oidx, queue, qlen)
                if not ok:
                    return False, qlen, olen
        return True, qlen, olen

    @njit(cache=True)
    def propagate(status, cand, deg, nf_av, opn, olen, size, N, optr, oidx, omult, has2,
                  cptr, cidx, rptr, ridx, rmult, queue, qlen):
        while qlen > 0:
            qlen -= 1
            r = queue[qlen]
            d = deg[r]
            c = cand[r]
            if d == 2:
                if c != 0:
                    for p in range(rptr[r], rptr[r + 1]):
                        o = ridx[p]
                        if status[o] == 0:
                            ok, qlen = exclude(o, status, cand, deg, nf_av, size, N, optr, oidx, queue, qlen)
                            if not ok:
                                return False, olen
            elif d == 1:
                if c <= 1 or has2[r]:
                    usable = -1
                    count = 0
                    for p in range(rptr[r], rptr[r + 1]):
                        o = ridx[p]
                        if status[o] == 0:
                            if rmult[p] == 1:
                                usable = o
                                count += 1
                            else:
                                ok, qlen = exclude(o, status, cand, deg, nf_av, size, N, optr, oidx, queue, qlen)
                                if not ok:
                                    return False, olen
                    if count == 0:
                        return False, olen
                    if count == 1:
                        ok, qlen, olen = include(usable, status, cand, deg, nf_av, opn, olen, size, N, optr,
                                                 oidx, omult, has2, cptr, cidx, queue, qlen)
                        if not ok:
                            return False, olen
            elif c == 1:
                for p in range(rptr[r], rptr[r + 1]):
                    o = ridx[p]
                    if status[o] == 0:
                        if rmult[p] == 1:
                            ok, qlen = exclude(o, status, cand, deg, nf_av, size, N, optr, oidx, queue, qlen)
                            if not ok:
                                return False, olen
                        break
        return True, olen

    @njit(cache=True)
    def pick(deg, cand, opn, olen):
        """Compact the open list in place; return (ridge, new length)."""
        k = 0
        best = -1
        best_c = 1 << 30
        for i in range(olen):
            r = opn[i]
            if deg[r] == 1:
                opn[k] = r
                k += 1
                c = cand[r]
                if c < best_c or (c == best_c and r < best):
                    best = r
                    best_c = c
        return best, k

    @njit(cache=True)
    def copy_row(L, status, deg, cand, nfav, opn, olen):
        status[L + 1, :] = status[L, :]
        deg[L + 1, :] = deg[L, :]
        cand[L + 1, :] = cand[L, :]
        nfav[L + 1, :] = nfav[L, :]
        n = olen[L]
        opn[L + 1, :n] = opn[L, :n]
        olen[L + 1] = n

    @njit(cache=True)
    def decide(L, o, inc, status, deg, cand, nfav, opn, olen, size, N, optr, oidx, omult, has2,
               cptr, cidx, rptr, ridx, rmult, queue):
        st, dg, cd, na, op = status[L], deg[L], cand[L], nfav[L], opn[L]
        ol = olen[L]
        if inc:
            ok, q, ol = include(o, st, cd, dg, na, op, ol, size, N, optr, oidx, omult, has2, cptr, cidx, queue, 0)
        else:
            ok, q = exclude(o, st, cd, dg, na, size, N, optr, oidx, queue, 0)
        if ok:
            ok, ol = propagate(st, cd, dg, na, op, ol, size, N, optr, oidx, omult, has2, cptr, cidx,
                               rptr, ridx, rmult, queue, q)
        olen[L] = ol
        return ok

    @njit(cache=True)
    def search(status0, deg0, cand0, nfav0, opn0, olen0, size, N, minimal, optr, oidx, omult, has2,
               cptr, cidx, rptr, ridx, rmult, queue, max_solutions):
        n_orb = status0.shape[0]
        R = deg0.shape[0]
        depth = n_orb + 2
        status = np.zeros((depth, n_orb), np.int8)
        deg = np.zeros((depth, R), np.int8)
        cand = np.zeros((depth, R), np.int32)
        nfav = np.zeros((depth, 2), np.int64)
        opn = np.zeros((depth, R * 2 + 8), np.int32)
        olen = np.zeros(depth, np.int64)
        choices = np.zeros((depth, n_orb), np.int32)
        nch = np.zeros(depth, np.int64)
        ptr = np.zeros(depth, np.int64)
        pend = np.full(depth, -1, np.int64)
        status[0, :] = status0
        deg[0, :] = deg0
        cand[0, :] = cand0
        nfav[0, :] = nfav0
        opn[0, :olen0] = opn0[:olen0]
        olen[0] = olen0
        sols = np.zeros((max_solutions, n_orb), np.int8)
        nsol = 0
        nodes = 0
        hist = np.zeros(depth, np.int64)
        L = 0
        visiting = True
        while L >= 0:
            if visiting:
                visiting = False
                nodes += 1
                hist[L] += 1
                r, k = pick(deg[L], cand[L], opn[L], olen[L])
                olen[L] = k
                if r < 0 and nfav[L, 0] >= minimal:
                    if nsol < max_solutions:
                        sols[nsol, :] = status[L, :]
                    nsol += 1
                m = 0
                if r >= 0:
                    for p in range(rptr[r], rptr[r + 1]):
                        o = ridx[p]
                        if status[L, o] == 0:
                            choices[L, m] = o
                            m += 1
                else:
                    for o in range(n_orb):
                        if status[L, o] == 0:
                            choices[L, m] = o
                            m += 1
                nch[L] = m
                ptr[L] = 0
                pend[L] = -1
            if pend[L] >= 0:
                o = pend[L]
                pend[L] = -1
                if not decide(L, o, False, status, deg, cand, nfav, opn, olen, size, N, optr, oidx, omult,
                              has2, cptr, cidx, rptr, ridx, rmult, queue):
                    L -= 1
                    continue
            descended = False
            while ptr[L] < nch[L]:
                o = choices[L, ptr[L]]
                ptr[L] += 1
                st = status[L, o]
                if st == 0:
                    copy_row(L, status, deg, cand, nfav, opn, olen)
                    pend[L] = o
                    if decide(L + 1, o, True, status, deg, cand, nfav, opn, olen, size, N, optr, oidx,
                              omult, has2, cptr, cidx, rptr, ridx, rmult, queue):
                        L += 1
                        visiting = True
                        descended = True
                        break
                    pend[L] = -1
                elif st == 1:
                    copy_row(L, status, deg, cand, nfav, opn, olen)
                    ptr[L] = nch[L]
                    L += 1
                    visiting = True
                    descended = True
                    break
                if not decide(L, o, False, status, deg, cand, nfav, opn, olen, size, N, optr, oidx, omult,
                              has2, cptr, cidx, rptr, ridx, rmult, queue):
                    ptr[L] = nch[L]
                    break
            if not descended:
                L -= 1
        return sols, nsol, nodes, hist

    return search


_search = None


def compiled_search():
    global _search
    if _search is None:
        _search = _build()
    return _search
