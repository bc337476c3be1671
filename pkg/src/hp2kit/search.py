"""Enumeration of G-invariant weak pseudomanifolds by orbit backtracking.

Decisions are made on whole G-orbits of (d+1)-subsets.  Each ridge keeps
its current degree and the number of undecided orbits through it; unit
propagation forces or forbids orbits as soon as a ridge has no choice
left.  Condition (*) is a pairwise exclusion: two facets clash exactly
when together they cover every vertex.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Callable, Iterator, Sequence

from .complex import Complex, bits, check_condition_star, from_facets, full_mask, is_weak_pseudomanifold
from .complex import ridge_degrees
from .errors import InfeasibleMandatory, NotPure
from .symmetry import PermGroup, is_invariant, orbit_of_mask, orbits_on_ksubsets, trivial_group

log = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1


@dataclass
class SearchProblem:
    d: int
    n: int
    N: int
    G: PermGroup
    mandatory: tuple[int, ...] = ()
    enforce_star: bool = True
    require_two_per_ridge_exact: bool = True

    def __post_init__(self) -> None:
        if self.G is None:
            self.G = trivial_group(self.n)
        if self.G.n != self.n:
            raise ValueError(f"group acts on {self.G.n} slots, problem has {self.n}")
        if self.N < 0:
            raise ValueError("minimal facet count must be nonnegative")
        for m in self.mandatory:
            if m.bit_count() != self.d + 1 or m >> self.n:
                raise InfeasibleMandatory(f"mandatory simplex {m:#x} is not a {self.d}-simplex on {self.n} slots")
        closed: set[int] = set()
        for m in self.mandatory:
            closed.update(orbit_of_mask(self.G, m))
        self.mandatory = tuple(sorted(closed))

    def digest(self) -> str:
        text = json.dumps({
            "d": self.d, "n": self.n, "N": self.N,
            "G": sorted(list(g.images) for g in self.G.elements),
            "mandatory": list(self.mandatory), "star": self.enforce_star,
        })
        return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass
class SearchStats:
    nodes: int = 0
    solutions: int = 0
    tasks: int = 0
    elapsed: float = 0.0
    depth_histogram: Counter = field(default_factory=Counter)


class _Tables:
    """Static data of a problem: candidate orbits, ridges, clashes."""

    def __init__(self, problem: SearchProblem):
        self.problem = problem
        n, d = problem.n, problem.d
        full = full_mask(n)
        orbits = orbits_on_ksubsets(problem.G, d + 1)
        self.orbits = orbits
        self.size = [len(o) for o in orbits]
        orbit_of = {}
        for i, o in enumerate(orbits):
            for f in o:
                orbit_of[f] = i
        self.orbit_of = orbit_of
        ridge_index: dict[int, int] = {}
        self.oridges: list[list[tuple[int, int]]] = []
        self.dead = [False] * len(orbits)
        for i, o in enumerate(orbits):
            mult: Counter = Counter()
            for f in o:
                for v in bits(f):
                    mult[f ^ (1 << v)] += 1
            if any(k > 2 for k in mult.values()):
                self.dead[i] = True
            pairs = []
            for r, k in sorted(mult.items()):
                idx = ridge_index.setdefault(r, len(ridge_index))
                pairs.append((idx, k))
            self.oridges.append(pairs)
        self.ridges = sorted(ridge_index, key=ridge_index.get)
        self.rorbits: list[list[tuple[int, int]]] = [[] for _ in self.ridges]
        for i, pairs in enumerate(self.oridges):
            for r, k in pairs:
                self.rorbits[r].append((i, k))
        self.has_mult2 = [any(k == 2 for _, k in lst) for lst in self.rorbits]
        self.clashes: list[list[int]] = [[] for _ in orbits]
        if problem.enforce_star:
            self._build_clashes(full)

    def arrays(self) -> dict:
        """Flat CSR copies of the tables for the compiled engine."""
        cached = getattr(self, "_arrays", None)
        if cached is not None:
            return cached
        import numpy as np

        def csr(rows, with_mult):
            ptr = np.zeros(len(rows) + 1, dtype=np.int64)
            idx, mult = [], []
            for i, row in enumerate(rows):
                for item in row:
                    if with_mult:
                        idx.append(item[0])
                        mult.append(item[1])
                    else:
                        idx.append(item)
                ptr[i + 1] = len(idx)
            return ptr, np.array(idx, dtype=np.int32), np.array(mult, dtype=np.int8)

        optr, oidx, omult = csr(self.oridges, True)
        rptr, ridx, rmult = csr(self.rorbits, True)
        cptr, cidx, _ = csr(self.clashes, False)
        self._arrays = {
            "optr": optr, "oidx": oidx, "omult": omult, "rptr": rptr, "ridx": ridx, "rmult": rmult,
            "cptr": cptr, "cidx": cidx, "size": np.array(self.size, dtype=np.int64),
            "has2": np.array(self.has_mult2, dtype=np.bool_),
        }
        return self._arrays

    def _build_clashes(self, full: int) -> None:
        d1 = self.problem.d + 1
        for i, o in enumerate(self.orbits):
            rep = o[0]
            rest = full & ~rep
            need = d1 - rest.bit_count()
            partners: set[int] = set()
            if need >= 0:
                for extra in combinations(list(bits(rep)), need):
                    partner = rest
                    for v in extra:
                        partner |= 1 << v
                    partners.add(self.orbit_of[partner])
            if i in partners:
                self.dead[i] = True
                partners.discard(i)
            # clashing is G-invariant, so checking the representative covers the orbit
            for j in partners:
                self.clashes[i].append(j)
        for i in range(len(self.orbits)):
            for j in self.clashes[i]:
                if i not in self.clashes[j]:
                    self.clashes[j].append(i)
        self.clashes = [sorted(set(c)) for c in self.clashes]


class _State:
    __slots__ = ("status", "deg", "cand", "nf", "avail", "open", "queue", "t")

    def __init__(self, t: _Tables):
        self.t = t
        self.status = [0] * len(t.orbits)
        self.deg = [0] * len(t.ridges)
        self.cand = [len(lst) for lst in t.rorbits]
        self.nf = 0
        self.avail = sum(t.size)
        self.open: list[int] = []
        self.queue: list[int] = []

    def copy(self) -> "_State":
        s = _State.__new__(_State)
        s.t = self.t
        s.status = self.status[:]
        s.deg = self.deg[:]
        s.cand = self.cand[:]
        s.nf = self.nf
        s.avail = self.avail
        s.open = self.open[:]
        s.queue = []
        return s

    def include(self, o: int) -> bool:
        st = self.status[o]
        if st:
            return st == 1
        t = self.t
        self.status[o] = 1
        self.nf += t.size[o]
        deg, cand, queue = self.deg, self.cand, self.queue
        has_mult2 = t.has_mult2
        for r, k in t.oridges[o]:
            d = deg[r] + k
            if d > 2:
                return False
            deg[r] = d
            c = cand[r] - 1
            cand[r] = c
            if d == 1:
                self.open.append(r)
                if c <= 1 or has_mult2[r]:
                    queue.append(r)
            elif c and (d == 2 or c == 1):
                queue.append(r)
        status = self.status
        for o2 in t.clashes[o]:
            s2 = status[o2]
            if s2 == 1:
                return False
            if s2 == 0 and not self.exclude(o2):
                return False
        return True

    def exclude(self, o: int) -> bool:
        st = self.status[o]
        if st:
            return st == -1
        t = self.t
        self.status[o] = -1
        self.avail -= t.size[o]
        if self.avail < t.problem.N:
            return False
        cand, deg, queue = self.cand, self.deg, self.queue
        for r, _ in t.oridges[o]:
            c = cand[r] - 1
            cand[r] = c
            # only a ridge left with at most one candidate can trigger a rule
            if c <= 1 and deg[r] < 2:
                queue.append(r)
        return True

    def propagate(self) -> bool:
        t = self.t
        queue, deg, cand, status = self.queue, self.deg, self.cand, self.status
        while queue:
            r = queue.pop()
            d = deg[r]
            c = cand[r]
            if d == 2:
                if c:
                    for o, _ in t.rorbits[r]:
                        if status[o] == 0 and not self.exclude(o):
                            queue.clear()
                            return False
            elif d == 1:
                if c <= 1 or t.has_mult2[r]:
                    usable = -1
                    count = 0
                    for o, k in t.rorbits[r]:
                        if status[o] == 0:
                            if k == 1:
                                usable = o
                                count += 1
                            elif not self.exclude(o):
                                queue.clear()
                                return False
                    if count == 0:
                        queue.clear()
                        return False
                    if count == 1 and not self.include(usable):
                        queue.clear()
                        return False
            elif c == 1:
                for o, k in t.rorbits[r]:
                    if status[o] == 0:
                        if k == 1 and not self.exclude(o):
                            queue.clear()
                            return False
                        break
        return True

    def decide(self, o: int, include: bool) -> bool:
        ok = self.include(o) if include else self.exclude(o)
        return ok and self.propagate()

    def pick_open_ridge(self) -> int:
        deg, cand = self.deg, self.cand
        still = [r for r in self.open if deg[r] == 1]
        self.open = still
        best = -1
        best_c = 1 << 30
        for r in still:
            c = cand[r]
            if c < best_c or (c == best_c and r < best):
                best, best_c = r, c
        return best

    def facets(self) -> list[int]:
        out = []
        for o, st in enumerate(self.status):
            if st == 1:
                out.extend(self.t.orbits[o])
        return sorted(out)


Decision = tuple[int, bool]


def _root(t: _Tables) -> _State | None:
    s = _State(t)
    for o, dead in enumerate(t.dead):
        if dead and t.size[o] and not s.exclude(o):
            return None
    if not s.propagate():
        return None
    return s


def _apply_mandatory(t: _Tables, s: _State) -> _State:
    for m in t.problem.mandatory:
        o = t.orbit_of[m]
        if t.dead[o] or not s.decide(o, True):
            raise InfeasibleMandatory("mandatory facets violate the ridge or (*) constraints")
    return s


def _children(s: _State) -> Iterator[tuple[_State, list[Decision]]]:
    """Child states in branching order with the decisions that produced them."""
    t = s.t
    r = s.pick_open_ridge()
    if r >= 0:
        choices = [o for o, k in t.rorbits[r] if s.status[o] == 0]
    else:
        choices = [o for o, st in enumerate(s.status) if st == 0]
    base = s
    excluded: list[Decision] = []
    for o in choices:
        if base.status[o] == 0:
            child = base.copy()
            if child.decide(o, True):
                yield child, excluded + [(o, True)]
        elif base.status[o] == 1:
            # forced in by earlier exclusions: this is the last live branch
            yield base, list(excluded)
            return
        nxt = base.copy() if base is s else base
        if not nxt.decide(o, False):
            return
        base = nxt
        excluded.append((o, False))


def _is_solution(s: _State) -> bool:
    return s.nf >= max(s.t.problem.N, 1)


class _Runner:
    def __init__(self, t: _Tables, sink: Callable[[Complex], None], progress_interval: float | None,
                 engine: str = "python"):
        self.t = t
        self.sink = sink
        self.stats = SearchStats()
        self.interval = progress_interval
        self.last = time.monotonic()
        self.start = self.last
        self.engine = engine

    def _tick(self, depth: int) -> None:
        st = self.stats
        st.nodes += 1
        st.depth_histogram[depth] += 1
        if self.interval is not None and st.nodes % 256 == 0:
            now = time.monotonic()
            if now - self.last >= self.interval:
                rate = st.nodes / max(now - self.start, 1e-9)
                top = sorted(st.depth_histogram.items())[:12]
                log.info("nodes=%d solutions=%d rate=%.0f/s depths=%s", st.nodes, st.solutions, rate, top)
                self.last = now

    def emit(self, s: _State) -> None:
        self.stats.solutions += 1
        self.sink(from_facets(self.t.problem.n, s.facets()))

    def run(self, s: _State, depth: int = 0) -> None:
        if self.engine == "compiled":
            self._run_compiled(s, depth)
        else:
            self._run_python(s, depth)

    def _run_compiled(self, s: _State, depth: int) -> None:
        import numpy as np

        from ._kernel import compiled_search

        a = self.t.arrays()
        search = compiled_search()
        status0 = np.array(s.status, dtype=np.int8)
        deg0 = np.array(s.deg, dtype=np.int8)
        cand0 = np.array(s.cand, dtype=np.int32)
        nfav0 = np.array([s.nf, s.avail], dtype=np.int64)
        opn0 = np.zeros(len(s.deg) * 2 + 8, dtype=np.int32)
        opn0[:len(s.open)] = s.open
        queue = np.zeros(len(a["oidx"]) + 8, dtype=np.int32)
        cap = 1024
        while True:
            sols, nsol, nodes, hist = search(
                status0, deg0, cand0, nfav0, opn0, len(s.open), a["size"], self.t.problem.N,
                max(self.t.problem.N, 1), a["optr"], a["oidx"], a["omult"], a["has2"], a["cptr"], a["cidx"],
                a["rptr"], a["ridx"], a["rmult"], queue, cap)
            if nsol <= cap:
                break
            cap = nsol
        self.stats.nodes += int(nodes)
        for dep, count in enumerate(hist):
            if count:
                self.stats.depth_histogram[dep + depth] += int(count)
        orbits = self.t.orbits
        for row in sols[:nsol]:
            facets = [f for o in np.nonzero(row == 1)[0] for f in orbits[o]]
            self.stats.solutions += 1
            self.sink(from_facets(self.t.problem.n, sorted(facets)))

    def _run_python(self, s: _State, depth: int) -> None:
        """Depth-first search below ``s`` (explicit stack, no recursion)."""
        stack: list[tuple[Iterator, int]] = []
        self._visit(s, depth, stack)
        while stack:
            it, dep = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                continue
            self._visit(nxt[0], dep + 1, stack)

    def _visit(self, s: _State, depth: int, stack: list) -> None:
        self._tick(depth)
        if s.pick_open_ridge() < 0 and _is_solution(s):
            self.emit(s)
        stack.append((_children(s), depth))


def _replay(t: _Tables, prefix: Sequence[Decision]) -> _State | None:
    s = _root(t)
    if s is None:
        return None
    s = _apply_mandatory(t, s)
    for o, inc in prefix:
        if not s.decide(o, inc):
            return None
    return s


def _plan(t: _Tables, root: _State, levels: int) -> tuple[list[tuple[str, object]], int]:
    """Split the top of the tree into ordered emit / subtree items."""
    items: list[tuple[str, object]] = []
    visited = [0]

    def walk(s: _State, prefix: list[Decision], level: int) -> None:
        if level == levels:
            items.append(("subtree", prefix))
            return
        visited[0] += 1
        if s.pick_open_ridge() < 0 and _is_solution(s):
            items.append(("emit", s.facets()))
        for child, decisions in _children(s):
            walk(child, prefix + decisions, level + 1)

    walk(root, [], 0)
    return items, visited[0]


_WORKER_TABLES: _Tables | None = None


def _worker_init(problem: SearchProblem) -> None:
    global _WORKER_TABLES
    _WORKER_TABLES = _Tables(problem)


def _run_subtree(args: tuple[list[Decision], int, str]) -> tuple[list[list[int]], int]:
    prefix, depth, engine = args
    t = _WORKER_TABLES
    found: list[list[int]] = []
    s = _replay(t, prefix)
    if s is None:
        return found, 0
    runner = _Runner(t, lambda K: found.append(list(K.facets)), None, engine)
    runner.run(s, depth)
    return found, runner.stats.nodes


def resolve_engine(engine: str) -> str:
    """``auto`` picks the compiled engine when numba is importable."""
    if engine == "auto":
        from ._kernel import AVAILABLE
        return "compiled" if AVAILABLE else "python"
    if engine not in ("python", "compiled"):
        raise ValueError(f"unknown engine {engine!r}")
    return engine


def _load_checkpoint(path: str, digest: str, ntasks: int) -> dict[int, list[list[int]]]:
    if not path or not os.path.exists(path):
        return {}
    with open(path) as fh:
        data = json.load(fh)
    if data.get("version") != CHECKPOINT_VERSION or data.get("problem") != digest or data.get("tasks") != ntasks:
        log.warning("ignoring checkpoint %s: it belongs to a different run", path)
        return {}
    return {int(k): v for k, v in data["done"].items()}


def _save_checkpoint(path: str, digest: str, ntasks: int, done: dict[int, list[list[int]]]) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump({"version": CHECKPOINT_VERSION, "problem": digest, "tasks": ntasks,
                   "done": {str(k): v for k, v in sorted(done.items())}}, fh)
    os.replace(tmp, path)


def default_threads() -> int:
    env = os.environ.get("HP2KIT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def enumerate_solutions(problem: SearchProblem, sink: Callable[[Complex], None] | None = None, *,
                        threads: int = 1, checkpoint: str | None = None, split_levels: int = 2,
                        progress_interval: float | None = None, stats: SearchStats | None = None,
                        engine: str = "auto") -> int:
    """Emit every solution of ``problem`` to ``sink`` and return how many.

    The top ``split_levels`` levels of the decision tree are cut into
    independent tasks.  Tasks run in a process pool when ``threads > 1``;
    results are merged in task order, so the output does not depend on
    the number of workers.  With ``checkpoint`` set, finished tasks are
    recorded in that file and skipped when the run is resumed.  ``engine``
    selects the pure-Python or the compiled depth-first search; both visit
    the same nodes in the same order.
    """
    engine = resolve_engine(engine)
    sink = sink or (lambda K: None)
    stats = stats if stats is not None else SearchStats()
    started = time.monotonic()
    t = _Tables(problem)
    root = _root(t)
    if root is None:
        if problem.mandatory:
            raise InfeasibleMandatory("mandatory facets cannot be completed")
        return 0
    root = _apply_mandatory(t, root)
    if checkpoint is None and threads <= 1:
        runner = _Runner(t, sink, progress_interval, engine)
        runner.run(root)
        stats.nodes += runner.stats.nodes
        stats.depth_histogram.update(runner.stats.depth_histogram)
        stats.solutions += runner.stats.solutions
        stats.elapsed = time.monotonic() - started
        return runner.stats.solutions

    items, plan_nodes = _plan(t, root, split_levels)
    stats.nodes += plan_nodes
    subtrees = [i for i, (kind, _) in enumerate(items) if kind == "subtree"]
    stats.tasks = len(subtrees)
    digest = problem.digest()
    done = _load_checkpoint(checkpoint, digest, len(items)) if checkpoint else {}
    todo = [i for i in subtrees if i not in done]
    jobs = [(items[i][1], split_levels, engine) for i in todo]
    if progress_interval is not None:
        log.info("%d tasks planned, %d already done", len(subtrees), len(done))
    results: dict[int, list[list[int]]] = dict(done)
    if threads > 1 and len(jobs) > 1:
        import multiprocessing as mp
        with mp.get_context("fork").Pool(threads, initializer=_worker_init, initargs=(problem,)) as pool:
            for i, (found, nodes) in zip(todo, pool.imap(_run_subtree, jobs)):
                results[i] = found
                stats.nodes += nodes
                if checkpoint:
                    _save_checkpoint(checkpoint, digest, len(items), {k: results[k] for k in results})
    else:
        global _WORKER_TABLES
        _WORKER_TABLES = t
        for i, job in zip(todo, jobs):
            found, nodes = _run_subtree(job)
            results[i] = found
            stats.nodes += nodes
            if progress_interval is not None:
                log.info("task %d/%d done, %d solutions so far", len(results) - len(done), len(todo),
                         sum(len(v) for v in results.values()))
            if checkpoint:
                _save_checkpoint(checkpoint, digest, len(items), results)
    count = 0
    for i, (kind, payload) in enumerate(items):
        facet_lists = [payload] if kind == "emit" else results[i]
        for facets in facet_lists:
            sink(from_facets(problem.n, facets))
            count += 1
    stats.solutions += count
    stats.elapsed = time.monotonic() - started
    return count


def solve(problem: SearchProblem, **kwargs) -> list[Complex]:
    out: list[Complex] = []
    enumerate_solutions(problem, out.append, **kwargs)
    return out


def verify_solution(problem: SearchProblem, K: Complex) -> list[str]:
    """Independent re-check of a claimed solution; empty list means valid."""
    problems: list[str] = []
    if K.n != problem.n:
        problems.append(f"vertex count {K.n} != {problem.n}")
    if not is_invariant(K, problem.G):
        problems.append("not invariant under the group")
    try:
        degrees = ridge_degrees(K, problem.d)
    except NotPure:
        problems.append(f"not pure of dimension {problem.d}")
        degrees = {}
    if degrees:
        if problem.require_two_per_ridge_exact:
            bad = sorted(r for r, c in degrees.items() if c != 2)
        else:
            bad = sorted(r for r, c in degrees.items() if c > 2)
        for r in bad[:10]:
            problems.append(f"ridge {sorted(bits(r))} has degree {degrees[r]}")
        if len(bad) > 10:
            problems.append(f"... {len(bad) - 10} more ridge-degree failures")
        if problem.require_two_per_ridge_exact and not bad and not is_weak_pseudomanifold(K, problem.d):
            problems.append("not a weak pseudomanifold")
    if len(K.facets) < problem.N:
        problems.append(f"{len(K.facets)} facets < {problem.N}")
    if problem.enforce_star:
        witness = check_condition_star(K)
        if witness is not None:
            problems.append(f"condition (*) fails at {sorted(v + 1 for v in bits(witness))}")
    facets = set(K.facets)
    missing = [m for m in problem.mandatory if m not in facets]
    if missing:
        problems.append(f"{len(missing)} mandatory facets missing")
    return problems


def brute_force(problem: SearchProblem, max_orbits: int = 22) -> list[Complex]:
    """Reference enumeration over every subset of candidate orbits.

    Independent of the backtracking engine: all 2^k orbit subsets are
    scored at once with vectorized ridge counts and clash tests, and the
    survivors are re-checked with :func:`verify_solution`.
    """
    import numpy as np

    orbits = orbits_on_ksubsets(problem.G, problem.d + 1)
    k = len(orbits)
    if k > max_orbits:
        raise ValueError(f"{k} orbits is too many for brute force")
    subsets = np.arange(1 << k, dtype=np.int64)
    chosen = [((subsets >> i) & 1).astype(np.int8) for i in range(k)]
    ok = np.ones(1 << k, dtype=bool)
    ridge_mult: dict[int, Counter] = {}
    for i, o in enumerate(orbits):
        for f in o:
            for v in bits(f):
                ridge_mult.setdefault(f ^ (1 << v), Counter())[i] += 1
    for r, per in ridge_mult.items():
        deg = np.zeros(1 << k, dtype=np.int16)
        for i, mult in per.items():
            deg += chosen[i] * mult
        ok &= (deg == 0) | (deg == 2)
    sizes = np.zeros(1 << k, dtype=np.int32)
    for i, o in enumerate(orbits):
        sizes += chosen[i] * len(o)
    ok &= sizes >= max(problem.N, 1)
    if problem.enforce_star:
        full = full_mask(problem.n)
        for i, j in combinations(range(k), 2):
            if any(a | b == full for a in orbits[i] for b in orbits[j]):
                ok &= ~((chosen[i] == 1) & (chosen[j] == 1))
        for i, o in enumerate(orbits):
            if any(a | b == full for a, b in combinations(o, 2)):
                ok &= chosen[i] == 0
    index = {m: i for i, o in enumerate(orbits) for m in o}
    for m in problem.mandatory:
        ok &= chosen[index[m]] == 1
    out = []
    for sub in np.nonzero(ok)[0]:
        facets = [f for i, o in enumerate(orbits) if sub >> i & 1 for f in o]
        K = from_facets(problem.n, facets)
        if not verify_solution(problem, K):
            out.append(K)
    return out


def candidate_count(problem: SearchProblem) -> int:
    return comb(problem.n, problem.d + 1)
