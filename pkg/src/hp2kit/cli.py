"""Command line front end.

Every subcommand prints one JSON report on stdout and a short summary on
stderr.  Exit status: 0 success, 1 a check failed, 2 bad usage or input.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from pathlib import Path
from typing import Sequence

from . import __version__
from .atlas import ATLAS_NAMES, atlas_entry, from_json, load_dat, mandatory_subcomplex, named_group
from .atlas import MANDATORY_CASES, NAMED_GROUPS, save_dat, to_json
from .complex import Complex, bits, check_complementarity, check_condition_star, euler_characteristic
from .complex import f_vector, is_strongly_connected, is_weak_pseudomanifold, neighborliness
from .errors import Hp2Error
from .flips import distinguished_triples, equivariant_component, flip_graph_component, random_walk
from .homology import homology, is_homology_manifold, is_orientable, normalize_coeff
from .iso import find_isomorphism, group_by_isomorphism, m_distribution, pack_certificate, symmetry_group
from .search import SearchProblem, SearchStats, default_threads, enumerate_solutions, verify_solution
from .symmetry import PermGroup, describe_group, fixed_point_complex, group_from_generators
from .symmetry import parse_permutation, vertex_orbits

log = logging.getLogger("hp2kit")


class CheckFailed(Exception):
    """A verdict came out negative; the report is still printed."""


# ------------------------------------------------------------ inputs


def _read_input(source: str) -> tuple[list[Complex], str]:
    """Complexes named by an atlas entry or stored in a .dat/.json file."""
    path = Path(source)
    if path.exists():
        text = path.read_text()
        digest = hashlib.sha256(text.encode()).hexdigest()
        if path.suffix == ".json":
            return from_json(text), digest
        return load_dat(text), digest
    entry = atlas_entry(source)
    return [entry.complex], "atlas:" + entry.name


def _one(source: str) -> tuple[Complex, str]:
    complexes, digest = _read_input(source)
    if len(complexes) != 1:
        raise Hp2Error(f"{source} holds {len(complexes)} complexes, expected one")
    return complexes[0], digest


def _group(args: argparse.Namespace, n: int) -> PermGroup:
    gens = []
    if args.group and args.group != "trivial":
        if args.group in NAMED_GROUPS:
            G = named_group(args.group)
            if G.n != n:
                raise Hp2Error(f"group {args.group} acts on {G.n} slots, not {n}")
            gens.extend(G.generators)
        else:
            gens.extend(parse_permutation(part, n) for part in args.group.split(";") if part.strip())
    gens.extend(parse_permutation(g, n) for g in args.gen or [])
    return group_from_generators(n, gens)


def _add_group_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--group", help="named group, 'trivial', or ';'-separated generators in cycle notation")
    p.add_argument("--gen", action="append", help="one generator in cycle notation (repeatable)")


def _facets(K: Complex) -> list[list[int]]:
    return [[v + 1 for v in bits(f)] for f in K.facets]


# ------------------------------------------------------------ commands


def cmd_check(args: argparse.Namespace) -> dict:
    complexes, digest = _read_input(args.input)
    coeff = normalize_coeff(args.coeff)
    reports = []
    ok = True
    for K in complexes:
        d = args.dim if args.dim is not None else K.dim
        wpm = is_weak_pseudomanifold(K, d)
        comp = check_complementarity(K) if K.n <= 24 else None
        star = check_condition_star(K)
        verdicts = {
            "pure": K.is_pure and K.dim == d,
            "weak_pseudomanifold": wpm,
            "strongly_connected": wpm and is_strongly_connected(K, d),
            "complementarity": comp is None if K.n <= 24 else "skipped",
            "condition_star": star is None,
            "homology_manifold": is_homology_manifold(K, d, coeff),
        }
        if verdicts["strongly_connected"]:
            verdicts["orientable"] = is_orientable(K, d)
        failed = [k for k in ("weak_pseudomanifold", "homology_manifold") if not verdicts[k]]
        if verdicts["complementarity"] is False:
            failed.append("complementarity")
        ok &= not failed
        reports.append({
            "n": K.n, "dim": d, "verdicts": verdicts, "euler": euler_characteristic(K),
            "neighborly": neighborliness(K),
            "complementarity_witness": None if comp is None else [v + 1 for v in bits(comp)],
            "failed": failed,
        })
    result = {"inputs": digest, "coefficients": args.coeff, "complexes": reports}
    if not ok:
        raise CheckFailed(result)
    return result


def cmd_fvect(args: argparse.Namespace) -> dict:
    complexes, digest = _read_input(args.input)
    return {"inputs": digest, "complexes": [
        {"n": K.n, "f_vector": list(f_vector(K)), "euler": euler_characteristic(K),
         "homology": str(homology(K, args.coeff)) if args.homology else None}
        for K in complexes]}


def cmd_symm(args: argparse.Namespace) -> dict:
    complexes, digest = _read_input(args.input)
    out = []
    for K in complexes:
        G = symmetry_group(K)
        out.append({"order": G.order, "group": describe_group(G),
                    "generators": [str(g) for g in G.generators],
                    "vertex_orbits": [[v + 1 for v in bits(o)] for o in vertex_orbits(G)]})
    return {"inputs": digest, "complexes": out}


def cmd_iso(args: argparse.Namespace) -> dict:
    K1, d1 = _one(args.first)
    K2, d2 = _one(args.second)
    f = find_isomorphism(K1, K2) if K1.n == K2.n else None
    result = {"inputs": [d1, d2], "isomorphic": f is not None, "map": str(f) if f else None}
    if f is None:
        raise CheckFailed(result)
    return result


def cmd_iso_group(args: argparse.Namespace) -> dict:
    complexes, digest = _read_input(args.input)
    classes = group_by_isomorphism(complexes)
    return {"inputs": digest, "count": len(complexes), "classes": [
        {"representative": c.representative + 1, "members": [m + 1 for m in c.members],
         "sym_order": symmetry_group(complexes[c.representative]).order} for c in classes]}


def _problem(args: argparse.Namespace) -> SearchProblem:
    n = args.nverts
    G = _group(args, n)
    mandatory: list[int] = []
    if args.mandatory_case:
        G2, masks = mandatory_subcomplex(args.mandatory_case)
        if not (args.group or args.gen):
            G = G2
        mandatory.extend(masks)
    if args.mandatory:
        for K in _read_input(args.mandatory)[0]:
            mandatory.extend(K.facets)
    return SearchProblem(d=args.dim, n=n, N=args.min_facets, G=G, mandatory=tuple(mandatory),
                         enforce_star=args.star)


def cmd_find(args: argparse.Namespace) -> dict:
    problem = _problem(args)
    found: list[Complex] = []
    stats = SearchStats()
    threads = args.threads or default_threads()
    enumerate_solutions(problem, found.append, threads=threads, checkpoint=args.checkpoint,
                        progress_interval=args.progress, stats=stats, engine=args.engine)
    outputs = []
    if args.output:
        Path(args.output).write_text(save_dat(found))
        outputs.append(args.output)
    return {
        "problem": {"d": problem.d, "n": problem.n, "N": problem.N, "group_order": problem.G.order,
                    "generators": [str(g) for g in problem.G.generators],
                    "mandatory": len(problem.mandatory), "star": problem.enforce_star},
        "solutions": len(found),
        "counters": {"nodes": stats.nodes, "tasks": stats.tasks},
        "outputs": outputs,
        "complexes": None if args.output else [_facets(K) for K in found],
        "timing": {"seconds": round(stats.elapsed, 3)},
    }


def cmd_verify(args: argparse.Namespace) -> dict:
    problem = _problem(args)
    complexes, digest = _read_input(args.input)
    rows = [{"index": i + 1, "problems": verify_solution(problem, K)} for i, K in enumerate(complexes)]
    result = {"inputs": digest, "count": len(rows), "valid": sum(1 for r in rows if not r["problems"]),
              "complexes": rows}
    if result["valid"] != len(rows):
        raise CheckFailed(result)
    return result


def cmd_fixed(args: argparse.Namespace) -> dict:
    K, digest = _one(args.input)
    G = _group(args, K.n)
    fp = fixed_point_complex(K, G)
    return {"inputs": digest, "group_order": G.order, "vertices": len(fp.labels),
            "labels": [[v + 1 for v in bits(o)] for o in fp.labels],
            "facets": _facets(fp.complex), "f_vector": list(f_vector(fp.complex)) if fp.labels else []}


def _write_graph(graph, args: argparse.Namespace) -> list[str]:
    outputs = []
    if args.dot:
        Path(args.dot).write_text(graph.to_dot())
        outputs.append(args.dot)
    if args.json:
        Path(args.json).write_text(json.dumps(graph.to_json(), indent=1))
        outputs.append(args.json)
    return outputs


def _graph_summary(graph) -> dict:
    return {
        "nodes": [{"label": nd.label, "symmetry": nd.group, "sym_order": nd.sym_order,
                   "certificate": nd.certificate, "degree": graph.degree(i)} for i, nd in enumerate(graph.nodes)],
        "census": graph.census(),
        "edges": [{"a": graph.nodes[a].label, "b": graph.nodes[b].label, "multiplicity": m}
                  for (a, b), m in sorted(graph.edges.items())],
        "loops": [{"node": graph.nodes[i].label, **v} for i, v in sorted(graph.loops.items())],
        "edge_count": graph.edge_count,
        "loop_count": graph.loop_count,
        "truncated": graph.truncated,
    }


def cmd_flip_graph(args: argparse.Namespace) -> dict:
    K, digest = _one(args.input)
    graph = flip_graph_component(K, max_nodes=args.max_nodes, threads=args.threads or default_threads())
    return {"inputs": digest, **_graph_summary(graph), "outputs": _write_graph(graph, args)}


def cmd_eq_flip_graph(args: argparse.Namespace) -> dict:
    K, digest = _one(args.input)
    G = _group(args, K.n)
    graph = equivariant_component(K, G, max_nodes=args.max_nodes)
    return {"inputs": digest, "group": describe_group(G), **_graph_summary(graph),
            "outputs": _write_graph(graph, args)}


def cmd_random_walk(args: argparse.Namespace) -> dict:
    K, digest = _one(args.input)
    stats = random_walk(K, args.steps, args.seed)
    return {"inputs": digest, **stats.to_json()}


def cmd_cert(args: argparse.Namespace) -> dict:
    complexes, digest = _read_input(args.input)
    out = []
    for K in complexes:
        m = m_distribution(K)
        out.append({"m": list(m), "certificate": pack_certificate(m), "t": len(distinguished_triples(K))})
    return {"inputs": digest, "complexes": out}


def cmd_atlas(args: argparse.Namespace) -> dict:
    if args.list or not args.name:
        return {"entries": list(ATLAS_NAMES), "groups": sorted(NAMED_GROUPS),
                "mandatory_cases": list(MANDATORY_CASES)}
    entry = atlas_entry(args.name)
    text = json.dumps(to_json([entry.complex])) if args.format == "json" else save_dat([entry.complex])
    outputs = []
    if args.output:
        Path(args.output).write_text(text)
        outputs.append(args.output)
    return {"name": entry.name, "provenance": entry.provenance, "n": entry.complex.n,
            "f_vector": list(f_vector(entry.complex)), "outputs": outputs,
            "facets": None if args.output else _facets(entry.complex)}


def cmd_convert(args: argparse.Namespace) -> dict:
    complexes, digest = _read_input(args.input)
    if args.output.endswith(".json"):
        Path(args.output).write_text(json.dumps(to_json(complexes)))
    else:
        Path(args.output).write_text(save_dat(complexes))
    return {"inputs": digest, "count": len(complexes), "outputs": [args.output]}


# ------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hp2kit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        return p

    p = add("check", cmd_check, "manifold, complementarity and (*) verdicts")
    p.add_argument("input")
    p.add_argument("--dim", type=int)
    p.add_argument("--coeff", default="Z", help="Z or a prime")

    p = add("fvect", cmd_fvect, "f-vector and Euler characteristic")
    p.add_argument("input")
    p.add_argument("--homology", action="store_true")
    p.add_argument("--coeff", default="Z")

    p = add("symm", cmd_symm, "symmetry group")
    p.add_argument("input")

    p = add("iso", cmd_iso, "test two complexes for isomorphism")
    p.add_argument("first")
    p.add_argument("second")

    p = add("iso-group", cmd_iso_group, "split a list of complexes into isomorphism classes")
    p.add_argument("input")

    for name, func, text in (("find", cmd_find, "enumerate invariant weak pseudomanifolds"),
                             ("verify", cmd_verify, "re-check complexes against a search problem")):
        p = add(name, func, text)
        if name == "verify":
            p.add_argument("input")
        p.add_argument("--dim", type=int, required=True)
        p.add_argument("--nverts", type=int, required=True)
        p.add_argument("--min-facets", type=int, default=0)
        _add_group_flags(p)
        p.add_argument("--mandatory", help="file or atlas entry whose facets are forced")
        p.add_argument("--mandatory-case", choices=MANDATORY_CASES)
        p.add_argument("--star", action=argparse.BooleanOptionalAction, default=True)
        if name == "find":
            p.add_argument("--threads", type=int, help="worker processes (default: HP2KIT_THREADS or CPU count)")
            p.add_argument("--checkpoint", help="resume file for long runs")
            p.add_argument("--progress", type=float, default=None, help="seconds between progress lines")
            p.add_argument("--output", "-o", help="write solutions as .dat")
            p.add_argument("--engine", choices=("auto", "python", "compiled"), default="auto")

    p = add("fixed", cmd_fixed, "fixed-point complex of a group action")
    p.add_argument("input")
    _add_group_flags(p)

    for name, func, text in (("flip-graph", cmd_flip_graph, "component of the triple flip graph"),
                             ("eq-flip-graph", cmd_eq_flip_graph, "component of the equivariant flip graph")):
        p = add(name, func, text)
        p.add_argument("input")
        p.add_argument("--max-nodes", type=int, default=10_000)
        p.add_argument("--dot")
        p.add_argument("--json")
        if name == "flip-graph":
            p.add_argument("--threads", type=int)
        else:
            _add_group_flags(p)

    p = add("random-walk", cmd_random_walk, "random walk by triple flips")
    p.add_argument("input")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)

    p = add("cert", cmd_cert, "m-distribution, certificate and triple count")
    p.add_argument("input")

    p = add("atlas", cmd_atlas, "emit built-in complexes")
    p.add_argument("name", nargs="?")
    p.add_argument("--list", action="store_true")
    p.add_argument("--format", choices=("dat", "json"), default="dat")
    p.add_argument("--output", "-o")

    p = add("convert", cmd_convert, "convert between .dat and .json")
    p.add_argument("input")
    p.add_argument("output")
    return parser


def _summary(command: str, report: dict) -> str:
    keys = ("solutions", "isomorphic", "valid", "edge_count", "distinct_certificates", "order")
    parts = [f"{k}={report[k]}" for k in keys if k in report]
    if "census" in report:
        parts.append(f"nodes={len(report['nodes'])}")
    return f"{command}: " + (" ".join(parts) if parts else "done")


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose or getattr(args, "progress", None) else logging.WARNING,
                        stream=sys.stderr, format="%(message)s")
    started = time.monotonic()
    echo = ["hp2kit", *(argv if argv is not None else sys.argv[1:])]
    status = 0
    try:
        result = args.func(args)
    except CheckFailed as exc:
        result = exc.args[0]
        status = 1
    except (Hp2Error, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(json.dumps({"command": echo, "error": str(exc)}))
        return 2
    report = {"command": echo, "status": "ok" if status == 0 else "check_failed", **result}
    report.setdefault("timing", {})["wall_seconds"] = round(time.monotonic() - started, 3)
    print(json.dumps(report, indent=1, default=str))
    print(_summary(args.command, result) + ("" if status == 0 else " (check failed)"), file=sys.stderr)
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
