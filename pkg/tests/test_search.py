import json
from itertools import combinations

import pytest

from hp2kit.atlas import hp2_seed, named_group, rp2_6
from hp2kit.complex import from_facets
from hp2kit.errors import InfeasibleMandatory
from hp2kit.iso import group_by_isomorphism
from hp2kit.search import (
    SearchProblem, SearchStats, brute_force, candidate_count, solve, verify_solution,
)
from hp2kit.symmetry import trivial_group

def test_rp2_micro_search():
    P = SearchProblem(2, 6, 10, trivial_group(6))
    sols = solve(P)
    assert len(sols) == 12
    assert rp2_6() in sols
    classes = group_by_isomorphism(sols)
    assert len(classes) == 1
    assert sorted(K.facets for K in sols) == sorted(K.facets for K in brute_force(P))


def test_engines_agree_on_order_and_nodes():
    problems = [SearchProblem(2, 6, 0, trivial_group(6)),
                SearchProblem(2, 7, 0, trivial_group(7), enforce_star=False),
                SearchProblem(8, 15, 490, named_group("A5"))]
    for P in problems:
        runs = []
        for engine in ("python", "compiled"):
            st = SearchStats()
            runs.append(([K.facets for K in solve(P, engine=engine, stats=st)], st.nodes))
        assert runs[0] == runs[1]


def test_split_into_tasks_keeps_order(tmp_path):
    P = SearchProblem(2, 7, 0, trivial_group(7), enforce_star=False)
    whole = [K.facets for K in solve(P, engine="python")]
    st = SearchStats()
    ck = tmp_path / "run.ckpt"
    split = [K.facets for K in solve(P, engine="python", checkpoint=str(ck), split_levels=3, stats=st)]
    assert split == whole
    assert st.tasks > 1
    data = json.loads(ck.read_text())
    assert data["problem"] == P.digest()
    # resuming a finished run replays the stored results
    again = [K.facets for K in solve(P, checkpoint=str(ck), split_levels=3)]
    assert again == whole


def test_foreign_checkpoint_is_ignored(tmp_path):
    ck = tmp_path / "run.ckpt"
    solve(SearchProblem(2, 6, 0, trivial_group(6)), checkpoint=str(ck))
    assert len(solve(SearchProblem(2, 6, 10, trivial_group(6)), checkpoint=str(ck))) == 12


def test_mandatory_forces_facets():
    G = trivial_group(6)
    first = rp2_6().facets[0]
    P = SearchProblem(2, 6, 10, G, mandatory=(first,))
    sols = solve(P)
    assert sols and all(first in K.facets for K in sols)
    assert len(sols) < 12
    with pytest.raises(InfeasibleMandatory):
        SearchProblem(2, 6, 10, G, mandatory=(0b1111,))


def test_verify_solution_reports():
    P = SearchProblem(2, 6, 10, trivial_group(6))
    assert verify_solution(P, rp2_6()) == []
    broken = from_facets(6, rp2_6().facets[1:])
    report = verify_solution(P, broken)
    assert any("degree" in r for r in report)
    assert any("facets <" in r for r in report)


def test_star_forbids_complementary_pairs():
    P = SearchProblem(2, 6, 0, trivial_group(6))
    for K in solve(P):
        full = 0b111111
        assert not any(a | b == full for a, b in combinations(K.facets, 2))


def test_candidate_count():
    assert candidate_count(SearchProblem(8, 15, 490, named_group("A5"))) == 5005


def test_frozen_a5_seed_is_first_solution():
    assert hp2_seed("hp2_a5") == hp2_seed("hp2_a5", use_cache=False)


def test_bad_engine():
    with pytest.raises(ValueError):
        solve(SearchProblem(2, 6, 10, trivial_group(6)), engine="gpu")
