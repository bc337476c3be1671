import json
import subprocess
import sys

from hp2kit.atlas import load_dat
from hp2kit.cli import run


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def test_check_and_fvect(capsys):
    code, rep, err = call(capsys, "check", "rp2_6")
    assert code == 0 and rep["status"] == "ok"
    v = rep["complexes"][0]["verdicts"]
    assert v["homology_manifold"] and v["complementarity"] and v["orientable"] is False
    assert err.startswith("check:")
    code, rep, _ = call(capsys, "fvect", "cp2_9", "--homology")
    assert rep["complexes"][0]["f_vector"] == [9, 36, 84, 90, 36]
    assert rep["complexes"][0]["homology"] == "H0=Z, H1=0, H2=Z, H3=0, H4=Z"


def test_check_failure_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.dat"
    bad.write_text("1110\n0111\n")
    code, rep, err = call(capsys, "check", str(bad))
    assert code == 1 and rep["status"] == "check_failed" and "check failed" in err


def test_symm_and_iso(capsys, tmp_path):
    code, rep, _ = call(capsys, "symm", "cp2_9")
    assert rep["complexes"][0]["order"] == 54
    code, rep, _ = call(capsys, "iso", "L1", "L1")
    assert code == 0 and rep["isomorphic"]
    code, rep, _ = call(capsys, "iso", "L1", "L2")
    assert code == 1 and not rep["isomorphic"]


def test_find_verify_isogroup(capsys, tmp_path):
    out = tmp_path / "sols.dat"
    code, rep, err = call(capsys, "find", "--dim", "2", "--nverts", "6", "--min-facets", "10", "-o", str(out))
    assert code == 0 and rep["solutions"] == 12 and "solutions=12" in err
    assert len(load_dat(out.read_text())) == 12
    code, rep, _ = call(capsys, "verify", str(out), "--dim", "2", "--nverts", "6", "--min-facets", "10")
    assert code == 0 and rep["valid"] == 12
    code, rep, _ = call(capsys, "verify", str(out), "--dim", "2", "--nverts", "6", "--min-facets", "11")
    assert code == 1 and rep["valid"] == 0
    code, rep, _ = call(capsys, "iso-group", str(out))
    assert len(rep["classes"]) == 1 and rep["classes"][0]["sym_order"] == 60


def test_find_with_group_generators(capsys):
    code, rep, _ = call(capsys, "find", "--dim", "2", "--nverts", "6", "--gen", "(1 2 3)(4 5 6)",
                        "--engine", "python")
    assert code == 0 and rep["problem"]["group_order"] == 3


def test_find_empty_run(capsys):
    code, rep, _ = call(capsys, "find", "--dim", "8", "--nverts", "15", "--min-facets", "490",
                        "--mandatory-case", "C5_fixed5")
    assert code == 0 and rep["solutions"] == 0 and rep["complexes"] == []


def test_graph_commands(capsys, tmp_path):
    dot = tmp_path / "g.dot"
    code, rep, _ = call(capsys, "flip-graph", "cp2_9", "--dot", str(dot), "--json", str(tmp_path / "g.json"))
    assert code == 0 and rep["loop_count"] == 2 and dot.read_text().startswith("graph")
    code, rep, _ = call(capsys, "eq-flip-graph", "hp2_a5", "--group", "A5")
    assert rep["loops"][0]["self_inverse"] == 1 and rep["edge_count"] == 0
    code, rep, _ = call(capsys, "cert", "hp2_a5")
    assert rep["complexes"][0]["m"] == [1170, 1740, 870, 360, 60, 30] and rep["complexes"][0]["t"] == 5
    code, rep, _ = call(capsys, "random-walk", "hp2_a5", "--steps", "2", "--seed", "5")
    assert rep["steps"] == 2


def test_fixed_atlas_convert(capsys, tmp_path):
    code, rep, _ = call(capsys, "fixed", "L1", "--group", "C5_on_10")
    assert code == 0 and rep["vertices"] == 0
    code, rep, _ = call(capsys, "atlas", "--list")
    assert "hp2_a5" in rep["entries"] and "A5" in rep["groups"]
    js = tmp_path / "c.json"
    code, rep, _ = call(capsys, "atlas", "cp2_9", "--format", "json", "-o", str(js))
    code, rep, _ = call(capsys, "convert", str(js), str(tmp_path / "c.dat"))
    assert rep["count"] == 1 and len(load_dat((tmp_path / "c.dat").read_text())[0].facets) == 36


def test_usage_errors(capsys):
    code, rep, err = call(capsys, "check", "no_such_thing")
    assert code == 2 and "error" in rep
    assert run(["bogus"]) == 2
    capsys.readouterr()
    code, rep, err = call(capsys, "find", "--dim", "2", "--nverts", "6", "--group", "(1 2")
    assert code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "hp2kit", "atlas", "--list"], capture_output=True, text=True)
    assert res.returncode == 0 and "rp2_6" in json.loads(res.stdout)["entries"]
