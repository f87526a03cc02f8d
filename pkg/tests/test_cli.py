import json
import subprocess
import sys

import pytest

from edd.cli import main
from edd.instance import serialize_instance

from conftest import DEMO_TEXT, deep_subtree_instance, dup_instance


@pytest.fixture
def demo_file(tmp_path):
    path = tmp_path / "demo.edd"
    path.write_text(DEMO_TEXT)
    return str(path)


@pytest.fixture
def dup_file(tmp_path):
    path = tmp_path / "dup.edd"
    path.write_text(serialize_instance(dup_instance()))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out


def test_check_ok(capsys, demo_file):
    code, out = run(capsys, "check", demo_file)
    assert code == 0 and out == "ok\n"


def test_check_reports_violations(capsys, tmp_path):
    path = tmp_path / "bad.edd"
    path.write_text(DEMO_TEXT.replace("AB 1 3 6", "AB 1 3 7"))
    code, out = run(capsys, "check", str(path))
    assert code == 1
    assert out.splitlines()[0].startswith("SUM_A:")
    assert "UNION_MISMATCH:" in out


def test_check_parse_error_exit_2(capsys, tmp_path):
    path = tmp_path / "syntax.edd"
    path.write_text("EDD 1\nA x\n")
    code, _out = run(capsys, "check", str(path))
    assert code == 2


def test_missing_file_exit_2(capsys):
    code, _out = run(capsys, "check", "/nonexistent/file.edd")
    assert code == 2


def test_solve_demo_default_golden(capsys, demo_file):
    code, out = run(capsys, "solve", demo_file)
    assert code == 0
    assert out == (
        "status: ok\n"
        "assignments: 1\n"
        "assignment: 0\n"
        "solution: 1\n"
        "piA: 9 12 15 37 17\n"
        "piB: 6 38 46\n"
        "paIdx: 1 2 3 5 4\n"
        "pbIdx: 1 2 3\n"
    )


def test_solve_demo_all_families_golden(capsys, demo_file):
    code, out = run(capsys, "solve", demo_file, "--all", "--emit-families")
    assert code == 0
    lines = out.splitlines()
    assert "family: 6 3 [12 15] 8 29 17" in lines
    assert lines.count("piB: 6 38 46") == 2
    assert "piA: 9 15 12 37 17" in lines


def test_solve_dup_shows_assignment(capsys, dup_file):
    code, out = run(capsys, "solve", dup_file, "--emit-families")
    assert code == 0
    lines = out.splitlines()
    assert "assignments: 2" in lines
    assert "assignment: 0" in lines
    assert "family: [4 8] 7 6 [5 7]" in lines


def test_solve_unsolvable_reason(capsys, tmp_path):
    path = tmp_path / "deep.edd"
    path.write_text(serialize_instance(deep_subtree_instance()))
    code, out = run(capsys, "solve", str(path))
    assert code == 1
    lines = out.splitlines()
    assert lines[0] == "status: no-solution"
    assert lines[1] == "reason: DEEP_SUBTREE"
    assert lines[2].startswith("witness: C")


def test_solve_truncation_exit_3(capsys, dup_file):
    code, out = run(capsys, "solve", dup_file, "--all", "--max-solutions", "2")
    assert code == 3
    assert "truncated: true" in out


def test_solve_json_mirrors_human(capsys, demo_file):
    code, out = run(capsys, "solve", demo_file, "--all", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["status"] == "ok"
    assert data["assignmentsTried"] == 1
    fam = data["families"][0]
    assert fam["assignment"] == 0
    assert fam["expansionCount"] == 2
    assert fam["family"] == [
        {"fixed": 6}, {"fixed": 3},
        {"block": [12, 15], "attachment": "B2"},
        {"fixed": 8}, {"fixed": 29}, {"fixed": 17}]
    assert [s["piA"] for s in fam["solutions"]] == [
        [9, 12, 15, 37, 17], [9, 15, 12, 37, 17]]
    assert fam["solutions"][0]["piC"] == [6, 3, 12, 15, 8, 29, 17]


def test_solve_dump_graph(capsys, demo_file, tmp_path):
    dump = tmp_path / "graph.txt"
    code, _out = run(capsys, "solve", demo_file, "--dump-graph", str(dump))
    assert code == 0
    lines = dump.read_text().splitlines()
    assert len(lines) == 14
    assert "B2 C12#1" in lines


def test_verify_valid_and_invalid(capsys, demo_file):
    code, out = run(capsys, "verify", demo_file, "--pa", "1 2 3 5 4", "--pb", "1,2,3")
    assert code == 0 and out == "valid\n"
    code, out = run(capsys, "verify", demo_file, "--pa", "1 2 3 4 5", "--pb", "1 2 3")
    assert code == 1 and out.startswith("invalid:")
    code, _out = run(capsys, "verify", demo_file, "--pa", "1 1 2 3 4", "--pb", "1 2 3")
    assert code == 2


def test_oracle_single(capsys, tmp_path):
    path = tmp_path / "one.edd"
    path.write_text("EDD 1\nA 5\nB 5\nAB 1 5\nBA 1 5\n")
    code, out = run(capsys, "oracle", str(path))
    assert code == 0
    assert out.splitlines()[0] == "solutions: 1"


def test_oracle_none(capsys, tmp_path):
    path = tmp_path / "deep.edd"
    path.write_text(serialize_instance(deep_subtree_instance()))
    code, out = run(capsys, "oracle", str(path))
    assert code == 1 and out == "solutions: 0\n"


def test_gen_cut_positions_golden(capsys, demo_file):
    code, out = run(capsys, "gen", "--total", "90",
                    "--cuts-a", "9,21,36,73", "--cuts-b", "6,44")
    assert code == 0
    assert out.splitlines()[0] == "EDD 1"
    assert "A 9 12 15 37 17" in out
    code2, out2 = run(capsys, "gen", "--total", "90",
                      "--cuts-a", "9,21,36,73", "--cuts-b", "6,44")
    assert out2 == out  # byte-identical across runs


def test_gen_seeded_with_sidecar(capsys, tmp_path):
    out_file = tmp_path / "inst.edd"
    side = tmp_path / "side.txt"
    for _ in range(2):
        code, _ = run(capsys, "gen", "--seed", "9", "--p", "3", "--q", "2",
                      "--total", "100", "--out", str(out_file), "--sidecar", str(side))
        assert code == 0
    text = out_file.read_text()
    assert text.startswith("EDD 1\n")
    gt = side.read_text().splitlines()
    assert gt[0].startswith("GT-A ") and gt[1].startswith("GT-B ")
    # sidecar reproduces the instance through the cut-position route
    cuts_a = gt[0].split()[1:]
    cuts_b = gt[1].split()[1:]
    code, out = run(capsys, "gen", "--total", "100",
                    "--cuts-a", " ".join(cuts_a), "--cuts-b", " ".join(cuts_b))
    assert sorted(out.splitlines()) == sorted(text.splitlines())


def test_gen_usage_errors(capsys):
    code, _ = run(capsys, "gen", "--total", "100", "--cuts-a", "5")
    assert code == 2
    code, _ = run(capsys, "gen", "--total", "100")
    assert code == 2
    code, _ = run(capsys, "gen", "--total", "3", "--seed", "1", "--p", "5", "--q", "5")
    assert code == 2


def test_reduce_hp_golden(capsys, tmp_path):
    gpath = tmp_path / "one.graph"
    gpath.write_text("GRAPH 1\n")
    code, out = run(capsys, "reduce-hp", str(gpath))
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "EDD 1"
    assert "A 6 6 5" in lines
    assert "# node A2 = t" in lines
    assert "# node A3 = z" in lines
    assert "# node B3 = t(1)" in lines


def test_reduce_hp_output_parses(capsys, tmp_path):
    gpath = tmp_path / "edge.graph"
    gpath.write_text("GRAPH 2\n1 2\n")
    out_file = tmp_path / "red.edd"
    code, _ = run(capsys, "reduce-hp", str(gpath), "--out", str(out_file))
    assert code == 0
    from edd.instance import parse_instance, validate_consistency
    inst = parse_instance(out_file.read_text())
    assert validate_consistency(inst).ok
    assert inst.a_lengths == (14, 14, 14, 7)


def test_extract_hp_end_to_end(capsys, tmp_path):
    gpath = tmp_path / "edge.graph"
    gpath.write_text("GRAPH 2\n1 2\n")
    red_file = tmp_path / "red.edd"
    run(capsys, "reduce-hp", str(gpath), "--out", str(red_file))

    code, out = run(capsys, "solve", str(red_file),
                    "--max-assignments", "100000", "--json")
    assert code == 0
    sol = json.loads(out)["families"][0]["solutions"][0]

    sol_file = tmp_path / "sol.txt"
    sol_file.write_text("PA " + " ".join(map(str, sol["paIdx"])) + "\n"
                        "PB " + " ".join(map(str, sol["pbIdx"])) + "\n")
    code, out = run(capsys, "extract-hp", str(gpath), str(sol_file))
    assert code == 0
    assert out in ("path: 1 2\n", "path: 2 1\n")


def test_extract_hp_rejects_invalid(capsys, tmp_path):
    gpath = tmp_path / "edge.graph"
    gpath.write_text("GRAPH 2\n1 2\n")
    red_file = tmp_path / "red.edd"
    run(capsys, "reduce-hp", str(gpath), "--out", str(red_file))
    sol_file = tmp_path / "sol.txt"
    sol_file.write_text("PA 4 2 3 1\nPB 1 2 3 4 5 6 7\n")
    code, out = run(capsys, "extract-hp", str(gpath), str(sol_file))
    assert code == 1


def test_quiet_suppresses_stdout(capsys, demo_file):
    code, out = run(capsys, "solve", demo_file, "--quiet")
    assert code == 0 and out == ""


def test_solve_output_accepted_by_verify(capsys, demo_file, dup_file):
    for path in (demo_file, dup_file):
        code, out = run(capsys, "solve", path, "--all", "--json")
        assert code == 0
        for fam in json.loads(out)["families"]:
            for sol in fam["solutions"]:
                pa = " ".join(map(str, sol["paIdx"]))
                pb = " ".join(map(str, sol["pbIdx"]))
                vcode, vout = run(capsys, "verify", path, "--pa", pa, "--pb", pb)
                assert vcode == 0 and vout == "valid\n"


def test_identical_invocations_identical_output(capsys, demo_file, dup_file):
    for argv in (["solve", demo_file, "--all", "--emit-families"],
                 ["solve", dup_file, "--all", "--json"],
                 ["oracle", dup_file],
                 ["check", demo_file]):
        first = run(capsys, *argv)
        second = run(capsys, *argv)
        assert first == second


def test_solve_assignment_cap_exit_3(capsys, tmp_path):
    from conftest import multi_dup_instance

    path = tmp_path / "dupes.edd"
    path.write_text(serialize_instance(multi_dup_instance()))
    code, out = run(capsys, "solve", str(path), "--max-assignments", "2")
    assert code == 3
    assert out.startswith("cap-exceeded:")


def test_module_entry_point(demo_file):
    proc = subprocess.run([sys.executable, "-m", "edd", "check", demo_file],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout == "ok\n"
