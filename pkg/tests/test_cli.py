import json
import subprocess
import sys

import pytest

from lapdist.cli import run
from lapdist.dot import rep_to_dot, tree_to_dot
from lapdist.gpp import expand
from lapdist.trace_io import read_trace, replay_trace, trace_to_records, write_trace
from lapdist.transforms import prototype, transform
from lapdist.tree import canonical_code, format_edge_list, path_tree, random_tree, star_tree


@pytest.fixture
def p3(tmp_path):
    path = tmp_path / "p3.tree"
    path.write_text("3\n0 1\n1 2\n")
    return str(path)


def _run(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_sigma_p3(capsys, p3):
    code, out, _ = _run(capsys, "sigma", p3)
    assert code == 0
    assert out.strip() == "n=3 d_n=4/3 m_below=2 sigma=1"


def test_sigma_json_and_float(capsys, p3):
    code, out, _ = _run(capsys, "sigma", p3, "--float", "--json")
    assert code == 0
    assert json.loads(out) == {"n": 3, "d_n": "4/3", "m_below": 2, "sigma": 1}


def test_float_refuses_ambiguous(capsys, p3):
    code, out, err = _run(capsys, "count", p3, "--lo", "0", "--hi", "1", "--float")
    assert code == 2 and out == "" and "--exact" in err


def test_count(capsys, p3):
    code, out, _ = _run(capsys, "count", p3, "--lo", "0", "--hi", "2")
    assert code == 0 and out.strip() == "n=3 m[0, 2)=2"
    code, out, _ = _run(capsys, "count", p3, "--lo", "1", "--hi", "3", "--hi-closed", "--lo-open")
    assert out.strip() == "n=3 m(1, 3]=1"
    code, _, err = _run(capsys, "count", p3, "--lo", "3", "--hi", "1")
    assert code == 2


def test_malformed_file_reports_line(capsys, tmp_path):
    bad = tmp_path / "bad.tree"
    bad.write_text("4\n0 1\n1 2\n2 two\n")
    code, _, err = _run(capsys, "sigma", str(bad))
    assert code == 2 and "line 4" in err
    dup = tmp_path / "dup.tree"
    dup.write_text("3\n0 1\n0 1\n")
    code, _, err = _run(capsys, "sigma", str(dup))
    assert code == 2 and "duplicate_edge" in err
    code, _, err = _run(capsys, "sigma", str(tmp_path / "missing.tree"))
    assert code == 2


def test_usage_errors(capsys, p3):
    assert _run(capsys, "sigma", p3, "--bogus")[0] == 2
    assert _run(capsys)[0] == 2
    assert _run(capsys, "nonsense")[0] == 2
    assert _run(capsys, "verify", "--max-n", "30")[0] == 2
    assert _run(capsys, "verify", "--max-n", "8", "--jobs", "0")[0] == 2
    assert _run(capsys, "prototype", "--n", "5")[0] == 2


def test_prototype_dot(capsys, tmp_path):
    dot = tmp_path / "out.dot"
    code, out, _ = _run(capsys, "prototype", "--n", "9", "--dot", str(dot))
    assert code == 0 and "P_0*S_2 ⊕ P_0*S_2" in out and "sigma=4" in out
    text = dot.read_text()
    edges = [line for line in text.splitlines() if " -- " in line]
    assert len(edges) == 8
    nodes = {int(line.strip().split()[0].rstrip(";")) for line in text.splitlines() if line.strip()[:1].isdigit() and " -- " not in line}
    assert nodes == set(range(9))
    deg = {}
    for e in edges:
        u, v = e.strip(" ;").split(" -- ")
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    assert max(deg.values()) == 4


def test_verify_output(capsys):
    code, out, _ = _run(capsys, "verify", "--max-n", "10", "--jobs", "4")
    assert code == 0
    assert "106 trees at n=10, min margin 0, 0 violations" in out.splitlines()


def test_verify_json_and_pipeline(capsys):
    code, out, _ = _run(capsys, "verify", "--max-n", "9", "--pipeline", "--json")
    assert code == 0
    d = json.loads(out)
    assert d["per_n"] == {"8": 23, "9": 47} and d["violations"] == []


def test_transform_trace_and_replay(capsys, tmp_path):
    tree_file = tmp_path / "t.tree"
    tree_file.write_text(format_edge_list(random_tree(40, 12)))
    trace_file = tmp_path / "t.jsonl"
    dot_file = tmp_path / "final.dot"
    code, out, _ = _run(capsys, "transform", str(tree_file), "--trace", str(trace_file), "--dot", str(dot_file))
    assert code == 0 and out.splitlines()[-1].startswith("final:")
    records = [json.loads(l) for l in trace_file.read_text().splitlines()]
    assert records[0]["kind"] == "initial" and records[-1]["kind"] == "final"
    for r in records[1:-1]:
        assert {"step_index", "kind", "vertex", "before", "after", "sigma_before", "sigma_after"} <= set(r)
    code, out, _ = _run(capsys, "transform", "--replay", str(trace_file), "--json")
    assert code == 0
    assert json.loads(out)["canonical"] == records[-1]["canonical"]
    assert "box" in dot_file.read_text()


def test_replay_rejects_tampered_trace(capsys, tmp_path):
    trace = transform(random_tree(25, 1))
    records = trace_to_records(trace)
    i = next(k for k, r in enumerate(records) if r.get("kind") == "StarStarRegroup" or r.get("kind") == "StarUp")
    records[i]["after"] = "P_7*S_7"
    path = tmp_path / "bad.jsonl"
    path.write_text("\n".join(json.dumps(r) for r in records))
    code, _, err = _run(capsys, "transform", "--replay", str(path))
    assert code == 1 and "diverged" in err
    path.write_text("{}\n")
    assert _run(capsys, "transform", "--replay", str(path))[0] == 2


def test_transform_small_tree_is_usage_error(capsys, p3):
    assert _run(capsys, "transform", p3)[0] == 2


def test_transform_violation_exit_code(capsys, tmp_path, monkeypatch):
    import lapdist.cli as cli
    from lapdist.transforms import ProperViolation

    def broken(tree, verify=None):
        raise ProperViolation("StarUp at 0 lowered sigma 5 -> 4", [])

    monkeypatch.setattr(cli, "transform", broken)
    f = tmp_path / "t.tree"
    f.write_text(format_edge_list(path_tree(9)))
    code, _, err = _run(capsys, "transform", str(f), "--trace", str(tmp_path / "w.jsonl"))
    assert code == 1 and "lowered sigma" in err and "9\n0 1" in err
    assert json.loads((tmp_path / "w.jsonl").read_text().splitlines()[0])["kind"] == "violation"


def test_verify_violation_exit_code(capsys, monkeypatch):
    import lapdist.cli as cli
    from lapdist.enumerate import VerifyReport, Violation

    def fake(n_max, workers):
        return VerifyReport((2, n_max), 1, [Violation(5, ((0, 1),), {"m_below_dn": 2})], -1, 0.0, {5: 1}, {5: -1})

    monkeypatch.setattr(cli, "verify_conjecture", fake)
    code, out, err = _run(capsys, "verify", "--max-n", "5")
    assert code == 1 and "m_below_dn" in err


def test_bench(capsys, monkeypatch):
    monkeypatch.setenv("LAPDIST_SEED", "17")
    code, out, _ = _run(capsys, "bench", "--n", "5000", "--json")
    d = json.loads(out)
    assert code == 0 and d["seed"] == 17
    assert d["negative"] + d["positive"] + d["ambiguous"] == 5000
    code, out, _ = _run(capsys, "bench", "--n", "300", "--mode", "exact", "--seed", "3")
    assert code == 0 and "seed=3" in out
    monkeypatch.setenv("LAPDIST_SEED", "x")
    assert _run(capsys, "bench", "--n", "10")[0] == 2


def test_enumerate(capsys):
    code, out, _ = _run(capsys, "enumerate", "--n", "6", "--min-n", "4", "--count", "--jobs", "2")
    assert code == 0 and out.splitlines() == ["2 trees at n=4", "3 trees at n=5", "6 trees at n=6"]
    code, out, _ = _run(capsys, "enumerate", "--n", "5", "--json")
    assert len(out.splitlines()) == 3
    code, out, _ = _run(capsys, "enumerate", "--n", "4", "--dot")
    assert out.count("graph T") == 2


def test_trace_io_round_trip(tbar):
    import io

    trace = transform(tbar, verify=False)
    buf = io.StringIO()
    write_trace(trace, buf)
    again = read_trace(buf.getvalue().splitlines())
    rep, tree = replay_trace(again)
    assert rep.render() == trace.final.render()
    assert canonical_code(tree) == canonical_code(expand(prototype(53)))


def test_dot_shapes():
    text = rep_to_dot(prototype(10))
    assert text.count("shape=box") == 2
    assert "peripheries=2" in text
    plain = tree_to_dot(star_tree(4))
    assert plain.count(" -- ") == 3 and "box" not in plain


def test_module_entry_point(tmp_path):
    f = tmp_path / "p.tree"
    f.write_text("3\n0 1\n1 2\n")
    proc = subprocess.run([sys.executable, "-m", "lapdist", "sigma", str(f)], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "n=3 d_n=4/3 m_below=2 sigma=1"
