import json
from types import SimpleNamespace

import pytest

from subenum import cli
from subenum.cli import main

TRIANGLE = "3\n0 1\n1 2\n0 2\n"
CLIQUE4 = "\n".join(f"{i} {j}" for i in range(4) for j in range(i + 1, 4)) + "\n"


@pytest.fixture
def k4_file(tmp_path):
    p = tmp_path / "k4.txt"
    p.write_text(CLIQUE4)
    return str(p)


@pytest.fixture
def tri_file(tmp_path):
    p = tmp_path / "tri.q"
    p.write_text(TRIANGLE)
    return str(p)


def test_run_count(k4_file, tri_file, capsys):
    assert main(["run", "--graph", k4_file, "--query", tri_file]) == 0
    assert capsys.readouterr().out.strip() == "4"


def test_run_count_strategies_and_workers(k4_file, tri_file, capsys):
    for extra in (
        ["--strategy", "eager"],
        ["--strategy", "online"],
        ["--workers", "4"],
        ["--workers", "2", "--nested", "--nested-threshold", "1"],
    ):
        assert main(["run", "--graph", k4_file, "--query", tri_file] + extra) == 0
        assert capsys.readouterr().out.strip() == "4"


def test_run_list_mode(k4_file, tri_file, capsys):
    assert main(["run", "--graph", k4_file, "--query", tri_file, "--mode", "list"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 4
    triples = {frozenset(int(tok) for tok in ln.split()) for ln in lines}
    assert triples == {frozenset(c) for c in ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))}
    for ln in lines:
        assert len(ln.split()) == 3


def test_run_vertex_variant(k4_file, tmp_path, capsys):
    q = tmp_path / "p3.q"
    q.write_text("3\n0 1\n1 2\n")
    # no induced path of length 2 inside a clique
    assert main(["run", "--graph", k4_file, "--query", str(q), "--variant", "vertex"]) == 0
    assert capsys.readouterr().out.strip() == "0"


def test_run_stats_out(k4_file, tri_file, tmp_path, capsys):
    out = tmp_path / "stats.json"
    assert (
        main(
            ["run", "--graph", k4_file, "--query", tri_file, "--strategy", "eager",
             "--stats-out", str(out)]
        )
        == 0
    )
    capsys.readouterr()
    doc = json.loads(out.read_text())
    assert doc["stats_version"] == 1
    assert doc["match_count"] == 4
    assert doc["strategy"] == "eager"


def test_compare_table(k4_file, tri_file, capsys):
    assert main(["compare", "--graph", k4_file, "--query", tri_file]) == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert lines[0].split() == [
        "strategy", "matches", "adjacency", "prefix", "pruned", "comparisons", "seconds",
    ]
    assert [ln.split()[0] for ln in lines[1:4]] == ["none", "eager", "online"]
    assert all(ln.split()[1] == "4" for ln in lines[1:4])
    assert "scanned vertices by original adjacency-list length:" in out


def test_compare_subset_and_stats_out(k4_file, tri_file, tmp_path, capsys):
    out = tmp_path / "cmp.json"
    assert (
        main(
            ["compare", "--graph", k4_file, "--query", tri_file,
             "--strategy", "none,eager", "--stats-out", str(out)]
        )
        == 0
    )
    capsys.readouterr()
    doc = json.loads(out.read_text())
    assert doc["stats_version"] == 1
    assert set(doc["strategies"]) == {"none", "eager"}
    assert doc["strategies"]["none"]["match_count"] == 4


def test_compare_count_mismatch_exits_3(k4_file, tri_file, capsys, monkeypatch):
    counts = iter([4, 5, 4])

    def fake_run(plan, graph, sink, cfg):
        return SimpleNamespace(match_count=next(counts))

    monkeypatch.setattr(cli, "_run_engine", fake_run)
    assert main(["compare", "--graph", k4_file, "--query", tri_file]) == 3
    err = capsys.readouterr().err
    assert "count mismatch" in err


def test_gen_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for path in (a, b):
        assert main(["gen", "er", "--n", "30", "--p", "0.2", "--seed", "7",
                     "--out", str(path)]) == 0
    capsys.readouterr()
    assert a.read_text() == b.read_text()
    assert a.read_text() != ""


def test_gen_edge_cases(tmp_path, capsys):
    empty = tmp_path / "empty.txt"
    assert main(["gen", "er", "--n", "10", "--p", "0.0", "--out", str(empty)]) == 0
    assert empty.read_text() == ""
    assert main(["gen", "clique", "--n", "4"]) == 0
    out = capsys.readouterr().out
    assert len(out.strip().splitlines()) == 6


def test_gen_to_stdout_round_trips(tmp_path, capsys):
    assert main(["gen", "powerlaw", "--n", "50", "--m", "3", "--seed", "1"]) == 0
    text = capsys.readouterr().out
    g_file = tmp_path / "pl.txt"
    g_file.write_text(text)
    assert main(["stats", "--graph", str(g_file)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["vertices"] == 50


def test_stats_k4(k4_file, capsys):
    assert main(["stats", "--graph", k4_file]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["vertices"] == 4 and doc["edges"] == 6
    assert doc["max_degree"] == 3 and doc["avg_degree"] == 3.0
    assert doc["triangles"] == 4
    assert doc["p1"] == 0.75
    assert abs(doc["p2"] - 4 * 4 / 144) < 1e-12
    assert doc["stats_version"] == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--graph", "/nonexistent", "--query", "/nonexistent"],
        ["run", "--graph", "GRAPH", "--query", "BADQUERY"],
        ["run", "--graph", "GRAPH", "--query", "QUERY", "--strategy", "static"],
        ["run", "--graph", "GRAPH", "--query", "QUERY", "--workers", "0"],
        ["run", "--graph", "GRAPH", "--query", "QUERY", "--nested-threshold", "0"],
        ["compare", "--graph", "GRAPH", "--query", "QUERY", "--strategy", ""],
        ["compare", "--graph", "GRAPH", "--query", "QUERY", "--strategy", "none,bogus"],
    ],
)
def test_usage_errors_exit_2(argv, k4_file, tri_file, tmp_path, capsys):
    bad_query = tmp_path / "bad.q"
    bad_query.write_text("not a query\n")
    argv = [
        {"GRAPH": k4_file, "QUERY": tri_file, "BADQUERY": str(bad_query)}.get(tok, tok)
        for tok in argv
    ]
    assert main(argv) == 2
    assert "error:" in capsys.readouterr().err


def test_bad_flag_exits_2(capsys):
    assert main(["run", "--bogus"]) == 2
    capsys.readouterr()


def test_missing_subcommand_exits_2(capsys):
    assert main([]) == 2
    capsys.readouterr()
