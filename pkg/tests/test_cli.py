import csv
import json

import pytest

from sepshort.cli import main
from sepshort.graph import gen_grid, load_dimacs, save_dimacs

THREE_VERTEX = "p sp 3 3\na 1 2 2\na 2 3 -5\na 1 3 1\n"


@pytest.fixture
def three_file(tmp_path):
    path = tmp_path / "g.gr"
    path.write_text(THREE_VERTEX)
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out


def test_solve_three_vertex(three_file, capsys):
    code, out = run_cli(capsys, "solve", "--input", three_file,
                        "--source", "1")
    assert code == 0
    assert out.splitlines()[:3] == ["v 1 0", "v 2 2", "v 3 -3"]


def test_solve_prints_path(three_file, capsys):
    code, out = run_cli(capsys, "solve", "--input", three_file,
                        "--source", "1", "--path", "3", "--r", "2")
    assert code == 0
    assert "p 3 1 2 3" in out


def test_solve_oracle_verdict(three_file, capsys):
    code, out = run_cli(capsys, "solve", "--input", three_file,
                        "--source", "1", "--oracle")
    assert code == 0
    assert "oracle exact-match" in out


def test_solve_unreachable_line(tmp_path, capsys):
    path = tmp_path / "u.gr"
    path.write_text("p sp 3 1\na 1 2 4\n")
    code, out = run_cli(capsys, "solve", "--input", str(path), "--source", "1")
    assert code == 0
    assert "v 3 UNREACHABLE" in out


def test_solve_negative_cycle_exit_2(tmp_path, capsys):
    path = tmp_path / "c.gr"
    path.write_text("p sp 3 3\na 1 2 1\na 2 3 -4\na 3 2 1\n")
    code, out = run_cli(capsys, "solve", "--input", str(path), "--source", "1")
    assert code == 2
    assert "negative cycle" in out
    ids = [int(tok) for tok in out.split(":")[1].split()]
    assert sorted(ids) == [2, 3]


def test_solve_missing_file_exit_1(capsys):
    code, _ = run_cli(capsys, "solve", "--input", "/nonexistent.gr",
                      "--source", "1")
    assert code == 1


def test_engine_flag(three_file, capsys):
    for engine in ("bf", "scaling"):
        code, out = run_cli(capsys, "solve", "--input", three_file,
                            "--source", "1", "--engine", engine)
        assert code == 0
        assert "v 3 -3" in out
    # with r=2 the replaced graph carries the negative arc, which the
    # nonnegative-only engine must reject
    code, _ = run_cli(capsys, "solve", "--input", three_file, "--source", "1",
                      "--engine", "dijkstra", "--r", "2")
    assert code == 1


def test_gen_and_divide_and_verify(tmp_path, capsys):
    gpath = str(tmp_path / "grid.gr")
    code, _ = run_cli(capsys, "gen", "grid:8x8:negperturb=6,3",
                      "--out", gpath, "--seed", "3")
    assert code == 0
    g = load_dimacs(open(gpath).read())
    assert g.n == 64

    dpath = str(tmp_path / "div.jsonl")
    code, out = run_cli(capsys, "divide", "--input", gpath, "--r", "16",
                        "--gamma", "0.5", "--out", dpath)
    assert code == 0
    assert "valid" in out

    code, out = run_cli(capsys, "verify", "--input", gpath,
                        "--division", dpath)
    assert code == 0
    assert "division check: pass" in out


def test_verify_tampered_division_exit_4(tmp_path, capsys):
    gpath = str(tmp_path / "grid.gr")
    run_cli(capsys, "gen", "grid:6x6:unit", "--out", gpath)
    dpath = str(tmp_path / "div.jsonl")
    run_cli(capsys, "divide", "--input", gpath, "--r", "9", "--gamma", "0.5",
            "--out", dpath)
    lines = open(dpath).read().splitlines()
    reg = json.loads(lines[1])
    reg["boundary"] = reg["boundary"][:-1]  # drop one boundary vertex
    lines[1] = json.dumps(reg)
    open(dpath, "w").write("\n".join(lines) + "\n")
    code, out = run_cli(capsys, "verify", "--input", gpath,
                        "--division", dpath)
    assert code == 4
    assert "boundary membership" in out


def test_verify_full_small_instance(tmp_path, capsys):
    gpath = str(tmp_path / "g.gr")
    run_cli(capsys, "gen", "sparse:60:negperturb=7,3", "--out", gpath,
            "--seed", "5")
    code, out = run_cli(capsys, "verify", "--input", gpath, "--full",
                        "--source", "1")
    assert code == 0
    assert "distance oracle: pass" in out
    assert "delta systems: pass" in out


def test_bench_rows_and_schema(tmp_path, capsys):
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("# tiny sweep\n"
                      "grid:6x6:negperturb=5,2\n"
                      "grid:8x5:negperturb=5,2\n"
                      "sparse:40:negperturb=6,3\n")
    out_csv = str(tmp_path / "bench.csv")
    code, _ = run_cli(capsys, "bench", "--corpus", str(corpus),
                      "--engines", "bf,scaling", "--out", out_csv,
                      "--seed", "2")
    assert code == 0
    rows = list(csv.reader(open(out_csv)))
    assert rows[0][0] == "version"
    assert len(rows) == 1 + 3 * 2  # header + sweep
    assert all(r[0] == "1" for r in rows[1:])
    assert all(r[-1] == "exact-match" for r in rows[1:])


def test_bench_missing_corpus_exit_1(capsys):
    code, _ = run_cli(capsys, "bench", "--corpus", "/no/such/file.txt")
    assert code == 1


def test_cli_deterministic_given_seed(tmp_path, capsys):
    gpath = str(tmp_path / "g.gr")
    run_cli(capsys, "gen", "sparse:80:negperturb=8,4", "--out", gpath,
            "--seed", "11")
    outs = []
    for _ in range(2):
        code, out = run_cli(capsys, "solve", "--input", gpath,
                            "--source", "3", "--seed", "7", "--path", "80")
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1]


def test_config_file_flag(tmp_path, three_file, capsys):
    cfgp = tmp_path / "pipe.cfg"
    cfgp.write_text("engine=bf\nbase_cap=8\n# comment\n")
    code, out = run_cli(capsys, "solve", "--input", three_file,
                        "--source", "1", "--config", str(cfgp))
    assert code == 0
    assert "v 3 -3" in out


def test_gen_writes_parseable_dimacs(tmp_path, capsys):
    gpath = str(tmp_path / "g.gr")
    run_cli(capsys, "gen", "grid:3x3:unit", "--out", gpath)
    g = load_dimacs(open(gpath).read())
    assert save_dimacs(g) == open(gpath).read()


def test_separator_spec_flag(three_file, capsys):
    code, out = run_cli(capsys, "solve", "--input", three_file,
                        "--source", "1", "--separator",
                        "strategy=local-search,c=5,alpha=0.7")
    assert code == 0
    assert "v 3 -3" in out
