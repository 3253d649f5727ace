import json

import pytest

from ecotour.cli import EXIT_EMPTY, EXIT_INPUT, EXIT_OK, main
from ecotour.fixtures import toy_network
from ecotour.netmodel import evaluate_tour, save_instance
from ecotour.report import read_frontier


@pytest.fixture
def toy_file(tmp_path):
    p = tmp_path / "toy.json"
    save_instance(toy_network(), p)
    return p


def test_solve_writes_outputs_and_is_reproducible(tmp_path, toy_file):
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        code = main(["solve", "--instance", str(toy_file), "--out", str(out), "--iterations", "2",
                     "--init-weights", "8", "--seed", "3", "--no-plot"])
        assert code == EXIT_OK
    a, b = ((o / "frontier.csv").read_text() for o in outs)
    assert a == b
    lines = (outs[0] / "progress.jsonl").read_text().splitlines()
    assert [json.loads(x)["iteration"] for x in lines] == [1, 2]


def test_frontier_csv_round_trip(tmp_path, toy_file):
    out = tmp_path / "o"
    assert main(["solve", "--instance", str(toy_file), "--out", str(out), "--iterations", "1",
                 "--init-weights", "8", "--no-plot"]) == EXIT_OK
    inst = toy_network()
    rows = read_frontier(out / "frontier.csv")
    assert rows
    for r in rows:
        t = evaluate_tour(r["node_sequence"], inst.graph, inst.windows)
        assert (t.turns, t.energy, t.penalty) == (r["turns"], pytest.approx(r["energy_kwh"]), 0)


def test_solve_plot(tmp_path, toy_file):
    out = tmp_path / "p"
    assert main(["solve", "--instance", str(toy_file), "--out", str(out), "--iterations", "1",
                 "--init-weights", "4"]) == EXIT_OK
    assert (out / "frontier.png").stat().st_size > 0


def test_exit_codes(tmp_path):
    assert main(["solve", "--instance", str(tmp_path / "missing.json"), "--out", str(tmp_path),
                 "--iterations", "1"]) == EXIT_INPUT
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["solve", "--instance", str(bad), "--out", str(tmp_path), "--iterations", "1"]) == EXIT_INPUT
    late = tmp_path / "late.json"
    save_instance(toy_network(deadline=5.0), late)
    out = tmp_path / "late"
    assert main(["solve", "--instance", str(late), "--out", str(out), "--iterations", "1",
                 "--init-weights", "4", "--no-plot"]) == EXIT_EMPTY
    last = json.loads((out / "progress.jsonl").read_text().splitlines()[-1])
    assert last["event"] == "empty"
    assert main(["exact", "--instance", str(late), "--out", str(out), "--revisit-cap", "2",
                 "--no-plot"]) == EXIT_EMPTY


def test_bad_arguments_exit_with_usage_error(toy_file):
    with pytest.raises(SystemExit) as e:
        main(["solve", "--instance", str(toy_file), "--init-frac", "1.5"])
    assert e.value.code == 2
    with pytest.raises(SystemExit):
        main(["solve", "--theta", "1,2"])


def test_exact_milp_and_builtin(tmp_path, toy_file):
    for backend in ("milp", "builtin"):
        out = tmp_path / backend
        assert main(["exact", "--instance", str(toy_file), "--out", str(out), "--revisit-cap", "2",
                     "--backend", backend, "--no-plot"]) == EXIT_OK
        rows = read_frontier(out / "frontier.csv")
        assert (4, 14.0) in [(r["turns"], r["energy_kwh"]) for r in rows]
        assert (out / "calls.jsonl").read_text().strip()


def test_lp_export_manifest(tmp_path, toy_file):
    out = tmp_path / "lp"
    assert main(["exact", "--instance", str(toy_file), "--out", str(out), "--backend", "lp-export"]) == EXIT_OK
    manifest = json.loads((out / "manifest.json").read_text())
    assert len(manifest["models"]) >= 2
    for m in manifest["models"]:
        assert (out / m["file"]).read_text().startswith("\\")


def test_environment_overrides(tmp_path, toy_file, monkeypatch):
    out = tmp_path / "env"
    monkeypatch.setenv("ECOTOUR_INSTANCE", str(toy_file))
    monkeypatch.setenv("ECOTOUR_ITERATIONS", "1")
    monkeypatch.setenv("ECOTOUR_INIT_WEIGHTS", "4")
    monkeypatch.setenv("ECOTOUR_OUT", str(out))
    assert main(["solve", "--no-plot"]) == EXIT_OK
    assert (out / "frontier.csv").exists()
    monkeypatch.setenv("ECOTOUR_ITERATIONS", "0")
    with pytest.raises(SystemExit):
        main(["solve", "--no-plot"])


def test_bench_command(tmp_path):
    from ecotour.bench.spb import format_spb, synthetic_spb
    suite = tmp_path / "suite"
    suite.mkdir()
    (suite / "tiny.txt").write_text(format_spb(*synthetic_spb(12, seed=2)))
    out = tmp_path / "bench"
    assert main(["bench", "--suite", str(suite), "--out", str(out), "--iterations", "1",
                 "--scenario", "20", "--no-plot"]) == EXIT_OK
    lines = (out / "report.csv").read_text().splitlines()
    assert len(lines) == 2 and lines[1].startswith("20,tiny,")
    assert main(["bench", "--suite", str(tmp_path / "nothing"), "--out", str(out)]) == EXIT_INPUT
