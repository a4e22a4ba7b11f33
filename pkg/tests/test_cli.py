import csv
import json

import pytest

from conftest import gamma_for_task_error
from jamsched.cli import main
from jamsched.experiments import CSV_HEADER

FAST = ["--ga-pop", "20", "--ga-gens", "5"]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def inst_090(tmp_path):
    d = {
        "arrivals": [{"id": "a0", "deadline_ms": 1000, "size_bits": 1, "load_cycles": 1_000_000}],
        "queued": [],
        "rb_count": 10,
        "sjnr": [[gamma_for_task_error(0.1)] * 10],
        "lambda": 0.5,
    }
    p = tmp_path / "inst.json"
    p.write_text(json.dumps(d))
    return p


@pytest.fixture
def drawn(tmp_path, capsys):
    p = tmp_path / "drawn.json"
    assert run(capsys, "generate", "--seed", 4, "--sjnr-db", 20, "--rb", 6, "--out", p)[0] == 0
    return p


def test_sweep_writes_csv_and_sidecar(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code, _, err = run(capsys, "sweep", "--scenario", "sjnr", "--rb", 10, "--runs", 2, "--seed", 42, "--out", out, *FAST)
    assert code == 0, err
    rows = list(csv.reader(out.open()))
    assert tuple(rows[0]) == CSV_HEADER
    assert len(rows) == 1 + 16 * 4
    assert {r[1] for r in rows[1:]} == {str(v) for v in range(0, 31, 2)}
    side = json.loads(out.with_suffix(".json").read_text())
    assert side["config"]["base_seed"] == 42 and side["config"]["fixed_rb"] == 10
    assert len(side["config_sha256"]) == 64
    assert side["silent_violations"] == 0
    assert side["provenance"]["seed"] == "--seed"


def test_sweep_rerun_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "--sjnr-points", "0,10,20", "--runs", 3, "--seed", 7, *FAST]
    assert run(capsys, *args, "--out", a)[0] == 0
    assert run(capsys, *args, "--out", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_missing_directory(tmp_path, capsys):
    target = tmp_path / "nope" / "r.csv"
    code, _, err = run(capsys, "sweep", "--seed", 1, "--runs", 1, "--out", target)
    assert code == 2
    assert "does not exist" in err
    assert not target.parent.exists()


def test_sweep_requires_seed(tmp_path, capsys):
    code, _, err = run(capsys, "sweep", "--runs", 1, "--out", tmp_path / "r.csv")
    assert code == 2 and "seed" in err
    assert not (tmp_path / "r.csv").exists()


def test_sweep_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# small RB sweep\nscenario = rb\nrb_points = 1:3:1\nruns = 2\nseed = 5\nstrategies = fcfs, stf\n")
    out = tmp_path / "r.csv"
    code, _, err = run(capsys, "sweep", "--config", cfg, "--runs", 1, "--out", out)
    assert code == 0, err
    rows = list(csv.reader(out.open()))
    assert len(rows) == 1 + 3 * 2
    assert all(r[9] == "1" for r in rows[1:])
    side = json.loads(out.with_suffix(".json").read_text())
    assert side["provenance"]["runs"] == "--runs"
    assert side["provenance"]["scenario"] == f"{cfg}:2"


def test_sweep_config_error_names_line(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("seed = 1\nruns = many\n")
    code, _, err = run(capsys, "sweep", "--config", cfg, "--out", tmp_path / "r.csv")
    assert code == 2
    assert f"{cfg}:2" in err and "runs" in err


def test_sweep_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("seed = 1\ncolour = blue\n")
    code, _, err = run(capsys, "sweep", "--config", cfg, "--out", tmp_path / "r.csv")
    assert code == 2 and f"{cfg}:2" in err


def test_sweep_flag_error_names_flag(tmp_path, capsys):
    code, _, err = run(capsys, "sweep", "--seed", 1, "--lambda", 2, "--out", tmp_path / "r.csv")
    assert code == 2 and "--lambda" in err


def test_sweep_infeasible_threshold_exit(tmp_path, capsys):
    cfg = tmp_path / "tight.cfg"
    cfg.write_text("seed = 3\nruns = 2\nsjnr_points = 10\nstrategies = fcfs, stf\n"
                   "deadline_ms = 1, 2\nload_cycles = 20000000, 30000000\n")
    out = tmp_path / "r.csv"
    code, _, err = run(capsys, "sweep", "--config", cfg, "--out", out)
    assert code == 3 and "infeasible" in err
    assert out.exists()
    assert json.loads(out.with_suffix(".json").read_text())["infeasible_ratio"] == 1.0


def test_eval_hand_computed(inst_090, tmp_path, capsys):
    sol = tmp_path / "sol.json"
    sol.write_text(json.dumps({"queue_position": {"a0": 1}, "rb_owner": ["a0"] + [None] * 9}))
    code, out, _ = run(capsys, "eval", inst_090, sol)
    assert code == 0
    ev = json.loads(out)["evaluation"]
    assert ev["objective"] == pytest.approx(0.095, rel=1e-8)
    assert ev["feasible"] is True


def test_eval_empty_solution_drops_everything(inst_090, tmp_path, capsys):
    sol = tmp_path / "empty.json"
    sol.write_text("")
    code, out, _ = run(capsys, "eval", inst_090, sol)
    assert code == 0
    payload = json.loads(out)
    assert payload["evaluation"]["drop_ratio"] == 1.0
    assert payload["evaluation"]["per_task"]["a0"]["completion_ms"] is None
    assert len(payload["input_sha256"]) == 64


def test_eval_unknown_task_id(inst_090, tmp_path, capsys):
    sol = tmp_path / "sol.json"
    sol.write_text(json.dumps({"queue_position": {"zz": 1}}))
    code, _, err = run(capsys, "eval", inst_090, sol)
    assert code == 2 and "zz" in err


def test_eval_malformed_json(inst_090, tmp_path, capsys):
    sol = tmp_path / "sol.json"
    sol.write_text("{not json")
    code, _, err = run(capsys, "eval", inst_090, sol)
    assert code == 2 and "malformed" in err


def test_eval_missing_instance_field(tmp_path, capsys):
    bad = tmp_path / "inst.json"
    bad.write_text(json.dumps({"arrivals": [{"deadline_ms": 1, "size_bits": 1}], "rb_count": 1}))
    sol = tmp_path / "sol.json"
    sol.write_text("{}")
    code, _, err = run(capsys, "eval", bad, sol)
    assert code == 2 and "load_cycles" in err


def test_solve_fcfs_deterministic(drawn, capsys):
    a = run(capsys, "solve", drawn, "--strategy", "fcfs")
    b = run(capsys, "solve", drawn, "--strategy", "fcfs")
    assert a[0] == 0 and a[1] == b[1]
    assert json.loads(a[1])["strategy"] == "fcfs"


def test_solve_ga_seeded_and_trace(drawn, tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    a = run(capsys, "solve", drawn, "--strategy", "ga", "--seed", 9, *FAST, "--trace-out", trace)
    b = run(capsys, "solve", drawn, "--strategy", "ga", "--seed", 9, *FAST)
    assert a[0] == b[0] == 0 and a[1] == b[1]
    lines = trace.read_text().splitlines()
    assert lines[0] == "generation,best_fitness,mean_fitness"
    assert len(lines) >= 2
    assert json.loads(a[1])["trace"]


def test_solve_ga_requires_seed(drawn, capsys):
    code, _, err = run(capsys, "solve", drawn, "--strategy", "ga-ntd")
    assert code == 2 and "seed" in err


def test_solve_exhaustive_budget_report(drawn, capsys):
    code, _, err = run(capsys, "solve", drawn, "--strategy", "exhaustive")
    assert code == 2 and "budget" in err


def test_solve_exhaustive_small(tmp_path, capsys):
    p = tmp_path / "micro.json"
    assert run(capsys, "generate", "--seed", 1, "--m", 2, "--m-queued", 1, "--rb", 3, "--sjnr-db", 20, "--out", p)[0] == 0
    code, out, _ = run(capsys, "solve", p, "--strategy", "exhaustive")
    assert code == 0 and json.loads(out)["strategy"] == "exhaustive"


def test_solve_unknown_strategy(drawn, capsys):
    code, _, err = run(capsys, "solve", drawn, "--strategy", "lifo")
    assert code == 2 and "lifo" in err


def test_generate_stdout_deterministic(capsys):
    a = run(capsys, "generate", "--seed", 3)
    b = run(capsys, "generate", "--seed", 3)
    assert a[0] == 0 and a[1] == b[1]
    d = json.loads(a[1])
    assert len(d["arrivals"]) == 5 and len(d["queued"]) == 3 and d["rb_count"] == 10
