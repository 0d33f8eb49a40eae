import csv
import json
import subprocess
import sys
import time

import pytest

from commonfix.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, main

GARCIA = {"catalog": "garcia", "lambda": 0.5}
UNIT = {"interval": [0.0, 1.0]}
SOLVE = {
    "domain": UNIT,
    "maps": {"t": {"affine": {"scale": 0.5, "offset": 0.0}}, "T": {"interval_scaling": {"c": 0.5}}},
    "lambda": 0.5,
}

CONFIGS = {
    "C_lambda": ("check-conditions", {"map": GARCIA, "condition": "C_lambda", "lambda": 0.5,
                                      "sample": {"n": 41, "k": 100}}),
    "E": ("check-conditions", {"map": GARCIA, "condition": "E", "mu": 1.25, "sample": {"n": 41, "k": 100}}),
    "iterate": ("iterate", {"map": GARCIA, "x1": 1.0, "r": 0.5}),
    "iterate_multi": ("iterate", {"map": {"catalog": "mv5"}, "x1": 5.0, "lambda": 0.5}),
    "center": ("asymptotic-center", {"domain": UNIT, "sequence": [0, 1] * 20}),
    "commuting": ("check-commuting", SOLVE),
    "solve": ("solve-common", SOLVE),
}


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def run(tmp_path, sub, cfg, *extra):
    out = tmp_path / "out.json"
    code = main([sub, "--config", write(tmp_path, cfg), "--out", str(out), *extra])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def test_suzuki_condition_C_passes(tmp_path):
    code, rep = run(tmp_path, "check-conditions", {"catalog": "suzuki", "condition": "C"})
    assert code == EXIT_OK and rep["satisfied"]


def test_suzuki_nonexpansive_fails_with_witness(tmp_path):
    code, rep = run(tmp_path, "check-conditions", {"catalog": "suzuki", "condition": "nonexpansive"})
    assert code == EXIT_FAIL and not rep["satisfied"]
    assert 3.0 in (rep["worst"]["x"][0], rep["worst"]["y"][0])


def test_suzuki_check_runs_under_five_seconds(tmp_path):
    cfg = write(tmp_path, {"catalog": "suzuki", "condition": "C"})
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "commonfix.cli", "check-conditions", "--config", cfg],
                          capture_output=True, text=True)
    assert time.perf_counter() - t0 < 5.0
    assert proc.returncode == EXIT_OK and json.loads(proc.stdout)["satisfied"]


@pytest.mark.parametrize("key", sorted(CONFIGS))
def test_each_subcommand_runs(tmp_path, key):
    sub, cfg = CONFIGS[key]
    code, rep = run(tmp_path, sub, cfg)
    assert code == EXIT_OK and rep is not None


@pytest.mark.parametrize("key,field", [
    ("C_lambda", "map"), ("C_lambda", "condition"), ("C_lambda", "lambda"), ("E", "mu"),
    ("iterate", "x1"), ("iterate", "r"), ("iterate_multi", "lambda"), ("center", "sequence"),
    ("center", "domain"), ("solve", "domain"), ("solve", "maps.t"), ("solve", "maps.T"), ("solve", "lambda"),
])
def test_missing_field_is_a_config_error(tmp_path, capsys, key, field):
    sub, cfg = CONFIGS[key]
    cfg = json.loads(json.dumps(cfg))
    if "." in field:
        head, tail = field.split(".")
        del cfg[head][tail]
    else:
        del cfg[field]
    code, _ = run(tmp_path, sub, cfg)
    assert code == EXIT_CONFIG
    assert f"'{field}'" in capsys.readouterr().err


@pytest.mark.parametrize("sub,cfg,field", [
    ("check-conditions", {"map": GARCIA, "condition": "D"}, "condition"),
    ("check-conditions", {"map": GARCIA, "condition": "E", "mu": 0.5}, "mu"),
    ("check-conditions", {"map": {"catalog": "nope"}, "condition": "C"}, "map"),
    ("iterate", {"map": GARCIA, "x1": 1.0, "r": 1.5}, "r"),
    ("iterate", {"map": GARCIA, "x1": 2.0, "r": 0.5}, "x1"),
    ("solve-common", {**SOLVE, "lambda": 1.0}, "lambda"),
    ("check-conditions", {"map": GARCIA, "condition": "C", "sample": {"n": -1}}, "sample.n"),
])
def test_invalid_values_are_config_errors(tmp_path, capsys, sub, cfg, field):
    code, _ = run(tmp_path, sub, cfg)
    assert code == EXIT_CONFIG
    assert f"'{field}'" in capsys.readouterr().err


def test_bad_files_and_flags(tmp_path, capsys):
    assert main(["iterate", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["iterate", "--config", str(bad)]) == EXIT_CONFIG
    assert main(["iterate"]) == EXIT_CONFIG
    assert main(["frobnicate"]) == EXIT_CONFIG
    cfg = write(tmp_path, CONFIGS["iterate"][1])
    assert main(["iterate", "--config", cfg, "--tol", "-1"]) == EXIT_CONFIG
    assert main(["iterate", "--config", cfg, "--threads", "0"]) == EXIT_CONFIG
    capsys.readouterr()


def test_threads_flag(tmp_path):
    code, rep = run(tmp_path, *CONFIGS["iterate"], "--threads", "1")
    assert code == EXIT_OK and rep["status"] == "converged"


def test_tol_flag_overrides_config(tmp_path):
    _, loose = run(tmp_path, *CONFIGS["iterate"], "--tol", "1e-2")
    _, tight = run(tmp_path, *CONFIGS["iterate"])
    assert loose["iterations"] < tight["iterations"]


def test_budget_exhaustion_exit_code(tmp_path):
    code, rep = run(tmp_path, "iterate", {**CONFIGS["iterate"][1], "budget": 3})
    assert code == EXIT_FAIL and rep["status"] == "budget_exhausted"


@pytest.mark.parametrize("key", ["iterate", "iterate_multi", "solve", "C_lambda", "center"])
def test_output_is_byte_identical_across_runs(tmp_path, key):
    sub, cfg = CONFIGS[key]
    path = write(tmp_path, cfg)
    blobs = []
    for i in range(2):
        d = tmp_path / f"run{i}"
        d.mkdir()
        assert main([sub, "--config", path, "--out", str(d / "out.json"), "--trace-dir", str(d)]) == EXIT_OK
        blobs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    assert blobs[0] == blobs[1]


def test_trace_files(tmp_path):
    run(tmp_path, *CONFIGS["iterate"], "--trace-dir", str(tmp_path / "tr"))
    rows = list(csv.reader((tmp_path / "tr" / "trace.csv").open()))
    assert rows[0] == ["n", "x", "y", "residual"] and rows[1][:2] == ["1", "1.0"]
    run(tmp_path, *CONFIGS["solve"], "--trace-dir", str(tmp_path / "sv"))
    assert sorted(p.name for p in (tmp_path / "sv").iterdir()) == ["inner.csv", "outer.csv"]


def test_solver_abort_exit_code(tmp_path):
    cfg = {**SOLVE, "maps": {"t": SOLVE["maps"]["t"], "T": {"constant_set": {"interval": [1.0, 1.0]}}}}
    code, rep = run(tmp_path, "solve-common", cfg)
    assert code == EXIT_FAIL
    assert rep["status"] == "aborted" and rep["stage"] == "commuting"
    assert rep["witness"]["x"] == [1.0]


def test_commuting_failure_exit_code(tmp_path):
    cfg = {**SOLVE, "maps": {"t": SOLVE["maps"]["t"], "T": {"constant_set": {"interval": [1.0, 1.0]}}}}
    code, rep = run(tmp_path, "check-commuting", cfg)
    assert code == EXIT_FAIL and not rep["satisfied"]


def test_asymptotic_center_with_regularity(tmp_path):
    code, rep = run(tmp_path, "asymptotic-center", {**CONFIGS["center"][1], "regularity": {"K": 16}})
    assert code == EXIT_OK
    assert rep["radius"] == pytest.approx(0.5, abs=1e-4) and rep["regularity"]["regular"] is False


def test_space_section(tmp_path):
    cfg = {"domain": {"polytope": [[0, 0], [1, 0], [0, 1]]}, "space": {"dimension": 2, "p": "inf"},
           "sequence": [[0, 0], [1, 0]] * 5}
    code, rep = run(tmp_path, "asymptotic-center", cfg)
    assert code == EXIT_OK and rep["radius"] == pytest.approx(0.5, abs=1e-4)
    cfg["space"]["p"] = 3
    assert run(tmp_path, "asymptotic-center", cfg)[0] == EXIT_OK
    cfg["space"]["dimension"] = 1
    assert run(tmp_path, "asymptotic-center", cfg)[0] == EXIT_CONFIG


def test_reproduce_subcommand_table(tmp_path, capsys):
    assert main(["reproduce-paper", "--out", str(tmp_path / "suite.json")]) == EXIT_OK
    out = capsys.readouterr().out
    lines = [ln for ln in out.splitlines() if ln.startswith(("[PASS]", "[FAIL]"))]
    assert len(lines) == 9 and all(ln.startswith("[PASS]") for ln in lines)
    rep = json.loads((tmp_path / "suite.json").read_text())
    assert rep["passed"] and [c["id"] for c in rep["criteria"]] == list(range(1, 10))
    assert all("seconds" not in c for c in rep["criteria"])
