"""End-to-end runs of the command-line interface."""

import json
import os
import subprocess
import sys

import pytest

K2_TEXT = "2 1\n0 1 1.0\n"


def run_cli(args, cwd, env_extra=None, check=None):
    env = dict(os.environ)
    env.pop("LEP_SEED", None)
    if env_extra:
        env.update(env_extra)
    proc = subprocess.run(
        [sys.executable, "-m", "lepart", *args],
        cwd=cwd,
        env=env,
        capture_output=True,
        text=True,
        timeout=300,
    )
    if check is not None:
        assert proc.returncode == check, (proc.stdout, proc.stderr)
    return proc


def test_exact_complete_potential(tmp_path):
    proc = run_cli(
        ["potential", "--model", "complete", "--N", "3", "--q", "1"],
        tmp_path, check=0,
    )
    record = json.loads(proc.stdout)
    assert record["estimate"] == pytest.approx(0.3125, abs=1e-12)
    assert record["method"] == "exact"
    assert record["runtime_ms"] is None
    assert record["config"]["target"] == {"model": "complete", "N": 3, "w": 1.0}
    assert "finished in" in proc.stderr


def test_exact_two_community_needs_star(tmp_path):
    base = ["potential", "--model", "two-community", "--N", "4",
            "--w1", "1.0", "--w2", "0.25", "--q", "1"]
    run_cli(base, tmp_path, check=1)
    proc = run_cli(base + ["--star", "in"], tmp_path, check=0)
    record = json.loads(proc.stdout)
    assert 0.0 < record["estimate"] < 1.0
    assert record["config"]["star"] == "in"


def test_enum_mode_on_graph_file(tmp_path):
    graph_file = tmp_path / "k2.txt"
    graph_file.write_text(K2_TEXT)
    proc = run_cli(
        ["potential", "--mode", "enum", "--graph", str(graph_file), "--q", "2"],
        tmp_path, check=0,
    )
    record = json.loads(proc.stdout)
    assert record["estimate"] == pytest.approx(0.5, abs=1e-12)
    assert record["method"] == "enumeration"
    assert record["config"]["x"] == 0 and record["config"]["y"] == 1


def test_enum_mode_rejects_large_targets(tmp_path):
    proc = run_cli(
        ["potential", "--mode", "enum", "--model", "complete", "--N", "13", "--q", "1"],
        tmp_path, check=1,
    )
    assert "12" in proc.stderr


def test_mc_mode_record_shape(tmp_path):
    proc = run_cli(
        ["potential", "--model", "complete", "--N", "8", "--q", "1",
         "--mode", "mc", "--samples", "4000", "--seed", "3"],
        tmp_path, check=0,
    )
    record = json.loads(proc.stdout)
    assert record["method"] == "monte-carlo/forest"
    assert record["n"] == 4000
    assert record["seed"] == 3
    assert record["stderr"] > 0.0
    assert "jobs" not in record["config"]


def test_seed_env_fallback_matches_flag(tmp_path):
    args = ["potential", "--model", "complete", "--N", "6", "--q", "1",
            "--mode", "mc", "--samples", "2000"]
    via_flag = run_cli(args + ["--seed", "42"], tmp_path, check=0)
    via_env = run_cli(args, tmp_path, env_extra={"LEP_SEED": "42"}, check=0)
    assert via_flag.stdout == via_env.stdout


def test_invalid_seed_env_is_a_usage_error(tmp_path):
    proc = run_cli(
        ["potential", "--model", "complete", "--N", "3", "--q", "1",
         "--mode", "mc", "--samples", "10"],
        tmp_path, env_extra={"LEP_SEED": "soon"}, check=1,
    )
    assert "LEP_SEED" in proc.stderr


@pytest.mark.parametrize(
    "args",
    [
        ["potential", "--model", "complete", "--N", "3"],
        ["potential", "--model", "complete", "--N", "3", "--q", "0"],
        ["potential", "--model", "complete", "--N", "3", "--q", "1", "--x", "0"],
        ["potential", "--q", "1"],
        ["potential", "--model", "complete", "--N", "0", "--q", "1"],
        ["sample-forest", "--model", "complete", "--N", "3", "--q", "1", "--count", "0"],
        ["phase-scan", "--alpha", "1/2"],
        ["phase-scan", "--alpha", "1/2", "--beta", "zero"],
        ["phase-scan", "--alpha", "1/2", "--beta", "1/5", "--sizes", "1,4"],
        ["no-such-command"],
    ],
)
def test_usage_errors_exit_one(tmp_path, args):
    run_cli(args, tmp_path, check=1)


def test_graph_and_model_are_exclusive(tmp_path):
    graph_file = tmp_path / "k2.txt"
    graph_file.write_text(K2_TEXT)
    run_cli(
        ["potential", "--graph", str(graph_file), "--model", "complete",
         "--N", "2", "--q", "1"],
        tmp_path, check=1,
    )


def test_sample_forest_writes_files(tmp_path):
    proc = run_cli(
        ["sample-forest", "--model", "two-community", "--N", "5",
         "--w1", "1.0", "--w2", "0.1", "--q", "2", "--count", "2", "--seed", "8"],
        tmp_path, check=0,
    )
    assert "wrote 2 forests" in proc.stderr
    summary = json.loads((tmp_path / "sample_summary.json").read_text())
    assert len(summary["samples"]) == 2
    for record in summary["samples"]:
        forest_text = (tmp_path / record["forest_file"]).read_text()
        partition_text = (tmp_path / record["partition_file"]).read_text()
        assert len(forest_text.splitlines()) == 10
        labels = [int(line.split()[1]) for line in partition_text.splitlines()]
        assert record["n_blocks"] == len(set(labels))
        assert sorted(record["block_sizes"], reverse=True) == record["block_sizes"]
        assert all(0.5 <= p <= 1.0 for p in record["block_purity"])


def test_phase_scan_single_point_csv(tmp_path):
    proc = run_cli(
        ["phase-scan", "--alpha", "1/2", "--beta", "1/5", "--sizes", "20,40"],
        tmp_path, check=0,
    )
    lines = proc.stdout.splitlines()
    assert lines[0].startswith("# config=")
    assert lines[1] == "alpha,beta,regime,N,u_in,u_in_err,u_out,u_out_err,gap"
    assert len(lines) == 4
    first = lines[2].split(",")
    assert first[:4] == ["1/2", "1/5", "e", "20"]


def test_phase_scan_json_records(tmp_path):
    proc = run_cli(
        ["phase-scan", "--alpha", "4/5", "--beta", "1/2", "--sizes", "16",
         "--format", "json"],
        tmp_path, check=0,
    )
    payload = json.loads(proc.stdout)
    assert payload["runtime_ms"] is None
    (row,) = payload["rows"]
    assert row["regime"] == "f"
    assert row["method"] == "exact"
    assert row["limit_in"] == 1.0


def test_verify_formulas_suite_passes(tmp_path):
    proc = run_cli(["verify", "--suite", "formulas"], tmp_path, check=0)
    report = json.loads(proc.stdout)
    assert report["passed"] is True
    assert report["n_failed"] == 0
    assert report["n_checks"] > 20


def test_verify_flags_corrupt_graph(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("2 1\n0 1 -1.0\n")
    proc = run_cli(
        ["verify", "--suite", "oracle", "--graph", str(bad), "--out", "report.json"],
        tmp_path,
    )
    assert proc.returncode == 2
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["passed"] is False
    assert any("user-graph" in c["name"] for c in report["checks"] if not c["passed"])


def test_version_flag(tmp_path):
    proc = run_cli(["--version"], tmp_path, check=0)
    assert proc.stdout.startswith("lepart ")
