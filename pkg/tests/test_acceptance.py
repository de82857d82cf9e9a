"""Acceptance gate for the package.

One test per numbered criterion. Every test prints a single PASS/FAIL
line straight to the terminal (bypassing capture) so the gate can be
read off the log at a glance, then asserts. Thresholds live in
``lepart.verify`` next to the checks themselves and are not tuned here.

Criteria 1 and 7 carry wall-clock budgets; those are enforced too.
Criterion 9 is a subprocess test: the same command, same seed, must
produce byte-identical files across reruns and across --jobs 1 / 8.
"""

import subprocess
import sys
import time

import pytest

from lepart import verify


def _emit(capfd, number, name, checks, elapsed=None, budget=None):
    failed = [c for c in checks if not c.passed]
    over = budget is not None and elapsed > budget
    verdict = "FAIL" if (failed or over) else "PASS"
    with capfd.disabled():
        print(f"criterion {number} ({name}): {verdict}", flush=True)
    details = [
        f"{c.name}: measured={c.measured!r} expected={c.expected!r}" for c in failed
    ]
    if over:
        details.append(f"runtime {elapsed:.1f}s exceeds {budget:.0f}s budget")
    assert verdict == "PASS", f"criterion {number} ({name}): " + "; ".join(details)


def test_criterion_1_forest_law(capfd):
    start = time.perf_counter()
    checks = verify.criterion_forest_law()
    elapsed = time.perf_counter() - start
    _emit(capfd, 1, "forest law oracle", checks, elapsed, budget=120.0)


def test_criterion_2_path_law(capfd):
    _emit(capfd, 2, "killed walk path law", verify.criterion_path_law())


def test_criterion_3_block_law(capfd):
    _emit(capfd, 3, "block count law", verify.criterion_block_law())


def test_criterion_4_complete_formula(capfd):
    _emit(capfd, 4, "complete-graph formula", verify.criterion_complete_formula())


def test_criterion_5_scaling_limit(capfd):
    _emit(capfd, 5, "scaling limit", verify.criterion_scaling_limit())


def test_criterion_6_two_community_formula(capfd):
    _emit(capfd, 6, "two-community formula", verify.criterion_two_community_formula())


def test_criterion_7_phase_trends(capfd):
    start = time.perf_counter()
    checks = verify.criterion_phase_trends()
    elapsed = time.perf_counter() - start
    _emit(capfd, 7, "phase trends", checks, elapsed, budget=600.0)


def test_criterion_8_block_structure(capfd):
    _emit(capfd, 8, "block structure", verify.criterion_structure())


def _run(args, cwd):
    proc = subprocess.run(
        [sys.executable, "-m", "lepart", *args],
        cwd=cwd,
        capture_output=True,
        text=True,
        timeout=600,
    )
    assert proc.returncode == 0, proc.stderr
    return proc


def _bytes_for(tmp_path, label, args, outputs):
    """Run the CLI in a fresh directory, return the named output bytes."""
    rundir = tmp_path / label
    rundir.mkdir()
    _run(args, rundir)
    return {name: (rundir / name).read_bytes() for name in outputs}


@pytest.mark.parametrize(
    "name,args,outputs",
    [
        (
            "potential-mc",
            [
                "potential", "--model", "complete", "--N", "50", "--q", "1",
                "--mode", "mc", "--method", "forest", "--samples", "100000",
                "--seed", "5", "--jobs", "{jobs}", "--out", "pot.json",
            ],
            ["pot.json"],
        ),
        (
            "phase-scan",
            [
                "phase-scan", "--alpha", "1/2", "--beta", "1/5",
                "--sizes", "100,400", "--seed", "11", "--format", "csv",
                "--jobs", "{jobs}", "--out", "scan.csv",
            ],
            ["scan.csv"],
        ),
    ],
)
def test_criterion_9_determinism_jobs(capfd, tmp_path, name, args, outputs):
    variants = {}
    for label, jobs in (("j1a", "1"), ("j1b", "1"), ("j8a", "8"), ("j8b", "8")):
        concrete = [a.replace("{jobs}", jobs) for a in args]
        variants[label] = _bytes_for(tmp_path, label, concrete, outputs)
    reference = variants["j1a"]
    mismatches = [
        f"{label}:{fname}"
        for label, got in variants.items()
        for fname in outputs
        if got[fname] != reference[fname]
    ]
    ok = not mismatches
    with capfd.disabled():
        verdict = "PASS" if ok else "FAIL"
        print(f"criterion 9 (determinism, {name}): {verdict}", flush=True)
    assert ok, f"outputs differ from the --jobs 1 reference run: {mismatches}"


def test_criterion_9_determinism_sample_forest(capfd, tmp_path):
    args = [
        "sample-forest", "--model", "two-community", "--N", "10",
        "--w1", "1.0", "--w2", "0.2", "--q", "2", "--count", "3",
        "--seed", "9", "--out", "smp",
    ]
    outputs = ["smp_summary.json"] + [
        f"smp_{kind}_{i}.txt" for kind in ("forest", "partition") for i in range(3)
    ]
    first = _bytes_for(tmp_path, "run1", args, outputs)
    second = _bytes_for(tmp_path, "run2", args, outputs)
    mismatches = [name for name in outputs if first[name] != second[name]]
    ok = not mismatches
    with capfd.disabled():
        verdict = "PASS" if ok else "FAIL"
        print(f"criterion 9 (determinism, sample-forest): {verdict}", flush=True)
    assert ok, f"rerun changed bytes of: {mismatches}"
