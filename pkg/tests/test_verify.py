"""Shape and plumbing of the self-check battery.

The heavy checks themselves run in test_acceptance.py; here we only pin
the suite layout and the failure paths that the CLI relies on.
"""

import pytest

from lepart.verify import (
    SUITES,
    CheckResult,
    criterion_scaling_limit,
    run_suite,
)


def test_check_result_serializes():
    check = CheckResult(name="x", passed=True, measured="1", expected="<= 2")
    assert check.as_dict() == {
        "name": "x",
        "passed": True,
        "measured": "1",
        "expected": "<= 2",
    }


def test_unknown_suite_is_rejected():
    with pytest.raises(ValueError):
        run_suite("everything")


def test_suite_names_are_pinned():
    assert SUITES == ("oracle", "formulas", "phase")


def test_checks_carry_their_evidence():
    for check in criterion_scaling_limit():
        assert isinstance(check, CheckResult)
        assert check.name
        assert check.measured
        assert check.expected


def test_user_graph_failures_are_reported_not_raised(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("not a graph")
    results = run_suite("oracle", extra_graphs=[("user-graph", str(bad))])
    broken = [r for r in results if "user-graph" in r.name]
    assert broken
    assert not any(r.passed for r in broken)
