"""Acceptance criteria; each prints one PASS/FAIL line (run with -s to see them live)."""

import time

import pytest

from locoutage.validation import CRITERIA, TOTAL_BUDGET_S, run_criterion

_ELAPSED = []


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    result = run_criterion(number, workers=1)
    _ELAPSED.append(result.seconds)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.detail


@pytest.mark.slow
def test_suite_runtime_budget(capsys):
    total = sum(_ELAPSED)
    with capsys.disabled():
        status = "PASS" if total < TOTAL_BUDGET_S else "FAIL"
        print(f"\n[{status}] criterion 11 suite runtime: {total:.0f}s of {TOTAL_BUDGET_S:.0f}s budget")
    assert len(_ELAPSED) == len(CRITERIA)
    assert total < TOTAL_BUDGET_S
