from __future__ import annotations

import pytest

from symloc.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    result = run_criterion(number)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.detail


def test_all_criteria_registered():
    assert sorted(CRITERIA) == list(range(1, 17))
