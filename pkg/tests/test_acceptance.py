from __future__ import annotations

import json

import pytest

from conftest import ACCEPTANCE_LINES
from fbms.acceptance import CRITERIA, run_criteria


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    (result,) = run_criteria([number])
    ACCEPTANCE_LINES[number] = result.line()
    print(result.line())
    print(json.dumps(result.as_dict()["details"], default=str, sort_keys=True))
    assert result.error is None, result.error
    assert result.passed, result.details
    assert result.seconds <= result.budget_seconds
