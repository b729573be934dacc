"""The ten acceptance criteria at their stated tolerances and time budgets.

Each test prints one line, ``criterion N PASS|FAIL ...``; run with ``-s`` to
see them as they finish.
"""
import warnings

import pytest

from hadamardopt.acceptance import CRITERIA, run_criterion
from hadamardopt.errors import NotStabilized


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA], ids=[f"C{c[0]}" for c in CRITERIA])
def test_criterion(number, capsys):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NotStabilized)
        res = run_criterion(number)
    with capsys.disabled():
        print(f"\n{res.line()}")
    failed = [(name, detail) for name, ok, detail in res.checks if not ok]
    assert res.error is None, res.error
    assert not failed, failed
    assert res.seconds < res.budget, f"{res.seconds:.1f}s over the {res.budget:.0f}s budget"
