"""The fourteen acceptance criteria, one test each.

Every check prints a single ``[PASS]``/``[FAIL]`` line with its measured
values; the lines are collected again at the end of the pytest run.  Run the
file directly (``python3 tests/test_acceptance.py``) for the report alone.
"""

import sys

import pytest

from percolab.suites import SUITES, run_check

REPORT = []


@pytest.mark.parametrize("name", sorted(SUITES, key=lambda n: SUITES[n][0]))
def test_criterion(name):
    result = run_check(name)
    REPORT.append(result.line())
    print(result.line())
    assert result.passed, result.line()


if __name__ == "__main__":
    failed = 0
    for name in sorted(SUITES, key=lambda n: SUITES[n][0]):
        r = run_check(name)
        failed += not r.passed
        print(r.line(), flush=True)
    print(f"{len(SUITES) - failed}/{len(SUITES)} passed")
    sys.exit(1 if failed else 0)
