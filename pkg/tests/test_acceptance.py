"""The twelve acceptance criteria at their stated tolerances.

Each test prints one line, ``criterion N [name]: PASS|FAIL (...)``.  Run
directly with ``python tests/test_acceptance.py`` for the lines alone.
"""
import sys

import pytest

from robinbilap import checks


@pytest.mark.parametrize("number", sorted(checks.CHECKS))
def test_criterion(number, capsys):
    res = checks.run_check(number, seed=0, jobs=1)
    with capsys.disabled():
        print(f"\n{res.line()} [{res.seconds:.1f}s]")
    assert res.passed, res.line()


if __name__ == "__main__":
    results = checks.run_all(seed=0, echo=print)
    sys.exit(0 if all(r.passed for r in results) else 1)
