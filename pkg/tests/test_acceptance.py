"""One test per numbered acceptance criterion, at the stated tolerances.

Each test records a PASS/FAIL line that is echoed in the pytest terminal
summary; the checks themselves live in :mod:`rangepolymer.validation`.
"""

import pytest

from conftest import ACCEPTANCE_LINES
from rangepolymer.validation import CRITERIA, run_check


@pytest.mark.parametrize("key", list(CRITERIA), ids=[f"criterion_{k}" for k in CRITERIA])
def test_criterion(key):
    result = run_check(key)
    line = result.line() + f" ({result.seconds:.1f}s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert result.passed, line
