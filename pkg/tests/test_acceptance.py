"""The ten acceptance criteria at their stated tolerances.

Each test prints one ``[PASS]``/``[FAIL]`` line and asserts the verdict; the
lines are repeated together in the terminal summary.  Nothing here is
tuned to pass: a criterion that the numbers do not support fails.
"""

import pytest

from rtbp_duffing.verify import CHECKS


@pytest.mark.parametrize("criterion", sorted(CHECKS))
def test_criterion(criterion, acceptance_log):
    result = CHECKS[criterion]()
    print(result.line())
    acceptance_log.append(result.line())
    assert result.passed, result.line()
