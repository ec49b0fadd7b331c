import pytest

from rtbp_duffing.verify import CHECKS, SUITES, CheckResult, run_suite


def test_line_format():
    assert CheckResult(3, "x", True, "ok").line() == "[PASS]  3 x: ok"
    assert CheckResult(10, "y", False, "bad").line() == "[FAIL] 10 y: bad"


def test_suites_cover_all_checks():
    assert set(SUITES["acceptance"]) == set(CHECKS) == set(range(1, 11))


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("nope")


def test_coefficient_suite():
    (r,) = run_suite("coefficients")
    assert r.passed and r.details["corrected_exact_C2"] != r.details["C2"]
