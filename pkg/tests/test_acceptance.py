"""Acceptance battery: every [PRIMARY] criterion at its stated tolerance.

Each test prints its PASS/FAIL line through the shared battery runner, so
``pytest -s tests/test_acceptance.py`` produces one line per criterion.
Criterion 9's comparison is expected to fail: the path-integral Monte Carlo
exceeds the bootstrap value (in the conventional normalization adopted here)
by a constant factor numerically equal to e — see the README normalization
notes; the criterion is asserted as stated rather than weakened.
"""

import pytest

from lcft.acceptance import run_battery


def _run(cid, **kw):
    res = run_battery(only={cid}, **kw)[0]
    return res


@pytest.mark.parametrize("cid", ["1", "2", "3", "4", "5", "6"])
def test_fast_criteria(cid):
    res = _run(cid)
    assert res.passed, res.detail


def test_criterion_7_graph_identities():
    res = _run("7")
    assert res.passed, res.detail


def test_criterion_8_free_field_identities():
    res = _run("8")
    assert res.passed, res.detail


def test_criterion_9_headline_cross_validation():
    res = _run("9", mc_samples=200_000)
    assert res.passed, res.detail


def test_criterion_10_robustness():
    res = _run("10")
    assert res.passed, res.detail
