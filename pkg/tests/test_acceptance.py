"""Acceptance criteria 1-11, one test each, at their stated tolerances.

Every test prints a ``[PASS]``/``[FAIL]`` line. Run this file directly
(``python3 tests/test_acceptance.py``) for the lines alone.
"""
import sys
import time

import pytest

from pmc_rotor import verify

_RESULTS: dict[int, verify.CheckResult] = {}


def _report(r: verify.CheckResult, capsys) -> None:
    _RESULTS[r.number] = r
    with capsys.disabled():
        print("\n" + r.line())
    assert r.passed, r.detail
    assert r.seconds < r.budget, f"runtime {r.seconds:.2f}s over budget {r.budget:g}s"


@pytest.mark.parametrize("crit", verify.ORBIT_CRITERIA, ids=lambda c: c.__name__)
def test_orbit_criterion(crit, capsys):
    _report(crit(), capsys)


def test_invariant_suite(capsys):
    # reuse traces from the orbit criteria when they already ran
    traces = []
    if all(k in _RESULTS for k in range(1, 8)):
        traces = [t for k in range(1, 8) for t in _RESULTS[k].traces]
    else:
        traces = [t for crit in verify.ORBIT_CRITERIA for t in crit().traces]
    assert len(traces) >= 10
    _report(verify.criterion_invariants(traces), capsys)


@pytest.mark.parametrize("crit", verify.OTHER_CRITERIA, ids=lambda c: c.__name__)
def test_other_criterion(crit, capsys):
    _report(crit(), capsys)


def test_total_runtime(capsys):
    t0 = time.perf_counter()
    results = verify.run_all()
    dt = time.perf_counter() - t0
    with capsys.disabled():
        print(f"\nfull suite: {sum(r.ok for r in results)}/{len(results)} in {dt:.1f}s")
    assert [r.number for r in results] == list(range(1, 12))
    assert dt < 60.0


if __name__ == "__main__":
    rs = verify.run_all(echo=print)
    sys.exit(0 if all(r.ok for r in rs) else 1)
