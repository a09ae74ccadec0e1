"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]``/``[FAIL]`` line.  Run the module
directly (``python3 tests/test_acceptance.py``) for just those lines.
"""

from __future__ import annotations

import sys
import time

import numpy as np
import pytest

from magicsq.contexts import ks_exhaustive_check
from magicsq.expsuite import analyze_cabello, analyze_hasegawa, analyze_huang, replay_experiment
from magicsq.harness import default_states, verify_corollary, verify_cup, verify_marginals, verify_theorem1
from magicsq.qcore import named_state, verify_square_algebra


@pytest.fixture
def report(request):
    tr = request.config.pluginmanager.get_plugin("terminalreporter")
    lines = []

    def emit(n: int, ok: bool, detail: str) -> None:
        lines.append(f"[{'PASS' if ok else 'FAIL'}] criterion {n:>2}: {detail}")

    yield emit
    for line in lines:
        if tr is not None:
            tr.write_line("")
            tr.write_line(line)
        else:
            print(line)


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def test_c01_square_algebra(report):
    rep, dt = _timed(lambda: verify_square_algebra(1e-12))
    ok = rep.passed and dt < 1.0
    report(1, ok, f"square algebra, {len(rep.checks)} relations, {len(rep.failures())} failures, {dt:.3f}s")
    assert rep.passed, rep.failures()
    assert dt < 1.0


def test_c02_ks_brute_force(report):
    ks, dt = _timed(ks_exhaustive_check)
    ok = ks.count_all_six == 0 and ks.max_satisfiable == 5 and dt < 1.0
    report(2, ok, f"KS brute force, all six = {ks.count_all_six}, max = {ks.max_satisfiable}, {dt:.3f}s")
    assert ks.count_all_six == 0
    assert ks.max_satisfiable == 5
    assert dt < 1.0


def test_c03_exact_replays(report):
    reps, dt = _timed(lambda: [replay_experiment(e) for e in ("1", "2", "3", "3c", "4")])
    got = {r.experiment: r.observed for r in reps}
    ok = (
        all(r.passed for r in reps)
        and got["Exp1"]["codes"] == [8, 25, 6] and got["Exp1"]["outcomes"] == [-1, 1, -1]
        and got["Exp2"]["codes"] == [8, 5, 2] and got["Exp2"]["outcomes"] == [-1, -1, -1]
        and got["Exp3-Col3"]["unobserved_row3"] == [1, 1, -1]
        and got["Exp4"]["codes"] == [24, 7, 8] and got["Exp4"]["outcomes"] == [1, -1, -1]
        and dt < 1.0
    )
    bad = [r.experiment + ": " + r.first_divergence for r in reps if not r.passed]
    report(3, ok, f"exact replays of 5 experiments, divergences {bad or 'none'}, {dt:.3f}s")
    assert ok, bad


def test_c04_theorem1(report):
    rep, dt = _timed(lambda: verify_theorem1(default_states(42), max_len=3, n_runs=100_000, seed=42, tol=0.02))
    worst = max(e.get("tv", 1.0) for e in rep.checked)
    ok = rep.passed and len(rep.checked) == 5 * 190 and dt < 600
    report(4, ok, f"{rep.summary()}, worst TV {worst:.4f}, {dt:.0f}s")
    assert len(rep.checked) == 5 * 190
    assert rep.passed, rep.failures[:5]
    assert dt < 600


def test_c05_corollary(report):
    rep, dt = _timed(lambda: verify_corollary(n_runs=10_000, seed=42))
    ok = rep.passed and dt < 60
    report(5, ok, f"{rep.summary()}, {dt:.1f}s")
    assert rep.passed, rep.failures[:5]
    assert all(e["fraction_repeated"] == 1.0 for e in rep.checked)
    assert dt < 60


def test_c06_cup(report):
    rep = verify_cup(n_runs=10_000, seed=42)
    report(6, rep.passed, rep.summary())
    assert rep.passed, rep.failures[:5]
    assert all(e["fraction_satisfied"] == 1.0 for e in rep.checked)


def test_c07_marginal_noncontextuality(report):
    rep = verify_marginals(n_runs=100_000, seed=42, tol=0.01)
    g11 = [e for e in rep.entries if e["cell"] == "11"]
    worst = max(e["difference"] for e in g11)
    ok = rep.passed and worst <= 0.01
    report(7, ok, f"{rep.summary()}, worst |P1 - P4| for G11 = {worst:.4f}")
    assert worst <= 0.01
    assert rep.passed, rep.failures[:5]


def test_c08_huang(report):
    ideal = analyze_huang(100_000, 42)
    ctrl = analyze_huang(100_000, 42, state=named_state("mixed"))
    f0, f1 = ideal.aggregates["fraction_equal"], ctrl.aggregates["fraction_equal"]
    ok = f0 == 0.0 and abs(f1 - 0.5) <= 0.01
    report(8, ok, f"Huang equal-outcome fraction {f0}, mixed control {f1:.4f}")
    assert f0 == 0.0
    assert abs(f1 - 0.5) <= 0.01


def test_c09_hasegawa(report):
    res = analyze_hasegawa(100_000, 42)
    c = res.aggregates["C_prime"]
    cnc = np.concatenate([res.per_run[f"cnc_c3_{a}"] for a in "xyz"])
    ok = c == 4.0 and bool(np.all(cnc == 4))
    report(9, ok, f"Hasegawa C' = {c}, per-trajectory C_NC values {sorted(set(cnc.tolist()))}")
    assert c == 4.0
    assert np.all(cnc == 4)


def test_c10_cabello(report):
    res = analyze_cabello(10_000, 42)
    ks = ks_exhaustive_check()
    ok = (res.aggregates["every_run_matches"] and res.aggregates["tables_satisfying_all_five"] == 0
          and ks.count_all_six == 0)
    report(10, ok, f"Cabello averages {res.aggregates['averages']}, "
                   f"tables satisfying all five = {res.aggregates['tables_satisfying_all_five']}")
    assert res.aggregates["every_run_matches"]
    assert res.aggregates["tables_satisfying_all_five"] == 0
    assert ks.count_all_six == 0


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
