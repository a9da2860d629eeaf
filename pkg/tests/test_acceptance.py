"""Acceptance criteria, one PASS/FAIL line each (see the terminal summary).

Seeds are fixed.  Monte Carlo tolerances are three standard errors plus a
bias budget, pinned below as constants.
"""
import json
import math

import numpy as np
import pytest

from asep_lab import cli
from asep_lab.estimators import (estimate_coexistence, estimate_collision,
                                 estimate_neighbor_density, estimate_scaled_distance,
                                 estimate_separation, estimate_speed_law, pair_batch,
                                 single_batch)
from asep_lab.harness import default_threads
from asep_lab.hydro import burgers_u, current_derivative_check, empirical_profile
from asep_lab.lattice import Configuration, exchange, format_pattern, parse_pattern
from asep_lab.multitype import estimate_joint_speeds, estimate_overtake
from asep_lab.oracles import run_oracles

pytestmark = pytest.mark.acceptance

TH = default_threads()
T_MAX = 500.0
T_OBS = 400.0

TOL_COLLISION = 0.015
TOL_KS = 0.06
TOL_PAIR = 0.02
TOL_OVERTAKE = 0.015
TOL_CONJECTURE = 0.02
TOL_JOINT = 0.02
GROWTH_BELOW, GROWTH_ABOVE = 0.005, 0.04
TOL_FIRST = 0.02
TOL_PROFILE = 0.02
TOL_DERIVATIVE = 0.03


@pytest.fixture(scope="module")
def pair_p1():
    return pair_batch(1.0, 1, T_MAX, 20000, 101, snapshot=T_OBS, threads=TH)


@pytest.fixture(scope="module")
def pair_p1_m2():
    return pair_batch(1.0, 2, T_MAX, 20000, 102, threads=TH)


@pytest.fixture(scope="module")
def single_p1():
    return single_batch(1.0, T_OBS, 10000, 103, threads=TH)


def _within(s, tol):
    return abs(s.estimate - s.target) <= tol


def _fmt(s):
    return f"{s.estimate:.4f} (se {s.stderr:.4f}) vs {s.target:.4f}"


def test_c1_collision_one_gap(report, pair_p1):
    a = estimate_collision(1.0, 1, T_MAX, 20000, 101, batch=pair_p1)
    b = estimate_collision(0.75, 1, T_MAX, 20000, 104, threads=TH)
    ok = _within(a, TOL_COLLISION) and _within(b, TOL_COLLISION)
    inc = a.extras["increments"]["T/2->T"], b.extras["increments"]["T/2->T"]
    report("C1 collision m=1", ok, f"p=1 {_fmt(a)}; p=0.75 {_fmt(b)}; "
           f"T/2->T increments {inc[0]:.4f}, {inc[1]:.4f}; tol {TOL_COLLISION}")
    assert ok


def test_c2_collision_two_gap(report, pair_p1_m2):
    a = estimate_collision(1.0, 2, T_MAX, 20000, 102, batch=pair_p1_m2)
    b = estimate_collision(0.75, 2, T_MAX, 20000, 105, threads=TH)
    ok = _within(a, TOL_COLLISION) and _within(b, TOL_COLLISION)
    report("C2 collision m=2", ok, f"p=1 {_fmt(a)}; p=0.75 {_fmt(b)}; "
           f"T/2->T increment at p=0.75 {b.extras['increments']['T/2->T']:.4f}; "
           f"tol {TOL_COLLISION}")
    assert ok


def test_c3_speed_law(report, single_p1):
    law = estimate_speed_law(1.0, T_OBS, 5000, 103, batch=single_p1)
    ok = law.summary.estimate <= TOL_KS
    report("C3 speed law", ok, f"KS {law.summary.estimate:.4f} <= {TOL_KS}, "
           f"mean {law.summary.extras['mean']:.4f}")
    assert ok


def test_c4_separation(report, pair_p1):
    out = [estimate_separation(1.0, r, T_OBS, 20000, 101, batch=pair_p1)
           for r in (0.0, -0.5, 0.5)]
    ok = all(_within(s, TOL_PAIR) for s in out)
    report("C4 separation", ok, "; ".join(f"r={s.params['r']}: {_fmt(s)}" for s in out)
           + f"; tol {TOL_PAIR}")
    assert ok


def test_c5_distance(report, pair_p1):
    s = estimate_scaled_distance(1.0, T_OBS, 20000, 101, batch=pair_p1)
    ok = _within(s, TOL_PAIR)
    report("C5 scaled distance", ok, f"{_fmt(s)}; tol {TOL_PAIR}")
    assert ok


def test_c6_neighbors(report, single_p1):
    left, right = estimate_neighbor_density(1.0, T_OBS, 10000, 103, batch=single_p1)
    ps, pse = left.extras["paired_sum"], left.extras["paired_sum_stderr"]
    ok = _within(left, TOL_PAIR) and _within(right, TOL_PAIR) and abs(ps - 1) <= 3 * pse
    report("C6 neighbor densities", ok, f"left {_fmt(left)}; right {_fmt(right)}; "
           f"paired sum {ps:.4f} (se {pse:.4f}); tol {TOL_PAIR}")
    assert ok


def test_c7_overtaking(report, pair_p1, pair_p1_m2):
    lines, ok = [], True
    for m, batch in ((1, pair_p1), (2, pair_p1_m2)):
        pat = estimate_overtake(m, T_MAX, 20000, 0, route="pattern", batch=batch[:, 0])
        direct = estimate_overtake(m, T_MAX, 20000, 106 + m, route="direct", threads=TH)
        agree = abs(pat.estimate - direct.estimate) <= 3 * math.hypot(pat.stderr, direct.stderr)
        good = _within(pat, TOL_OVERTAKE) and _within(direct, TOL_OVERTAKE) and agree
        ok &= good
        lines.append(f"m={m}: pattern {_fmt(pat)}, direct {_fmt(direct)}, agree={agree}")
    m3 = estimate_overtake(3, T_MAX, 5000, 109, route="direct", threads=TH)
    lines.append(f"m=3 (conjecture, informative): {_fmt(m3)} "
                 f"within {TOL_CONJECTURE}={_within(m3, TOL_CONJECTURE)}")
    report("C7 multi-type overtaking", ok, "; ".join(lines) + f"; tol {TOL_OVERTAKE}")
    assert m3.conjecture
    assert ok


def test_c8_joint_speeds(report):
    s = estimate_joint_speeds(0.0, T_OBS, 10000, 110, threads=TH)
    ok = _within(s, TOL_JOINT)
    report("C8 joint speeds", ok, f"{_fmt(s)}; tol {TOL_JOINT}")
    assert ok


def test_c9_growth(report):
    s = estimate_coexistence(300, 3000, 111, sizes=(100, 200, 300), threads=TH)
    by = [s.extras["by_size"][k] for k in ("100", "200", "300")]
    cond = s.extras["conditional"]["estimate"]
    first = s.extras["first_is_22"]["estimate"]
    checks = {
        "alive": 1 / 3 - GROWTH_BELOW <= s.estimate <= 1 / 3 + GROWTH_ABOVE,
        "monotone": by[0] >= by[1] >= by[2],
        "conditional": 0.5 - GROWTH_BELOW <= cond <= 0.5 + GROWTH_ABOVE,
        "first": abs(first - 1 / 3) <= TOL_FIRST,
    }
    ok = all(checks.values())
    report("C9 growth coexistence", ok,
           f"alive {s.estimate:.4f} (se {s.stderr:.4f}) in [{1/3 - GROWTH_BELOW:.4f}, "
           f"{1/3 + GROWTH_ABOVE:.4f}]; by size {by}; conditional {cond:.4f} in "
           f"[{0.5 - GROWTH_BELOW}, {0.5 + GROWTH_ABOVE}]; first=(2,2) {first:.4f}; "
           f"failed: {[k for k, v in checks.items() if not v]}")
    assert ok


def _lattice_properties(n=1000, seed=112):
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(n):
        L = int(rng.integers(1, 12))
        body = "".join(rng.choice(list(".*o"), size=L))
        c = parse_pattern(f"P* {body} H*")
        if parse_pattern(format_pattern(c)) != c:
            bad += 1
        x = int(rng.integers(c.left, c.right))
        if exchange(exchange(c, x, x + 1), x, x + 1) != c:
            bad += 1
        if Configuration.from_dump(c.dump()) != c:
            bad += 1
    return bad


def test_c10_exact_oracles(report):
    suite = run_oracles(n_grids=100, n_streams=100, horizon=50.0)
    bad = _lattice_properties()
    ok = suite.ok and bad == 0
    report("C10 exact oracles", ok,
           ", ".join(f"{k} {a}/{b}" for k, (a, b) in suite.results.items())
           + f"; lattice property violations {bad}/1000")
    assert ok, suite.failures[:5]


def test_c11_hydrodynamics(report):
    rs = [-0.75, -0.25, 0.0, 0.25, 0.75]
    rows = empirical_profile(1.0, 200.0, rs, 10000, 113, threads=TH)
    prof_ok = all(abs(row.empirical - row.target) <= TOL_PROFILE for row in rows)
    d = current_derivative_check(1.0, 0.0, 200.0, 10000, 114, threads=TH)
    der_ok = abs(d.lhs - 0.25) <= TOL_DERIVATIVE
    lo, hi = np.linspace(-3.0, 0.0, 300001), np.linspace(0.0, 3.0, 300001)
    mass = abs(np.trapezoid(1 - burgers_u(lo, 2.0, 1.0), lo)
               - np.trapezoid(burgers_u(hi, 2.0, 1.0), hi))
    sim = max(abs(burgers_u(a * x, a * 3.0, p) - burgers_u(x, 3.0, p))
              for a in (0.5, 2.0, 7.0) for x in np.linspace(-4, 4, 81) for p in (0.75, 1.0))
    pde_ok = mass <= 1e-9 and sim <= 1e-12
    ok = prof_ok and der_ok and pde_ok
    report("C11 hydrodynamics", ok,
           "profile " + ", ".join(f"{row.r}: {row.empirical:.4f}/{row.target:.4f}" for row in rows)
           + f"; derivative {d.lhs:.4f} (se {d.stderr:.4f}) vs 0.25 tol {TOL_DERIVATIVE}"
           + f"; mass gap {mass:.1e}; self-similarity gap {sim:.1e}")
    assert ok


def _document(args, threads, capsys):
    assert cli.main(args + ["--threads", str(threads)]) == 0
    doc = json.loads(capsys.readouterr().out)
    doc["meta"].pop("duration_s")
    doc["manifest"].pop("threads")
    return doc


def test_c12_reproducibility(report, capsys):
    runs = [
        ["collision", "--p", "0.75", "--m", "2", "--t-max", "500", "--reps", "2000", "--seed", "7"],
        ["overtake", "--m", "2", "--route", "direct", "--reps", "1000", "--seed", "7"],
        ["growth", "--n", "200", "--reps", "500", "--seed", "7"],
        ["hydro-profile", "--reps", "1000", "--seed", "7"],
    ]
    same = []
    for args in runs:
        same.append(_document(args, 1, capsys) == _document(args, 2, capsys))
    ok = all(same)
    report("C12 reproducibility", ok,
           ", ".join(f"{a[0]} {'identical' if s else 'DIFFERENT'}" for a, s in zip(runs, same))
           + " (threads 1 vs 2)")
    assert ok
