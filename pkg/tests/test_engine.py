import math

import numpy as np
import pytest

from asep_lab.engine import (BondEvent, CoupledEnsemble, Direction, Effect, EngineParams,
                             EventTrace, apply_event, next_event, replay, replica_rng,
                             run_coupled, run_single)
from asep_lab.fast import ClassRun, simulate
from asep_lab.lattice import FIRST, HOLE, SECOND, Configuration, active_bounds, parse_pattern
from asep_lab.oracles import signed_discrepancies


@pytest.mark.parametrize("p", [0.5, 0.2, 1.01])
def test_params_reject_out_of_range(p):
    with pytest.raises(ValueError):
        EngineParams(p)


def test_params_q():
    assert EngineParams(0.75).q == 0.25 and EngineParams().q == 0.0


def test_one_bond_totally_asymmetric():
    rng = replica_rng(1, 0)
    waits = []
    for _ in range(2000):
        e = next_event((3, 4), 0.0, rng, p=1.0)
        assert e.source == 3 and e.direction is Direction.RIGHT
        waits.append(e.time)
    # Exp(1): mean 1, sd 1
    assert abs(np.mean(waits) - 1.0) < 3 / math.sqrt(2000)


def test_waiting_time_mean_ten_bonds():
    rng = replica_rng(2, 0)
    n = 100_000
    w = np.array([next_event((0, 10), 0.0, rng).time for _ in range(n)])
    assert abs(w.mean() - 0.1) < 3 * 0.1 / math.sqrt(n)


def test_direction_frequencies():
    rng = replica_rng(3, 0)
    n = 100_000
    right = sum(next_event((0, 10), 0.0, rng, p=0.75).direction is Direction.RIGHT
                for _ in range(n))
    assert abs(right / n - 0.75) < 3 * math.sqrt(0.75 * 0.25 / n)


def test_bond_uniform_and_left_source():
    rng = replica_rng(4, 0)
    for _ in range(1000):
        e = next_event((-2, 3), 0.0, rng, p=0.6)
        lo, hi = e.bond
        assert -2 <= lo < 3 and hi == lo + 1
        if e.direction is Direction.LEFT:
            assert e.target == e.source - 1


def test_next_event_empty_range():
    with pytest.raises(ValueError):
        next_event((2, 2), 0.0, replica_rng(0, 0))


@pytest.mark.parametrize("body,src,direction,want,effect", [
    (".o", 0, Direction.RIGHT, "o.", Effect.SWAPPED),
    ("**", 0, Direction.RIGHT, "**", Effect.BLOCKED),
    (".*", 0, Direction.RIGHT, "*.", Effect.SWAPPED),
    ("*o", 0, Direction.RIGHT, "o*", Effect.SWAPPED),
    ("o.", 1, Direction.LEFT, ".o", Effect.SWAPPED),
    ("*.", 1, Direction.LEFT, ".*", Effect.SWAPPED),
    (".o", 1, Direction.LEFT, ".o", Effect.BLOCKED),
])
def test_apply_event_rules(body, src, direction, want, effect):
    c = parse_pattern(f"P* {body} H*").grown(-3, 5)
    d, eff = apply_event(c, BondEvent(1.0, src, direction))
    assert eff is effect
    assert d == parse_pattern(f"P* {want} H*")


def test_single_marginal_matches_run_single():
    c = parse_pattern("P* *o* H*")
    a = run_coupled(CoupledEnsemble([c], replica_rng(5, 1), 0.8), 20.0).marginals[0]
    b = run_single(c, 20.0, replica_rng(5, 1), 0.8)
    assert a == b


def test_identical_marginals_stay_identical():
    c = parse_pattern("P* *.o* H*")
    ens = run_coupled(CoupledEnsemble([c, c], replica_rng(6, 0), 0.7), 30.0)
    assert ens.marginals[0] == ens.marginals[1]


@pytest.mark.parametrize("k", range(5))
def test_discrepancy_pair_couples_once(k):
    a, b = parse_pattern("P* .o H*"), parse_pattern("P* o. H*")
    counts = []

    def obs(e, before, after, effects):
        counts.append(len(signed_discrepancies(after[0], after[1])))

    run_coupled(CoupledEnsemble([a, b], replica_rng(7, k), 1.0), 40.0, [obs])
    assert set(counts) <= {0, 2}
    if 0 in counts:
        first = counts.index(0)
        assert all(n == 2 for n in counts[:first]) and all(n == 0 for n in counts[first:])


def test_pad_soundness():
    c = parse_pattern("P* *o* H*")
    tr = EventTrace()
    bounds = []

    def obs(e, before, after, effects):
        bounds.append(active_bounds(before[0]))

    padded = run_coupled(CoupledEnsemble([c], replica_rng(8, 0), 0.75), 15.0, [obs], pad=10,
                         trace=tr)
    inside = []
    for e, eff, (l, r) in zip(tr, tr.effects, bounds):
        lo, hi = e.bond
        if lo < l or hi > r:
            assert eff == Effect.BLOCKED.value
        else:
            inside.append(e)
    assert replay(c, inside) == padded.marginals[0]
    assert replay(c, tr) == padded.marginals[0]


def test_totally_asymmetric_moves():
    c = parse_pattern("P* *o.*o H*")

    def obs(e, before, after, effects):
        assert e.direction is Direction.RIGHT
        b, a = before[0], after[0]
        if effects[0] is Effect.SWAPPED:
            assert b[e.source] < b[e.target]
            assert not (b[e.target] == FIRST)
            assert not (b[e.source] == HOLE)

    run_coupled(CoupledEnsemble([c], replica_rng(9, 0), 1.0), 30.0, [obs])


def test_determinism_and_resume():
    c = parse_pattern("P* ** H*")
    full = run_coupled(CoupledEnsemble([c], replica_rng(10, 3), 0.75), 30.0)
    mid = run_coupled(CoupledEnsemble([c], replica_rng(10, 3), 0.75), 12.5)
    rest = run_coupled(mid, 30.0)
    assert rest.marginals[0] == full.marginals[0]
    assert rest.events == full.events and rest.clock == full.clock
    again = run_coupled(CoupledEnsemble([c], replica_rng(10, 3), 0.75), 30.0)
    assert again.marginals[0] == full.marginals[0]


def test_horizon_before_clock_rejected():
    ens = run_coupled(CoupledEnsemble([parse_pattern("P* * H*")], replica_rng(0, 0)), 5.0)
    with pytest.raises(ValueError):
        run_coupled(ens, 1.0)


def test_observer_stop():
    c = parse_pattern("P* * H*")
    ens = run_coupled(CoupledEnsemble([c], replica_rng(11, 0)), 100.0,
                      [lambda e, b, a, f: True])
    assert ens.events == 1 and ens.clock < 100.0


def test_trace_round_trip():
    tr = EventTrace()
    run_coupled(CoupledEnsemble([parse_pattern("P* ** H*")], replica_rng(12, 0), 0.75), 5.0,
                trace=tr)
    back = EventTrace.loads(tr.dumps())
    assert back == tr and len(back) > 0


@pytest.mark.parametrize("pattern", ["P* ** H*", "P* *o* H*", "P* * H*", "P* . H*"])
@pytest.mark.parametrize("p", [1.0, 0.75])
def test_compiled_loop_matches_reference(pattern, p):
    c = parse_pattern(pattern)
    for k in range(6):
        fast = simulate(c, p, 25.0, replica_rng(13, k), snapshot_times=(8.0,), trace=True)
        ref_tr = EventTrace()
        hits = []

        def obs(e, before, after, effects):
            b = before[0]
            if b[e.source] == SECOND and b[e.target] == SECOND and not hits:
                hits.append(e.time)

        ens = run_coupled(CoupledEnsemble([c], replica_rng(13, k), p), 8.0, [obs], trace=ref_tr)
        snap = ens.marginals[0]
        ens = run_coupled(ens, 25.0, [obs], trace=ref_tr)
        assert fast.snapshots[0] == snap
        assert fast.final == ens.marginals[0]
        assert fast.tau == (hits[0] if hits else None)
        assert fast.trace.times == ref_tr.times
        assert fast.trace.sources == ref_tr.sources
        assert fast.trace.directions == ref_tr.directions


def test_compiled_stop_on_collision():
    c = parse_pattern("P* ** H*")
    for k in range(20):
        a = simulate(c, 1.0, 50.0, replica_rng(14, k), stop_on_collision=True)
        b = simulate(c, 1.0, 50.0, replica_rng(14, k))
        assert a.tau == b.tau
        if a.tau is not None:
            assert a.clock == a.tau


def test_compiled_window_growth():
    # the margin is far too small for the run, so the window doubles several times
    c = parse_pattern("P* * H*")
    run = ClassRun(c.left, np.frombuffer(c.cells, np.int8), 2, 1.0, replica_rng(15, 0), margin=2)
    run.advance(60.0)
    left, w = run.window()
    ref = run_single(c, 60.0, replica_rng(15, 0))
    assert Configuration(left, w.astype(np.int8).tobytes()) == ref
