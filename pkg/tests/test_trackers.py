import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from asep_lab.engine import (BondEvent, CoupledEnsemble, Direction, replica_rng, run_coupled)
from asep_lab.fast import simulate
from asep_lab.lattice import FIRST, SECOND, exchange, parse_pattern
from asep_lab.oracles import discrepancy_equivalence
from asep_lab.trackers import (CollisionObserver, ReplicaRecord, SecondClassTrack,
                               current_right_of, discrepancies, instantaneous_current,
                               neighbor_occupancy, observe_collision, particles_right_of_tag)


def test_collision_right_jump():
    c = parse_pattern("P* ** H*")
    tr = observe_collision(SecondClassTrack.of(c), BondEvent(0.3, 0, Direction.RIGHT), c)
    assert tr.collision_time == 0.3 and tr.collided_pair == (0, 1)


def test_collision_left_jump():
    c = parse_pattern("P* ** H*")
    tr = observe_collision(SecondClassTrack.of(c), BondEvent(0.4, 1, Direction.LEFT), c)
    assert tr.collision_time == 0.4


def test_collision_recorded_once():
    c = parse_pattern("P* ** H*")
    tr = SecondClassTrack.of(c)
    observe_collision(tr, BondEvent(0.4, 1, Direction.LEFT), c)
    observe_collision(tr, BondEvent(0.9, 0, Direction.RIGHT), c)
    assert tr.collision_time == 0.4


def test_displacement_is_not_collision():
    c = parse_pattern("P* .* H*")
    tr = observe_collision(SecondClassTrack.of(c), BondEvent(1.0, 0, Direction.RIGHT), c)
    assert tr.positions == [0] and tr.collision_time is None


def test_track_requires_increasing_positions():
    with pytest.raises(ValueError):
        SecondClassTrack([2, 2])


def test_tracker_follows_engine():
    c = parse_pattern("P* *o* H*")
    obs = CollisionObserver(c, stop=False)
    ens = run_coupled(CoupledEnsemble([c], replica_rng(1, 0), 0.75), 30.0, [obs])
    assert obs.track.positions == ens.marginals[0].sites_of(SECOND)


def test_tau_monotone_in_horizon():
    c = parse_pattern("P* ** H*")
    for k in range(30):
        short = simulate(c, 1.0, 20.0, replica_rng(2, k)).tau
        long = simulate(c, 1.0, 80.0, replica_rng(2, k)).tau
        if short is not None:
            assert long == short


def test_current_examples():
    assert current_right_of(parse_pattern("P* . H*"), 0.0, 0.0) == 1.0
    assert current_right_of(parse_pattern("P* o H*"), 0.3, 5.0) == 0.0
    # threshold 1.5 between sites 1 and 2
    c = parse_pattern("P* o.o. H*")
    assert current_right_of(c, 0.5, 3.0) == pytest.approx(1 + 0.5)


def _brute_current(c, r, t):
    s = r * t
    k = math.floor(s)
    total = sum(1 for x in range(c.left - 200, c.right + 3) if x > s and c[x] == FIRST)
    return total + (k + 1 - s) * (c[k] == FIRST)


bodies = st.text(alphabet=".*o", min_size=1, max_size=10)


@settings(max_examples=300, deadline=None)
@given(bodies, st.floats(-1, 1), st.floats(0, 20))
def test_current_matches_scan(body, r, t):
    c = parse_pattern(f"P* {body} H*")
    assert current_right_of(c, r, t) == pytest.approx(_brute_current(c, r, t))


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet=".o", min_size=2, max_size=10), st.floats(-0.5, 0.5), st.floats(1, 10),
       st.data())
def test_current_local_consistency(body, r, t, data):
    c = parse_pattern(f"P* {body} H*")
    x = data.draw(st.integers(c.left, c.right - 1))
    if c[x] == FIRST and c[x + 1] != FIRST:
        d = exchange(c, x, x + 1)  # right jump
        assert current_right_of(d, r, t) >= current_right_of(c, r, t) - 1e-12
    if c[x + 1] == FIRST and c[x] != FIRST:
        d = exchange(c, x, x + 1)  # left jump
        assert current_right_of(d, r, t) <= current_right_of(c, r, t) + 1e-12


def test_current_rejects_negative_time():
    with pytest.raises(ValueError):
        current_right_of(parse_pattern("P* . H*"), 0.0, -1.0)


def test_particles_right_of_tag():
    assert particles_right_of_tag(parse_pattern("P* *. H*"), 0) == 1
    assert particles_right_of_tag(parse_pattern("P* * H*"), 0) == 0
    with pytest.raises(ValueError):
        particles_right_of_tag(parse_pattern("P* o* H*"), 0)


@settings(max_examples=200, deadline=None)
@given(bodies)
def test_particles_right_of_tag_scan(body):
    c = parse_pattern(f"P* {body} H*")
    for x in c.sites_of(SECOND):
        want = sum(1 for y in range(x + 1, c.right + 1) if c[y] == FIRST)
        assert particles_right_of_tag(c, x) == want


@pytest.mark.parametrize("body,p,want", [(".o", 1.0, 1.0), ("o.", 1.0, 0.0), ("o.", 0.75, -0.25),
                                         ("..", 0.75, 0.0), (".o", 0.75, 0.75)])
def test_instantaneous_current(body, p, want):
    assert instantaneous_current(parse_pattern(f"P* {body} H*"), 0, p) == pytest.approx(want)


def test_neighbor_occupancy():
    assert neighbor_occupancy(parse_pattern("P* * H*"), 0) == (1, 0)
    assert neighbor_occupancy(parse_pattern("P* o_*. H*"), 0) == (0, 1)
    with pytest.raises(ValueError):
        neighbor_occupancy(parse_pattern("P* o H*"), 0)


def test_discrepancies_signs():
    a, b = parse_pattern("P* .o H*"), parse_pattern("P* o. H*")
    assert discrepancies(a, b) == [(0, 1), (1, -1)]


@pytest.mark.parametrize("k", range(10))
@pytest.mark.parametrize("two", [False, True])
def test_discrepancy_equivalence_streams(k, two):
    rep = discrepancy_equivalence(3, k, 1.0 if k % 2 else 0.75, 30.0, two=two)
    assert rep.ok, rep.mismatches[:3]


def test_replica_record_json_line():
    rec = ReplicaRecord(4, 500.0, None, [3, 9], {"left": 1})
    line = rec.to_json()
    assert "\n" not in line and json.loads(line)["censored"] is True
    assert ReplicaRecord.from_json(line) == rec
