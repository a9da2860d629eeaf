"""Deterministic cross-checks between the particle and growth pictures."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .engine import CoupledEnsemble, replica_rng, run_coupled
from .growth import (ONE_SEED, THREE_SEEDS, compute_lpp, correspondence_oracle,
                     exponential_weights)
from .lattice import SECOND, Configuration, parse_pattern
from .trackers import SecondClassTrack, observe_collision

ORACLE_SEED = 20240917


def first_class_indicator(c: Configuration, lo: int, hi: int) -> np.ndarray:
    """``eta(x)`` for ``x`` in ``[lo, hi]``, reading the fills outside the window."""
    x = np.arange(lo, hi + 1)
    cells = np.frombuffer(c.cells, dtype=np.int8)
    inside = (x >= c.left) & (x <= c.right)
    out = (x < c.left).astype(np.int8)
    out[inside] = cells[x[inside] - c.left] == 0
    return out


def signed_discrepancies(a: Configuration, b: Configuration) -> list[tuple[int, int]]:
    lo, hi = min(a.left, b.left), max(a.right, b.right)
    d = first_class_indicator(a, lo, hi).astype(int) - first_class_indicator(b, lo, hi)
    xs = np.flatnonzero(d)
    return [(lo + int(i), int(d[i])) for i in xs]


@dataclass
class EquivalenceReport:
    ok: bool = True
    events: int = 0
    tau: float | None = None
    mismatches: list[str] = field(default_factory=list)


def discrepancy_equivalence(seed: int, k: int, p: float, horizon: float = 50.0,
                            two: bool = False) -> EquivalenceReport:
    """Run a two-type system and a coupled one-type pair on one event stream.

    Single: ``P* * H*`` against ``(P* . H*, P* o H*)``; the one discrepancy
    sits on the second-class particle.  Two: ``P* ** H*`` against
    ``(P* .o H*, P* o. H*)``; discrepancies ``+1`` at ``X`` and ``-1`` at
    ``Y`` until the collision, none afterwards.
    """
    if two:
        pats = ("P* ** H*", "P* .o H*", "P* o. H*")
    else:
        pats = ("P* * H*", "P* . H*", "P* o H*")
    marg = [parse_pattern(s) for s in pats]
    track = SecondClassTrack.of(marg[0])
    rep = EquivalenceReport()

    def obs(e, before, after, effects):
        rep.events += 1
        observe_collision(track, e, before[0])
        got = signed_discrepancies(after[1], after[2])
        if track.collided:
            want = []
        elif two:
            x, y = after[0].sites_of(SECOND)
            want = [(x, 1), (y, -1)]
        else:
            want = [(after[0].sites_of(SECOND)[0], 1)]
        if after[0].sites_of(SECOND) != track.positions:
            rep.ok = False
            rep.mismatches.append(f"tracker lost a particle at t={e.time}")
        if got != want:
            rep.ok = False
            rep.mismatches.append(f"t={e.time}: discrepancies {got}, expected {want}")
            return True
        return False

    run_coupled(CoupledEnsemble(marg, replica_rng(seed, k), p), horizon, [obs])
    rep.tau = track.collision_time
    return rep


def lpp_hand_example() -> Fraction:
    w = [[Fraction(1, 2), Fraction(3, 10)], [Fraction(1, 5), Fraction(2, 5)]]
    f = compute_lpp(w, seeds=())
    return f.G[2, 2]


def oracle_grid(k: int, max_n: int = 30) -> np.ndarray:
    rng = replica_rng(ORACLE_SEED, k)
    n = 3 + int(rng.random() * (max_n - 2))
    return exponential_weights(rng, n)


@dataclass
class OracleSuite:
    results: dict[str, tuple[int, int]]
    failures: list[str]

    @property
    def ok(self) -> bool:
        return not self.failures


def run_oracles(n_grids: int = 100, n_streams: int = 100, horizon: float = 50.0) -> OracleSuite:
    """All exact checks; ``results`` maps check name to ``(passed, total)``."""
    res: dict[str, tuple[int, int]] = {}
    fails: list[str] = []
    for name, seeds in (("correspondence-three-seed", THREE_SEEDS),
                        ("correspondence-one-seed", ONE_SEED),
                        ("correspondence-unseeded", ())):
        good = 0
        for k in range(n_grids):
            r = correspondence_oracle(oracle_grid(k), seeds)
            good += r.ok
            if not r.ok:
                fails.append(f"{name} grid {k}: {r.mismatches[0]}")
        res[name] = (good, n_grids)
    for name, two in (("single-discrepancy", False), ("two-discrepancy", True)):
        good = 0
        for k in range(n_streams):
            p = 1.0 if k % 2 == 0 else 0.75
            r = discrepancy_equivalence(ORACLE_SEED, k, p, horizon, two=two)
            good += r.ok
            if not r.ok:
                fails.append(f"{name} stream {k}: {r.mismatches[0]}")
        res[name] = (good, n_streams)
    g = lpp_hand_example()
    res["lpp-hand-example"] = (int(g == Fraction(6, 5)), 1)
    if g != Fraction(6, 5):
        fails.append(f"lpp hand example gave {g}")
    return OracleSuite(res, fails)
