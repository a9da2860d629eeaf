"""Monte Carlo estimators with their closed-form targets.

Replica ``k`` of an experiment with master seed ``s`` always uses the
stream :func:`~asep_lab.engine.replica_rng` ``(s, k)``; aggregation folds over
replicas in index order.  Functions that share one ensemble accept a
precomputed ``batch`` so a single set of runs can feed several estimates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .engine import EngineParams, replica_rng
from .fast import ClassRun, simulate
from .growth import (THREE_SEEDS, GrowthField, exponential_weights, first_occupied,
                     red_cluster_status, _lpp_kernel)
from .harness import (EstimateSummary, bernoulli_summary, mean_summary, run_replicas)
from .lattice import FIRST, SECOND, parse_pattern
from .multitype import overtake_pattern

# Kolmogorov limit law: sqrt(n) * D has standard deviation ~0.2603
KS_NULL_SD = 0.2603
NAN = math.nan


def collision_target(p: float, m: int) -> tuple[float | None, str]:
    if m == 1:
        return (1 + p) / (3 * p), "exact"
    if m == 2:
        return (1 + 2 * p * p) / (6 * p * p), "exact"
    if p == 1.0:
        return 2.0 / (m + 2), "conjecture"
    return None, "none"


def separation_target(p: float, r: float) -> float:
    v = 2 * p - 1
    return (v * v - r * r) / (4 * p * v)


def distance_target(p: float) -> float:
    v = 2 * p - 1
    return v * v / (3 * p)


def neighbor_targets(p: float) -> tuple[float, float]:
    v = 2 * p - 1
    return 0.5 - v / 6, 0.5 + v / 6


# ---------------------------------------------------------------- replicas

def pair_replica(seed: int, k: int, p: float, m: int, horizon: float,
                 snapshot: float | None = None, early_stop_gap: int | None = None) -> tuple:
    """``(tau, X, Y)`` for the pattern with two second-class particles ``m``
    apart; ``X, Y`` are taken at ``snapshot`` and are NaN if the pair collided
    before it; ``tau`` is NaN if no collision happened by ``horizon``."""
    rng = replica_rng(seed, k)
    c = overtake_pattern(m)
    if early_stop_gap is not None:
        return _pair_early_stop(c, p, horizon, rng, early_stop_gap)
    snaps = () if snapshot is None else (snapshot,)
    tr = simulate(c, p, horizon, rng, snapshot_times=snaps, stop_on_collision=True)
    x = y = NAN
    if snaps and tr.snapshots[0] is not None:
        x, y = tr.snapshots[0].sites_of(SECOND)
    return (NAN if tr.tau is None else tr.tau, x, y)


def _pair_early_stop(c, p, horizon, rng, gap):
    run = ClassRun(c.left, np.frombuffer(c.cells, dtype=np.int8), 2, p, rng,
                   tracked=int(SECOND), stop_on_tracked=True, margin=int(horizon) + 64)
    t = 0.0
    while t < horizon:
        t = min(horizon, t + 10.0)
        if not run.advance(t):
            return (run.tau, NAN, NAN)
        left, w = run.window()
        xs = np.flatnonzero(w == SECOND)
        if xs[1] - xs[0] >= gap:
            break
    return (NAN, NAN, NAN)


def single_replica(seed: int, k: int, p: float, t: float) -> tuple[int, int, int]:
    """``(X, left, right)``: position of one second-class particle from the
    origin at time ``t`` and the first-class indicators of its neighbours."""
    tr = simulate(parse_pattern("P* * H*"), p, t, replica_rng(seed, k))
    (x,) = tr.final.sites_of(SECOND)
    return x, int(tr.final[x - 1] == FIRST), int(tr.final[x + 1] == FIRST)


def pair_batch(p: float, m: int, horizon: float, n_reps: int, seed: int,
               snapshot: float | None = None, threads: int | None = None,
               early_stop_gap: int | None = None) -> np.ndarray:
    EngineParams(p)
    return np.array(run_replicas(pair_replica, n_reps, seed, threads, p=p, m=m, horizon=horizon,
                                 snapshot=snapshot, early_stop_gap=early_stop_gap),
                    dtype=float).reshape(-1, 3)


def single_batch(p: float, t: float, n_reps: int, seed: int,
                 threads: int | None = None) -> np.ndarray:
    EngineParams(p)
    return np.array(run_replicas(single_replica, n_reps, seed, threads, p=p, t=t),
                    dtype=np.int64).reshape(-1, 3)


# -------------------------------------------------------------- estimators

def estimate_collision(p: float, m: int, t_max: float, n_reps: int, seed: int, *,
                       threads: int | None = None, early_stop_gap: int | None = None,
                       batch: np.ndarray | None = None) -> EstimateSummary:
    """P(tau <= t_max) with the cumulative estimates at ``t_max/4`` and ``t_max/2``
    from the same replicas, so the censoring tail is visible."""
    EngineParams(p)
    if m < 1:
        raise ValueError("m must be at least 1")
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    if batch is None:
        batch = pair_batch(p, m, t_max, n_reps, seed, threads=threads,
                           early_stop_gap=early_stop_gap)
    tau = np.asarray(batch, dtype=float)[:n_reps, 0]
    hit = ~np.isnan(tau)
    target, kind = collision_target(p, m)
    levels = {}
    for frac, name in ((0.25, "T/4"), (0.5, "T/2"), (1.0, "T")):
        levels[name] = float(np.mean(hit & (tau <= frac * t_max)))
    extras = {
        "cumulative": levels,
        "increments": {"T/4->T/2": levels["T/2"] - levels["T/4"],
                       "T/2->T": levels["T"] - levels["T/2"]},
        "early_stop_gap": early_stop_gap,
    }
    params = {"p": p, "m": m, "t_max": t_max, "n_reps": n_reps, "seed": seed}
    return bernoulli_summary("collision", params, hit, target=target, target_kind=kind,
                             censoring=float(1 - hit.mean()), extras=extras)


@dataclass
class SpeedLaw:
    samples: np.ndarray
    summary: EstimateSummary


def estimate_speed_law(p: float, t: float, n_reps: int, seed: int, *,
                       threads: int | None = None, batch: np.ndarray | None = None) -> SpeedLaw:
    """KS distance between X(t)/t and the uniform law on ``[-(p-q), p-q]``."""
    EngineParams(p)
    if t < 100:
        raise ValueError("t must be at least 100")
    if batch is None:
        batch = single_batch(p, t, n_reps, seed, threads)
    v = 2 * p - 1
    s = np.asarray(batch)[:n_reps, 0] / t
    ks = stats.kstest(s, "uniform", args=(-v, 2 * v))
    n = s.size
    extras = {
        "mean": float(s.mean()),
        "mean_stderr": float(s.std(ddof=1) / math.sqrt(n)),
        "p_nonpositive": float(np.mean(s <= 0)),
        "ks_pvalue": float(ks.pvalue),
        "support": [float(s.min()), float(s.max())],
    }
    summ = EstimateSummary("speed", {"p": p, "t": t, "n_reps": n_reps, "seed": seed},
                           float(ks.statistic), KS_NULL_SD / math.sqrt(n), int(n), target=0.0,
                           target_kind="limit-as-t-grows", extras=extras)
    return SpeedLaw(s, summ)


def _pair_alive(batch, n_reps, t):
    b = np.asarray(batch, dtype=float)[:n_reps]
    tau, x, y = b[:, 0], b[:, 1], b[:, 2]
    alive = np.isnan(tau) | (tau > t)
    if np.any(alive & np.isnan(x)):
        raise ValueError("batch lacks positions at the requested time")
    return alive, x, y


def estimate_separation(p: float, r: float, t: float, n_reps: int, seed: int, *,
                        threads: int | None = None, batch: np.ndarray | None = None,
                        horizon: float | None = None) -> EstimateSummary:
    """P(tau > t, X(t) <= rt < Y(t)) from two adjacent second-class particles."""
    EngineParams(p)
    v = 2 * p - 1
    if abs(r) > v:
        raise ValueError("|r| must not exceed p - q")
    if batch is None:
        batch = pair_batch(p, 1, t if horizon is None else horizon, n_reps, seed, snapshot=t,
                           threads=threads)
    alive, x, y = _pair_alive(batch, n_reps, t)
    hits = alive & (x <= r * t) & (r * t < y)
    return bernoulli_summary("separation", {"p": p, "r": r, "t": t, "n_reps": n_reps,
                                            "seed": seed}, hits,
                             target=separation_target(p, r), target_kind="limit-as-t-grows")


def estimate_scaled_distance(p: float, t: float, n_reps: int, seed: int, *,
                             threads: int | None = None, batch: np.ndarray | None = None,
                             horizon: float | None = None) -> EstimateSummary:
    """E[(Y(t) - X(t)) 1{tau > t}] / t."""
    EngineParams(p)
    if t < 100:
        raise ValueError("t must be at least 100")
    if batch is None:
        batch = pair_batch(p, 1, t if horizon is None else horizon, n_reps, seed, snapshot=t,
                           threads=threads)
    alive, x, y = _pair_alive(batch, n_reps, t)
    vals = np.where(alive, (y - x) / t, 0.0)
    return mean_summary("distance", {"p": p, "t": t, "n_reps": n_reps, "seed": seed}, vals,
                        target=distance_target(p), target_kind="limit-as-t-grows")


def estimate_neighbor_density(p: float, t: float, n_reps: int, seed: int, *,
                              threads: int | None = None,
                              batch: np.ndarray | None = None) -> tuple[EstimateSummary, EstimateSummary]:
    """Densities of first-class particles just left and just right of a
    second-class particle; each summary carries the paired sum in ``extras``."""
    EngineParams(p)
    if t < 100:
        raise ValueError("t must be at least 100")
    if batch is None:
        batch = single_batch(p, t, n_reps, seed, threads)
    b = np.asarray(batch)[:n_reps]
    left, right = b[:, 1].astype(bool), b[:, 2].astype(bool)
    tot = left.astype(float) + right
    paired = {"paired_sum": float(tot.mean()),
              "paired_sum_stderr": float(tot.std(ddof=1) / math.sqrt(tot.size))}
    tl, tr = neighbor_targets(p)
    params = {"p": p, "t": t, "n_reps": n_reps, "seed": seed}
    return (bernoulli_summary("neighbors-left", params, left, target=tl,
                              target_kind="limit-as-t-grows", extras=dict(paired)),
            bernoulli_summary("neighbors-right", params, right, target=tr,
                              target_kind="limit-as-t-grows", extras=dict(paired)))


def growth_replica(seed: int, k: int, sizes: tuple[int, ...]) -> tuple:
    """``(first occupied is (2,2), alive at each size...)`` on one weight grid."""
    N = max(sizes)
    w = exponential_weights(replica_rng(seed, k), N)
    mask = np.zeros((N + 1, N + 1), dtype=np.bool_)
    for x, y in THREE_SEEDS:
        mask[x, y] = True
    G = np.zeros((N + 1, N + 1))
    _lpp_kernel(w, mask, G)
    out = []
    for n in sizes:
        f = GrowthField(n, w[:n, :n], G[:n + 1, :n + 1], THREE_SEEDS)
        out.append(not red_cluster_status(f).surrounded)
    first = first_occupied(GrowthField(N, w, G, THREE_SEEDS))
    return (first == (2, 2), *out)


def estimate_coexistence(N: int, n_reps: int, seed: int, *, sizes: tuple[int, ...] | None = None,
                         threads: int | None = None, batch=None) -> EstimateSummary:
    """Fraction of grids where the red cluster is still alive at size ``N``.

    Alive-at-truncation over-counts survival, so this bounds 1/3 from above
    up to noise.  ``extras`` holds the estimate conditional on (2,2) not being
    occupied first, P(first occupied = (2,2)), and the alive fraction at
    every size in ``sizes`` (weights shared across sizes).
    """
    if N < 50:
        raise ValueError("N must be at least 50")
    sizes = tuple(sorted(set(sizes or ()) | {N}))
    if batch is None:
        batch = run_replicas(growth_replica, n_reps, seed, threads, sizes=sizes)
    b = np.asarray(batch, dtype=bool)[:n_reps]
    first22 = b[:, 0]
    alive = {n: b[:, 1 + j] for j, n in enumerate(sizes)}
    a = alive[N]
    rest = ~first22
    nrest = int(rest.sum())
    cond = float(a[rest].mean()) if nrest else NAN
    extras = {
        "conditional": {"estimate": cond,
                        "stderr": math.sqrt(cond * (1 - cond) / nrest) if nrest else NAN,
                        "n": nrest, "target": 0.5},
        "first_is_22": {"estimate": float(first22.mean()),
                        "stderr": math.sqrt(first22.mean() * (1 - first22.mean()) / first22.size),
                        "target": 1 / 3},
        "by_size": {str(n): float(alive[n].mean()) for n in sizes},
    }
    return bernoulli_summary("growth", {"n": N, "n_reps": n_reps, "seed": seed,
                                        "sizes": list(sizes)}, a,
                             target=1 / 3, target_kind="exact", extras=extras)
