"""Rarefaction-fan density and its empirical counterpart from the step start."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from .engine import EngineParams, replica_rng
from .fast import simulate
from .harness import run_replicas
from .lattice import FIRST, parse_pattern
from .trackers import current_right_of

STEP = "P* . H*"


def burgers_u(r, t: float, p: float):
    """Entropy density at position ``r`` and time ``t``; accepts scalars or arrays."""
    if t <= 0:
        raise ValueError("t must be positive")
    v = p - (1.0 - p)
    r_arr = np.asarray(r, dtype=float)
    fan = (v * t - r_arr) / (2.0 * v * t)
    out = np.where(r_arr <= -v * t, 1.0, np.where(r_arr > v * t, 0.0, fan))
    return float(out) if out.ndim == 0 else out


def flux_balance(r: float, p: float) -> float:
    """``(p-q) u (1-u) - r u`` at ``(r, 1)``: the growth rate of the current right of ``rt``."""
    u = burgers_u(r, 1.0, p)
    return (2 * p - 1) * u * (1 - u) - r * u


@dataclass(frozen=True)
class ProfileRow:
    r: float
    empirical: float
    target: float
    stderr: float


def _profile_replica(seed: int, k: int, p: float, t: float, sites: tuple[int, ...]) -> np.ndarray:
    final = simulate(parse_pattern(STEP), p, t, replica_rng(seed, k)).final
    return np.array([final[x] == FIRST for x in sites], dtype=np.int8)


def empirical_profile(p: float, t: float, sample_speeds: Sequence[float], n_reps: int,
                      seed: int, threads: int | None = None) -> list[ProfileRow]:
    """Mean first-class occupancy of site ``floor(rt)`` at time ``t`` from the step start."""
    EngineParams(p)
    if t <= 0:
        raise ValueError("t must be positive")
    sites = tuple(math.floor(r * t) for r in sample_speeds)
    occ = np.array(run_replicas(_profile_replica, n_reps, seed, threads, p=p, t=t, sites=sites),
                   dtype=float)
    rows = []
    for j, r in enumerate(sample_speeds):
        e = float(occ[:, j].mean())
        rows.append(ProfileRow(float(r), e, burgers_u(r, 1.0, p), math.sqrt(e * (1 - e) / n_reps)))
    return rows


def write_profile_csv(rows: Iterable[ProfileRow], fh: TextIO):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["r", "empirical", "target", "stderr"])
    for row in rows:
        w.writerow([repr(row.r), repr(row.empirical), repr(row.target), repr(row.stderr)])


@dataclass(frozen=True)
class DerivativeCheck:
    lhs: float
    rhs: float
    gap: float
    stderr: float
    delta: float
    n_reps: int


def _current_replica(seed: int, k: int, p: float, r: float, t0: float, t1: float) -> float:
    tr = simulate(parse_pattern(STEP), p, t1, replica_rng(seed, k), snapshot_times=(t0,))
    return current_right_of(tr.final, r, t1) - current_right_of(tr.snapshots[0], r, t0)


def current_derivative_check(p: float, r: float, t: float, n_reps: int, seed: int,
                             threads: int | None = None) -> DerivativeCheck:
    """Central difference of the mean current right of ``r s`` over ``s = t -/+ t/10``."""
    EngineParams(p)
    if abs(r) >= 2 * p - 1:
        raise ValueError("r must lie strictly inside the fan")
    delta = t / 10.0
    inc = np.array(run_replicas(_current_replica, n_reps, seed, threads, p=p, r=r,
                               t0=t - delta, t1=t + delta))
    lhs = float(inc.mean() / (2 * delta))
    se = float(inc.std(ddof=1) / math.sqrt(n_reps) / (2 * delta))
    rhs = flux_balance(r, p)
    return DerivativeCheck(lhs, rhs, lhs - rhs, se, delta, n_reps)
