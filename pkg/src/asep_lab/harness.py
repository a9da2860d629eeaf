"""Replica scheduling and summary statistics shared by every experiment."""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

Z95 = 1.96
TARGET_KINDS = ("exact", "conjecture", "limit-as-t-grows", "none")


@dataclass
class EstimateSummary:
    experiment: str
    params: dict
    estimate: float
    stderr: float
    n_reps: int
    target: float | None = None
    target_kind: str = "none"
    censoring: float | None = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.target_kind not in TARGET_KINDS:
            raise ValueError(f"unknown target kind {self.target_kind!r}")

    @property
    def ci95(self) -> tuple[float, float]:
        return (self.estimate - Z95 * self.stderr, self.estimate + Z95 * self.stderr)

    @property
    def conjecture(self) -> bool:
        return self.target_kind == "conjecture"

    def gap(self) -> float | None:
        return None if self.target is None else self.estimate - self.target

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "params": dict(self.params),
            "estimate": self.estimate,
            "stderr": self.stderr,
            "ci95": list(self.ci95),
            "n_reps": self.n_reps,
            "target": self.target,
            "target_kind": self.target_kind,
            "conjecture": self.conjecture,
            "censoring": self.censoring,
            "extras": self.extras,
        }


def bernoulli_summary(experiment: str, params: dict, hits: Sequence[bool] | np.ndarray,
                      **kw) -> EstimateSummary:
    x = np.asarray(hits, dtype=bool)
    n = int(x.size)
    if n == 0:
        raise ValueError("no replicas")
    e = float(x.mean())
    return EstimateSummary(experiment, params, e, math.sqrt(e * (1 - e) / n), n, **kw)


def mean_summary(experiment: str, params: dict, values: Sequence[float] | np.ndarray,
                 **kw) -> EstimateSummary:
    x = np.asarray(values, dtype=float)
    n = int(x.size)
    if n == 0:
        raise ValueError("no replicas")
    se = float(x.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    return EstimateSummary(experiment, params, float(x.mean()), se, n, **kw)


def default_threads() -> int:
    return os.cpu_count() or 1


def _run_chunk(fn: Callable, seed: int, start: int, stop: int, kwargs: dict) -> list:
    return [fn(seed, k, **kwargs) for k in range(start, stop)]


def run_replicas(fn: Callable[..., Any], n_reps: int, seed: int, threads: int | None = None,
                 replica_offset: int = 0, **kwargs) -> list:
    """Evaluate ``fn(seed, k, **kwargs)`` for replicas ``k = offset .. offset+n-1``.

    Results come back in replica order whatever the worker count, so any fold
    over them is independent of parallelism.  ``fn`` must be picklable.
    """
    threads = default_threads() if threads is None else int(threads)
    if threads < 1:
        raise ValueError("threads must be positive")
    lo, hi = replica_offset, replica_offset + int(n_reps)
    if threads == 1 or n_reps < 2:
        return _run_chunk(fn, seed, lo, hi, kwargs)
    nchunks = min(n_reps, threads * 4)
    bounds = np.linspace(lo, hi, nchunks + 1).astype(int)
    out: list = []
    with ProcessPoolExecutor(max_workers=threads) as ex:
        futs = [ex.submit(_run_chunk, fn, seed, int(a), int(b), kwargs)
                for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        for f in futs:
            out.extend(f.result())
    return out
