"""Compiled event loop for long single-configuration runs.

Cells hold class codes ``0..K``; code 0 fills the left half-line, code ``K``
the right one, and a lower code has priority over a higher one.  The
two-type system is ``K = 2`` with the :class:`~asep_lab.lattice.SiteState`
codes.  Draw order matches :func:`asep_lab.engine.run_coupled`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np

from .engine import Direction, EventTrace
from .lattice import HOLE, SECOND, Configuration

REACHED, STOPPED, GROW, TRACE_FULL = 0, 1, 2, 3

# integer state slots
_LO, _HI, _OT_COUNT, _NTRACE = 0, 1, 2, 3
# float state slots
_T, _TNEXT, _TAU = 0, 1, 2


@nb.njit(cache=True)
def _advance(cells, K, si, sf, t_stop, p, rng, tracked, stop_tracked,
             ot_code, ot_hi, ot_need, tr_t, tr_src, tr_dir, trace_on, offset):
    n = cells.shape[0]
    lo = si[_LO]
    hi = si[_HI]
    t = sf[_T]
    t_next = sf[_TNEXT]
    status = REACHED
    while True:
        if lo < 1 or hi > n - 2:
            status = GROW
            break
        if trace_on and si[_NTRACE] >= tr_t.shape[0]:
            status = TRACE_FULL
            break
        nbonds = hi - lo
        if t_next < 0.0:
            t_next = t + rng.standard_exponential() / nbonds
        if t_next > t_stop:
            status = REACHED
            break
        x = lo + int(rng.random() * nbonds)
        right = True
        if p < 1.0:
            right = rng.random() < p
        t = t_next
        t_next = -1.0
        if trace_on:
            k = si[_NTRACE]
            tr_t[k] = t
            if right:
                tr_src[k] = x + offset
                tr_dir[k] = 1
            else:
                tr_src[k] = x + 1 + offset
                tr_dir[k] = -1
            si[_NTRACE] = k + 1
        a = cells[x]
        b = cells[x + 1]
        if a == b:
            if a == tracked and sf[_TAU] < 0.0:
                sf[_TAU] = t
                if stop_tracked:
                    status = STOPPED
                    break
            continue
        if right:
            if a > b:
                continue
            cells[x] = b
            cells[x + 1] = a
            if a == ot_code and b > ot_code and b <= ot_hi:
                si[_OT_COUNT] += 1
                if si[_OT_COUNT] == ot_need:
                    sf[_TAU] = t
                    status = STOPPED
                    break
        else:
            if b > a:
                continue
            cells[x] = b
            cells[x + 1] = a
        while cells[lo] != 0:
            lo -= 1
        while cells[lo + 1] == 0:
            lo += 1
        while cells[hi] != K:
            hi += 1
        while cells[hi - 1] == K:
            hi -= 1
    si[_LO] = lo
    si[_HI] = hi
    sf[_T] = t
    sf[_TNEXT] = t_next
    return status


class ClassRun:
    """Resumable run of a class-code configuration.

    ``left`` is the site of ``cells[0]``.  The window doubles whenever the
    active region reaches its edge.
    """

    def __init__(self, left: int, cells: np.ndarray, K: int, p: float,
                 rng: np.random.Generator, *, tracked: int = -1, stop_on_tracked: bool = False,
                 overtake: tuple[int, int, int] | None = None, margin: int = 64,
                 trace: bool = False):
        self.dtype = np.int8 if K <= 127 else np.int32
        cells = np.asarray(cells, dtype=self.dtype)
        if cells[0] != 0 or cells[-1] != K:
            raise ValueError("cells must start with code 0 and end with code K")
        self.K = int(K)
        self.p = float(p)
        self.rng = rng
        self.tracked = int(tracked)
        self.stop_on_tracked = bool(stop_on_tracked)
        self.ot = overtake if overtake is not None else (-1, -1, 0)
        m = int(margin)
        self.cells = np.concatenate([np.zeros(m, self.dtype), cells, np.full(m, K, self.dtype)])
        self.left = int(left) - m
        lo = int(np.flatnonzero(self.cells != 0)[0]) - 1
        hi = int(np.flatnonzero(self.cells != K)[-1]) + 1
        self.si = np.array([lo, hi, 0, 0], dtype=np.int64)
        self.sf = np.array([0.0, -1.0, -1.0])
        self.trace_on = trace
        cap = 1024 if trace else 1
        self.tr_t = np.empty(cap)
        self.tr_src = np.empty(cap, np.int64)
        self.tr_dir = np.empty(cap, np.int8)
        self.stopped = False

    @property
    def clock(self) -> float:
        return float(self.sf[_T])

    @property
    def tau(self) -> float | None:
        v = float(self.sf[_TAU])
        return None if v < 0 else v

    @property
    def overtaken(self) -> int:
        return int(self.si[_OT_COUNT])

    def _grow(self):
        n = self.cells.shape[0]
        self.cells = np.concatenate([np.zeros(n, self.dtype), self.cells,
                                     np.full(n, self.K, self.dtype)])
        self.left -= n
        self.si[_LO] += n
        self.si[_HI] += n

    def _grow_trace(self):
        k = self.tr_t.shape[0]
        self.tr_t = np.concatenate([self.tr_t, np.empty(k)])
        self.tr_src = np.concatenate([self.tr_src, np.empty(k, np.int64)])
        self.tr_dir = np.concatenate([self.tr_dir, np.empty(k, np.int8)])

    def advance(self, t_stop: float) -> bool:
        """Run until the next epoch would pass ``t_stop``; False if stopped early."""
        if self.stopped:
            return False
        while True:
            st = _advance(self.cells, self.K, self.si, self.sf, float(t_stop), self.p, self.rng,
                          self.tracked, self.stop_on_tracked, self.ot[0], self.ot[1], self.ot[2],
                          self.tr_t, self.tr_src, self.tr_dir, self.trace_on, self.left)
            if st == GROW:
                self._grow()
            elif st == TRACE_FULL:
                self._grow_trace()
            elif st == STOPPED:
                self.stopped = True
                return False
            else:
                return True

    def bounds(self) -> tuple[int, int]:
        return int(self.si[_LO]) + self.left, int(self.si[_HI]) + self.left

    def window(self) -> tuple[int, np.ndarray]:
        """Active region plus guards: ``(site of first cell, codes)``."""
        lo, hi = int(self.si[_LO]), int(self.si[_HI])
        return self.left + lo, self.cells[lo:hi + 1].copy()

    def trace(self) -> EventTrace:
        k = int(self.si[_NTRACE])
        tr = EventTrace()
        tr.times = self.tr_t[:k].tolist()
        tr.sources = self.tr_src[:k].tolist()
        tr.directions = [Direction.RIGHT if d > 0 else Direction.LEFT for d in self.tr_dir[:k]]
        tr.effects = [""] * k
        return tr


@dataclass
class Trajectory:
    tau: float | None
    snapshots: list[Configuration | None]
    final: Configuration
    clock: float
    trace: EventTrace | None = None


def simulate(c: Configuration, p: float, horizon: float, rng: np.random.Generator,
             snapshot_times=(), stop_on_collision: bool = False,
             trace: bool = False) -> Trajectory:
    """Run a two-type configuration to ``horizon``.

    The collision time (first attempted jump between two second-class
    particles) is recorded; with ``stop_on_collision`` the run ends there, and
    snapshots after that time are ``None``.
    """
    run = ClassRun(c.left, np.frombuffer(c.cells, dtype=np.int8), 2, p, rng,
                   tracked=int(SECOND), stop_on_tracked=stop_on_collision,
                   margin=int(horizon) + 64, trace=trace)
    snaps: list[Configuration | None] = []
    for ts in snapshot_times:
        if ts > horizon:
            raise ValueError("snapshot after horizon")
        if run.advance(ts):
            snaps.append(_to_config(run))
        else:
            snaps.append(None)
    run.advance(horizon)
    return Trajectory(run.tau, snaps, _to_config(run), run.clock,
                      run.trace() if trace else None)


def _to_config(run: ClassRun) -> Configuration:
    left, codes = run.window()
    cells = codes.astype(np.int8).tobytes()
    if len(cells) < 3:
        cells += bytes([HOLE])
    return Configuration(left, cells)
