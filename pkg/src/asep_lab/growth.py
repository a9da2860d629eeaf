"""Corner growth with last-passage times, three-colour competition and
competition interfaces.

Cells are ``(x, y)`` with ``x, y >= 1``; parents of ``(x, y)`` are
``(x-1, y)`` and ``(x, y-1)``.  Arrays are indexed ``G[x, y]`` with a zero
row and column for the axes; weights are ``w[x-1, y-1]``.

Particle picture: particles are labelled ``P1, P2, ...`` from right to left
and holes ``H1, H2, ...`` from left to right, and ``G(x, y)`` is the time at
which particle ``P_y`` overtakes hole ``H_x``.  A second-class particle is a
hole immediately followed by a particle, ``[H_x P_y]``, and is recorded as the
cell ``(x, y)``.  :func:`correspondence_oracle` checks this mapping by direct
simulation.
"""
from __future__ import annotations

import enum
import heapq
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numba as nb
import numpy as np

Cell = tuple[int, int]

THREE_SEEDS: tuple[Cell, ...] = ((1, 1), (1, 2), (2, 1))
ONE_SEED: tuple[Cell, ...] = ((1, 1),)


class GTieError(ValueError):
    """Two competing cells have exactly equal last-passage times."""


class Color(enum.IntEnum):
    UNSET = 0
    LIGHT_BLUE = 1
    DARK_BLUE = 2
    RED = 3


@dataclass
class GrowthField:
    N: int
    w: np.ndarray
    G: np.ndarray
    seeds: tuple[Cell, ...]

    def g(self, z: Cell):
        return self.G[z[0], z[1]]

    def inside(self, z: Cell) -> bool:
        return 1 <= z[0] <= self.N and 1 <= z[1] <= self.N


@nb.njit(cache=True)
def _lpp_kernel(w, seedmask, G):
    n = w.shape[0]
    for x in range(1, n + 1):
        for y in range(1, n + 1):
            if seedmask[x, y]:
                G[x, y] = 0.0
            else:
                a = G[x - 1, y]
                b = G[x, y - 1]
                G[x, y] = w[x - 1, y - 1] + (a if a > b else b)


def compute_lpp(w, seeds: Iterable[Cell] = THREE_SEEDS) -> GrowthField:
    """Last-passage times for weights ``w`` with ``G = 0`` on ``seeds`` and the axes.

    Float weights use a compiled loop; any other element type (for example
    :class:`fractions.Fraction`) is evaluated exactly in Python.
    """
    seeds = tuple(tuple(s) for s in seeds)
    if seeds not in ((), ONE_SEED, THREE_SEEDS):
        raise ValueError(f"unsupported seed set {seeds}")
    arr = np.asarray(w)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("weights must form a square grid")
    N = arr.shape[0]
    if N < 2 and seeds == THREE_SEEDS:
        raise ValueError("three seeds need N >= 2")
    if np.issubdtype(arr.dtype, np.floating) or np.issubdtype(arr.dtype, np.integer):
        wf = arr.astype(float)
        if np.any(wf < 0):
            raise ValueError("weights must be nonnegative")
        mask = np.zeros((N + 1, N + 1), dtype=np.bool_)
        for x, y in seeds:
            mask[x, y] = True
        G = np.zeros((N + 1, N + 1))
        _lpp_kernel(wf, mask, G)
        return GrowthField(N, wf, G, seeds)
    wo = np.empty((N, N), dtype=object)
    for i in range(N):
        for j in range(N):
            wo[i, j] = arr[i][j]
            if wo[i, j] < 0:
                raise ValueError("weights must be nonnegative")
    zero = wo[0, 0] * 0
    G = np.empty((N + 1, N + 1), dtype=object)
    G[:, :] = zero
    seedset = set(seeds)
    for x in range(1, N + 1):
        for y in range(1, N + 1):
            if (x, y) in seedset:
                G[x, y] = zero
            else:
                G[x, y] = wo[x - 1, y - 1] + max(G[x - 1, y], G[x, y - 1])
    return GrowthField(N, wo, G, seeds)


_SHELL_ORDER: dict[int, np.ndarray] = {}


def _shell_order(N: int) -> np.ndarray:
    """Flat indices of an ``N x N`` grid ordered by shell ``max(x, y)``."""
    if N not in _SHELL_ORDER:
        x, y = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
        key = np.lexsort((y.ravel(), x.ravel(), np.maximum(x, y).ravel()))
        _SHELL_ORDER[N] = key
    return _SHELL_ORDER[N]


def exponential_weights(rng: np.random.Generator, N: int) -> np.ndarray:
    """Mean-one exponential weights filled shell by shell, so the grid drawn for
    a smaller ``N`` is the top-left block of the grid for a larger one."""
    flat = np.empty(N * N)
    flat[_shell_order(N)] = rng.standard_exponential(N * N)
    return flat.reshape(N, N)


@nb.njit(cache=True)
def _color_kernel(G, colors):
    n = G.shape[0] - 1
    for x in range(1, n + 1):
        for y in range(1, n + 1):
            if (x == 1 and y <= 2) or (y == 1 and x <= 2):
                colors[x, y] = 0
            elif x == 1:
                colors[x, y] = 2
            elif y == 1:
                colors[x, y] = 1
            elif x == 2 and y == 2:
                colors[x, y] = 3
            else:
                a = G[x - 1, y]
                b = G[x, y - 1]
                if a == b:
                    return x * (n + 1) + y
                colors[x, y] = colors[x - 1, y] if a > b else colors[x, y - 1]
    return -1


@dataclass
class ColorField:
    N: int
    colors: np.ndarray

    def color(self, z: Cell) -> Color:
        return Color(int(self.colors[z[0], z[1]]))

    def red_cells(self) -> list[Cell]:
        xs, ys = np.nonzero(self.colors == Color.RED)
        return sorted(zip(xs.tolist(), ys.tolist()))


def assign_colors(f: GrowthField) -> ColorField:
    """Colour each cell like its later-occupied parent; raises :class:`GTieError` on a tie."""
    if f.seeds != THREE_SEEDS:
        raise ValueError("colouring needs the three-seed field")
    N = f.N
    colors = np.zeros((N + 1, N + 1), dtype=np.int8)
    if f.G.dtype == object:
        for x in range(1, N + 1):
            for y in range(1, N + 1):
                if (x == 1 and y <= 2) or (y == 1 and x <= 2):
                    continue
                if x == 1:
                    colors[x, y] = Color.DARK_BLUE
                elif y == 1:
                    colors[x, y] = Color.LIGHT_BLUE
                elif (x, y) == (2, 2):
                    colors[x, y] = Color.RED
                else:
                    a, b = f.G[x - 1, y], f.G[x, y - 1]
                    if a == b:
                        raise GTieError(f"tie between the parents of {(x, y)}")
                    colors[x, y] = colors[x - 1, y] if a > b else colors[x, y - 1]
        return ColorField(N, colors)
    code = _color_kernel(f.G, colors)
    if code >= 0:
        raise GTieError(f"tie between the parents of {divmod(code, N + 1)}")
    return ColorField(N, colors)


@dataclass
class InterfacePath:
    start: Cell
    cells: list[Cell] = field(default_factory=list)
    truncated: bool = False

    def __post_init__(self):
        if not self.cells:
            self.cells = [self.start]

    @property
    def head(self) -> Cell:
        return self.cells[-1]


def step(f: GrowthField, z: Cell) -> Cell | None:
    """Next interface cell from ``z``: the forward neighbour occupied first, or
    ``None`` when that choice needs a cell outside the grid."""
    x, y = z
    if x + 1 > f.N or y + 1 > f.N:
        return None
    up, right = f.G[x, y + 1], f.G[x + 1, y]
    if up == right:
        raise GTieError(f"tie between the forward neighbours of {z}")
    return (x, y + 1) if up < right else (x + 1, y)


def trace_path(f: GrowthField, start: Cell, max_steps: int | None = None) -> InterfacePath:
    path = InterfacePath(start)
    while max_steps is None or len(path.cells) <= max_steps:
        nxt = step(f, path.head)
        if nxt is None:
            path.truncated = True
            break
        path.cells.append(nxt)
    return path


class InterfaceStatus(enum.Enum):
    MET = "met"
    UNDETERMINED = "undetermined"


@dataclass
class Interfaces:
    upper_left: InterfacePath
    lower_right: InterfacePath
    meet: Cell | None
    meet_step: int | None
    status: InterfaceStatus


def trace_interfaces(f: GrowthField, continue_after_meet: bool = False) -> Interfaces:
    """Trace the interfaces from ``(1, 2)`` and ``(2, 1)`` in lockstep.

    Both sit on antidiagonal ``x + y = 3 + n`` after ``n`` steps, so they can
    only meet at equal step counts.  After a meet both paths share one
    continuation, traced only when ``continue_after_meet`` is set.
    """
    if f.seeds != THREE_SEEDS or f.N < 3:
        raise ValueError("two interfaces need the three-seed field with N >= 3")
    ul, lr = InterfacePath((1, 2)), InterfacePath((2, 1))
    while True:
        a, b = step(f, ul.head), step(f, lr.head)
        if a is None or b is None:
            ul.truncated = lr.truncated = True
            return Interfaces(ul, lr, None, None, InterfaceStatus.UNDETERMINED)
        ul.cells.append(a)
        lr.cells.append(b)
        if a == b:
            n = len(ul.cells) - 1
            if continue_after_meet:
                rest = trace_path(f, a)
                ul.cells += rest.cells[1:]
                lr.cells += rest.cells[1:]
                ul.truncated = lr.truncated = rest.truncated
            return Interfaces(ul, lr, a, n, InterfaceStatus.MET)


def adjacent(left: Cell, right: Cell) -> bool:
    """The two second-class particles are neighbours: ``right = left + (1, -1)``."""
    return right[0] == left[0] + 1 and left[1] == right[1] + 1


def interface_positions(ul_cell: Cell, lr_cell: Cell) -> tuple[int, int]:
    """Sites of the left and right second-class particles for interface cells."""
    return ul_cell[0] - ul_cell[1] + 1, lr_cell[0] - lr_cell[1]


class RedKind(enum.Enum):
    SURROUNDED = "surrounded"
    ALIVE_AT_TRUNCATION = "alive-at-truncation"


@dataclass(frozen=True)
class RedStatus:
    kind: RedKind
    cell: Cell | None = None

    @property
    def surrounded(self) -> bool:
        return self.kind is RedKind.SURROUNDED


def red_cluster_status(f: GrowthField) -> RedStatus:
    """Surrounded at the interfaces' meeting cell, or alive when the grid ends first."""
    it = trace_interfaces(f)
    if it.status is InterfaceStatus.MET:
        return RedStatus(RedKind.SURROUNDED, it.meet)
    return RedStatus(RedKind.ALIVE_AT_TRUNCATION)


def red_status_from_colors(cf: ColorField) -> RedStatus:
    """Same question answered from colours alone.

    Red cells on antidiagonal ``s`` only descend from red cells on ``s - 1``.
    When every red cell on ``s - 1`` has both children inside the grid and
    none of those children is red, the cluster is closed, and its last cell
    is the single red cell on ``s - 1``.
    """
    N = cf.N
    c = cf.colors
    prev = [(2, 2)]
    for s in range(5, 2 * N + 1):
        if any(x + 1 > N or y + 1 > N for x, y in prev):
            return RedStatus(RedKind.ALIVE_AT_TRUNCATION)
        cur = [(x, s - x) for x in range(max(1, s - N), min(N, s - 1) + 1)
               if c[x, s - x] == Color.RED]
        if not cur:
            if len(prev) != 1:
                raise AssertionError("a closing red antidiagonal must hold one cell")
            return RedStatus(RedKind.SURROUNDED, prev[0])
        prev = cur
    return RedStatus(RedKind.ALIVE_AT_TRUNCATION)


def first_occupied(f: GrowthField) -> Cell:
    """Which of ``(1,3)``, ``(2,2)``, ``(3,1)`` is occupied first."""
    cands = [(1, 3), (2, 2), (3, 1)]
    vals = [f.g(z) for z in cands]
    if len(set(vals)) < 3:
        raise GTieError("tie among the first candidate cells")
    return cands[int(np.argmin(vals))]


# correspondence with the particle system ---------------------------------

@dataclass
class OracleReport:
    ok: bool
    mismatches: list[str] = field(default_factory=list)
    overtakes: int = 0
    tau: object = None


def _initial_line(N: int, seeds: tuple[Cell, ...]) -> list[tuple[str, int]]:
    """Left to right: particles ``P_N .. P_k``, the seeded block, holes ``H_j .. H_N``."""
    if seeds == THREE_SEEDS:
        mid = [("H", 1), ("P", 2), ("H", 2), ("P", 1)]
        ps, hs = range(N, 2, -1), range(3, N + 1)
    elif seeds == ONE_SEED:
        mid = [("H", 1), ("P", 1)]
        ps, hs = range(N, 1, -1), range(2, N + 1)
    else:
        mid = []
        ps, hs = range(N, 0, -1), range(1, N + 1)
    return [("P", j) for j in ps] + mid + [("H", i) for i in hs]


def correspondence_oracle(w, seeds: Iterable[Cell] = THREE_SEEDS,
                          check_pairs: bool = True) -> OracleReport:
    """Simulate the labelled one-type system driven by ``w`` and compare it with
    the last-passage field and its interfaces.

    Particle ``P_y`` passes hole ``H_x`` a time ``w(x, y)`` after it first
    stands directly left of it.  Checked: every overtaking time equals
    ``G(x, y)``; the hole/particle labels under each second-class pair follow
    the traced interface cells; the pairs sit side by side exactly when the
    adjacency condition holds; the first time the left pair tries to move
    onto the right one equals ``G`` at the interfaces' meeting cell.
    """
    seeds = tuple(tuple(s) for s in seeds)
    f = compute_lpp(w, seeds)
    N = f.N
    rep = OracleReport(True)

    def bad(msg):
        rep.ok = False
        rep.mismatches.append(msg)

    line = _initial_line(N, seeds)
    pos = {item: k for k, item in enumerate(line)}
    times: dict[Cell, object] = {z: f.w[0, 0] * 0 for z in seeds}
    heap: list = []

    def schedule(k, now):
        # the particle at k faces the hole at k + 1
        if 0 <= k < len(line) - 1 and line[k][0] == "P" and line[k + 1][0] == "H":
            y, x = line[k][1], line[k + 1][1]
            heapq.heappush(heap, (now + f.w[x - 1, y - 1], x, y))

    zero = f.w[0, 0] * 0
    for k in range(len(line) - 1):
        schedule(k, zero)

    if not check_pairs:
        pairs: dict[str, Cell] = {}
    elif seeds == THREE_SEEDS:
        pairs = {"ul": (1, 2), "lr": (2, 1)}
    elif seeds == ONE_SEED:
        pairs = {"one": (1, 1)}
    else:
        pairs = {}
    trails = {k: [v] for k, v in pairs.items()}
    live = {k: v[0] < N and v[1] < N for k, v in pairs.items()}
    two = "ul" in pairs
    met = False

    def check_pair(name):
        i, j = pairs[name]
        if pos[("P", j)] != pos[("H", i)] + 1:
            bad(f"{name} pair labels {pairs[name]} are not a hole-particle pair")

    while heap:
        t, x, y = heapq.heappop(heap)
        k = pos[("P", y)]
        if line[k + 1] != ("H", x):
            bad(f"P{y} is not directly left of H{x} at its scheduled pass")
            continue
        times[(x, y)] = t
        rep.overtakes += 1
        if t != f.G[x, y]:
            bad(f"pass time of P{y} over H{x} is {t}, field says {f.G[x, y]}")
        line[k], line[k + 1] = line[k + 1], line[k]
        pos[("H", x)], pos[("P", y)] = k, k + 1
        schedule(k - 1, t)
        schedule(k + 1, t)
        if met or not any(live.values()):
            continue
        if two and live["ul"] and live["lr"]:
            li, lj = pairs["ul"]
            if (x, y) == (li + 1, lj) and adjacent(pairs["ul"], pairs["lr"]):
                met = True
                rep.tau = t
        for name, (i, j) in pairs.items():
            if not live[name]:
                continue
            if (x, y) == (i + 1, j) or (x, y) == (i, j + 1):
                pairs[name] = (x, y)
                trails[name].append((x, y))
                live[name] = x < N and y < N
        if met:
            if pairs["ul"] != pairs["lr"]:
                bad("colliding pairs do not land on one cell")
            continue
        for name in pairs:
            if live[name]:
                check_pair(name)
        if two and live["ul"] and live["lr"]:
            hl = pos[("H", pairs["lr"][0])]
            pl = pos[("P", pairs["ul"][1])]
            if adjacent(pairs["ul"], pairs["lr"]) != (hl == pl + 1):
                bad(f"adjacency condition disagrees with positions at {pairs}")

    expected = {(x, y) for x in range(1, N + 1) for y in range(1, N + 1)}
    if set(times) != expected:
        bad(f"{len(expected - set(times))} cells never overtaken")

    if seeds == THREE_SEEDS and check_pairs and N >= 3:
        it = trace_interfaces(f)
        if it.status is InterfaceStatus.MET:
            if not met:
                bad("interfaces meet but the pairs never collided")
            elif rep.tau != f.g(it.meet):
                bad(f"collision time {rep.tau} differs from G at the meet {f.g(it.meet)}")
            _compare(bad, "upper-left", trails["ul"], it.upper_left.cells)
            _compare(bad, "lower-right", trails["lr"], it.lower_right.cells)
        else:
            if met:
                bad("pairs collided but the interfaces did not meet inside the grid")
            else:
                _compare(bad, "upper-left", trails["ul"][:len(it.upper_left.cells)],
                         it.upper_left.cells)
                _compare(bad, "lower-right", trails["lr"][:len(it.lower_right.cells)],
                         it.lower_right.cells)
    elif seeds == ONE_SEED and check_pairs:
        path = trace_path(f, (1, 1))
        _compare(bad, "interface", trails["one"][:len(path.cells)], path.cells)
    return rep


def _compare(bad, name, got: Sequence[Cell], want: Sequence[Cell]):
    if list(got) != list(want):
        n = next((k for k, (a, b) in enumerate(zip(got, want)) if a != b), min(len(got), len(want)))
        bad(f"{name} pair leaves its interface at step {n}")


# text dumps ---------------------------------------------------------------

def dump_grid(a: np.ndarray) -> str:
    """Dimensions header, then one row-major line per row, values in ``repr`` form."""
    a = np.asarray(a)
    buf = io.StringIO()
    buf.write(f"{a.shape[0]} {a.shape[1]}\n")
    for row in a:
        buf.write(" ".join(repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)
                           for v in row))
        buf.write("\n")
    return buf.getvalue()


def load_grid(text: str, dtype=float) -> np.ndarray:
    lines = text.strip().splitlines()
    r, c = map(int, lines[0].split())
    if dtype is Fraction:
        rows = [[Fraction(v) for v in ln.split()] for ln in lines[1:]]
        out = np.empty((r, c), dtype=object)
        for i, row in enumerate(rows):
            out[i, :] = row
    else:
        out = np.array([[dtype(v) for v in ln.split()] for ln in lines[1:]], dtype=dtype)
    if out.shape != (r, c):
        raise ValueError("grid body does not match its header")
    return out
