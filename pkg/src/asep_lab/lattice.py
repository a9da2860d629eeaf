"""Two-type exclusion configurations on the integer line.

A configuration is first-class particles on a left half-line, holes on a
right half-line, and an explicit window of cells in between.  Cells are
stored as immutable ``bytes`` whose values are :class:`SiteState` codes;
lower codes have priority over higher ones.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from enum import IntEnum


class SiteState(IntEnum):
    FIRST = 0
    SECOND = 1
    HOLE = 2


FIRST, SECOND, HOLE = SiteState.FIRST, SiteState.SECOND, SiteState.HOLE

_CHAR_OF = {FIRST: ".", SECOND: "*", HOLE: "o"}
_STATE_OF = {v: k for k, v in _CHAR_OF.items()}
_FIRST_B = bytes([FIRST])
_HOLE_B = bytes([HOLE])


class WindowError(IndexError):
    """A site outside the materialized window was addressed."""


class PatternError(ValueError):
    pass


def priority(a: SiteState, b: SiteState) -> bool:
    """True iff a particle of state ``a`` may exchange with ``b`` when jumping onto it."""
    return a < b


@dataclass(frozen=True, eq=False)
class Configuration:
    """Window ``[left, left + len(cells) - 1]`` with first-class fill on the left
    and hole fill on the right."""

    left: int
    cells: bytes

    def __post_init__(self):
        if len(self.cells) < 3:
            raise ValueError("window length must be at least 3")
        if self.cells[0] != FIRST or self.cells[-1] != HOLE:
            raise ValueError("window must start with a first-class guard and end with a hole guard")

    @property
    def right(self) -> int:
        return self.left + len(self.cells) - 1

    def __getitem__(self, x: int) -> SiteState:
        i = x - self.left
        if i < 0:
            return FIRST
        if i >= len(self.cells):
            return HOLE
        return SiteState(self.cells[i])

    def contains(self, x: int) -> bool:
        return self.left <= x <= self.right

    def bounds(self) -> tuple[int, int]:
        return active_bounds(self)

    def sites_of(self, state: SiteState) -> list[int]:
        return [self.left + i for i, v in enumerate(self.cells) if v == state]

    def count(self, state: SiteState) -> int:
        return self.cells.count(state)

    def grown(self, l: int, r: int) -> "Configuration":
        """Return an equal configuration whose window covers ``[l, r]`` with
        at least one guard cell on each side; grows by doubling."""
        lo, hi = self.left, self.right
        n = len(self.cells)
        pad_l = pad_r = 0
        if l <= lo:
            pad_l = max(n, lo - l + 1)
        if r >= hi:
            pad_r = max(n, r - hi + 1)
        if not (pad_l or pad_r):
            return self
        return Configuration(lo - pad_l, _FIRST_B * pad_l + self.cells + _HOLE_B * pad_r)

    def trimmed(self) -> "Configuration":
        """Smallest window holding the active region plus one guard cell each side."""
        l, r = active_bounds(self)
        return window_of(self, l, r)

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        a, b = self.trimmed(), other.trimmed()
        return a.left == b.left and a.cells == b.cells

    def __hash__(self):
        t = self.trimmed()
        return hash((t.left, t.cells))

    def __repr__(self):
        return f"Configuration({format_pattern(self)!r})"

    def dump(self) -> str:
        """Canonical text dump: window bounds and the cell string."""
        return f"{self.left} {self.right} {''.join(_CHAR_OF[v] for v in self.cells)}"

    @classmethod
    def from_dump(cls, text: str) -> "Configuration":
        left, right, body = text.split()
        cells = bytes(_STATE_OF[ch] for ch in body)
        if int(left) + len(cells) - 1 != int(right):
            raise ValueError("dump bounds do not match its cell string")
        return cls(int(left), cells)

    @classmethod
    def from_states(cls, left: int, states) -> "Configuration":
        """Build from a state sequence covering sites ``left, left+1, ...``; guards are added."""
        body = bytes(int(s) for s in states)
        return cls(left - 1, _FIRST_B + body + _HOLE_B)


def window_of(c: Configuration, l: int, r: int) -> Configuration:
    """Sub-window ``[l, r]`` of ``c`` (guards included), padded to length 3."""
    cells = bytes(c[x] for x in range(l, r + 1)) if not (c.contains(l) and c.contains(r)) \
        else c.cells[l - c.left: r - c.left + 1]
    if len(cells) < 3:
        cells += _HOLE_B
    return Configuration(l, cells)


def active_bounds(c: Configuration) -> tuple[int, int]:
    """``(l, r)`` such that every bond outside ``[l, r]`` joins two equal states."""
    cells = c.cells
    first_non_particle = len(cells) - len(cells.lstrip(_FIRST_B))
    last_non_hole = len(cells.rstrip(_HOLE_B)) - 1
    return c.left + first_non_particle - 1, c.left + last_non_hole + 1


def exchange(c: Configuration, x: int, y: int) -> Configuration:
    """Swap the contents of adjacent sites ``x`` and ``y``."""
    if abs(x - y) != 1:
        raise ValueError(f"sites {x} and {y} are not neighbours")
    if not (c.contains(x) and c.contains(y)):
        raise WindowError(f"bond ({x}, {y}) outside window [{c.left}, {c.right}]")
    i = min(x, y) - c.left
    cells = c.cells
    if cells[i] == cells[i + 1]:
        return c
    if i == 0 or i + 2 == len(cells):
        # keep a guard cell on both sides of the swapped bond
        c = c.grown(min(x, y) - 1, max(x, y) + 1)
        i, cells = min(x, y) - c.left, c.cells
    return Configuration(c.left, cells[:i] + bytes((cells[i + 1], cells[i])) + cells[i + 2:])


_PATTERN_RE = re.compile(r"^\s*P\*\s+(?P<body>\S+)\s+H\*\s*$")


def parse_pattern(text: str) -> Configuration:
    """Parse ``P* <body> H*``; body over ``.``/``*``/``o``, ``_`` marks the origin.

    >>> parse_pattern("P* *o* H*").sites_of(SECOND)
    [0, 2]
    """
    m = _PATTERN_RE.match(text)
    if m is None:
        if re.match(r"^\s*P\*\s+H\*\s*$", text):
            raise PatternError("empty body")
        raise PatternError(f"pattern must look like 'P* <body> H*': {text!r}")
    raw = m.group("body")
    if raw.count("_") > 1:
        raise PatternError("multiple origin marks")
    origin = 0
    states = []
    for ch in raw:
        if ch == "_":
            origin = len(states)
            continue
        if ch not in _STATE_OF:
            raise PatternError(f"illegal character {ch!r} in pattern body")
        states.append(_STATE_OF[ch])
    if not states:
        raise PatternError("empty body")
    if raw.endswith("_"):
        raise PatternError("origin mark must precede a body character")
    return Configuration.from_states(-origin, states)


def format_pattern(c: Configuration) -> str:
    """Canonical pattern: the minimal body holding the active region and the origin."""
    l, r = active_bounds(c)
    lo, hi = min(l + 1, 0), max(r - 1, 0)
    body = "".join(_CHAR_OF[c[x]] for x in range(lo, hi + 1))
    if lo == 0:
        return f"P* {body} H*"
    k = -lo
    return f"P* {body[:k]}_{body[k:]} H*"
