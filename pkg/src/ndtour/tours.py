"""Tour representation, verification, canonical form, and site detection.

A *site* is a pair of tour edges whose endpoints are displaced from each
other by ``+-mu`` along a single axis (mu = alpha or beta).  Writing the tour
as ``a^0, a^1, ...`` with edge ``n`` joining ``a^n`` to ``a^(n+1)``:

* well-oriented:      ``a^(n+1) - a^m   = +-(a^(m+1) - a^n)   in {+-mu e_j}``
* non-well-oriented:  ``a^n     - a^m   = +-(a^(m+1) - a^(n+1)) in {+-mu e_j}``

For the classical knight the magnitude-2 sites split further: the ``+``
branch makes the two edges images of each other under flipping the move's
beta-component (cross patterns WOCP/NWOCP), the ``-`` branch keeps the move
unchanged (parallel patterns WOPP/NWOPP).  These four edge surgeries are what
the dimension-lifting construction splices layers with.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np

from .boards import BoardSpec, CLASSICAL, MoveParams, ravel_cells

CellTuple = tuple[int, ...]

# Ceiling on row-chunk size for the all-pairs site scan.
_SCAN_CHUNK = 256


def _scan_row_chunk(n_edges: int, k: int) -> int:
    """Rows per chunk so each (rows, n_edges, k) temporary stays ~16 MB."""
    return max(1, min(_SCAN_CHUNK, 4_000_000 // max(n_edges * k, 1)))


class Tour:
    """An ordered sequence of cells on a board, closed (cycle) or open (path).

    ``cells`` is an ``(N, k)`` int32 array of 1-based coordinates, frozen
    after construction.
    """

    __slots__ = ("board", "mp", "cells", "closed")

    def __init__(
        self,
        board: BoardSpec,
        cells: Iterable[Sequence[int]] | np.ndarray,
        closed: bool = True,
        mp: MoveParams = CLASSICAL,
    ):
        arr = np.array(cells, dtype=np.int32, copy=True)
        if arr.ndim != 2 or arr.shape[1] != board.k:
            raise ValueError(
                f"cells must be an (N, {board.k}) array for board {board}, "
                f"got shape {arr.shape}"
            )
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        self.board = board
        self.mp = mp
        self.cells = arr
        self.closed = bool(closed)

    def __len__(self) -> int:
        return int(self.cells.shape[0])

    @property
    def n_edges(self) -> int:
        n = len(self)
        return n if self.closed else max(n - 1, 0)

    def cell(self, i: int) -> CellTuple:
        return tuple(int(x) for x in self.cells[i])

    def cell_list(self) -> list[CellTuple]:
        return [tuple(int(x) for x in row) for row in self.cells]

    def __repr__(self) -> str:
        word = "closed" if self.closed else "open"
        return (
            f"Tour({self.board}, {word}, {len(self)} cells, "
            f"moves=({self.mp.alpha},{self.mp.beta}))"
        )


class ViolationKind(str, Enum):
    DuplicateCell = "DuplicateCell"
    OutOfBounds = "OutOfBounds"
    NonKnightStep = "NonKnightStep"
    NotClosed = "NotClosed"
    IncompleteCoverage = "IncompleteCoverage"


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    index: Optional[int] = None
    message: str = ""

    def __str__(self) -> str:
        at = f" at index {self.index}" if self.index is not None else ""
        msg = f": {self.message}" if self.message else ""
        return f"{self.kind.value}{at}{msg}"


def _step_ok(deltas: np.ndarray, mp: MoveParams) -> np.ndarray:
    """Row-wise test that each delta is an (alpha, beta) move."""
    a = np.abs(deltas)
    return (
        (a.sum(axis=1) == mp.alpha + mp.beta)
        & (a.max(axis=1) == mp.alpha)
        & ((a != 0).sum(axis=1) == 2)
    )


def verify(t: Tour) -> Optional[Violation]:
    """None when every tour invariant holds; otherwise the first Violation.

    Checks, in order: coordinates in bounds, cells pairwise distinct, every
    consecutive step a legal move, the wrap-around edge for closed tours, and
    full board coverage for closed tours.
    """
    cells = t.cells
    n = len(t)
    if n == 0:
        if t.closed:
            return Violation(ViolationKind.IncompleteCoverage, None, "empty tour")
        return None
    dims = np.array(t.board.dims, dtype=np.int32)
    inb = (cells >= 1) & (cells <= dims)
    if not inb.all():
        bad = int(np.flatnonzero(~inb.all(axis=1))[0])
        return Violation(
            ViolationKind.OutOfBounds, bad, f"cell {t.cell(bad)} outside {t.board}"
        )
    flat = ravel_cells(t.board, cells)
    if np.unique(flat).size != n:
        order = np.argsort(flat, kind="stable")
        srt = flat[order]
        dup_at = int(order[np.flatnonzero(srt[1:] == srt[:-1])[0] + 1])
        return Violation(
            ViolationKind.DuplicateCell, dup_at, f"cell {t.cell(dup_at)} repeated"
        )
    if n > 1:
        deltas = cells[1:].astype(np.int64) - cells[:-1]
        ok = _step_ok(deltas, t.mp)
        if not ok.all():
            bad = int(np.flatnonzero(~ok)[0])
            return Violation(
                ViolationKind.NonKnightStep,
                bad,
                f"{t.cell(bad)} -> {t.cell(bad + 1)} is not a legal move",
            )
    if t.closed:
        if n < 2 or not _step_ok(
            cells[:1].astype(np.int64) - cells[-1:], t.mp
        ).all():
            return Violation(
                ViolationKind.NotClosed, n - 1, "last cell is not a move from first"
            )
        if n != t.board.cell_count:
            return Violation(
                ViolationKind.IncompleteCoverage,
                None,
                f"{n} cells of {t.board.cell_count}",
            )
    return None


def flip_move(c: Sequence[int], mp: MoveParams = CLASSICAL) -> CellTuple:
    """Negate the beta-component of a move vector, keep the alpha-component."""
    vec = tuple(int(x) for x in c)
    a = [abs(x) for x in vec]
    if (
        len(vec) < 2
        or sum(x != 0 for x in a) != 2
        or sorted(x for x in a if x)[::-1] != [mp.alpha, mp.beta]
    ):
        raise ValueError(f"{vec} is not an ({mp.alpha},{mp.beta}) move vector")
    return tuple(-x if abs(x) == mp.beta else x for x in vec)


class SiteKind(str, Enum):
    WOPP = "WOPP"
    NWOPP = "NWOPP"
    WOCP = "WOCP"
    NWOCP = "NWOCP"
    AlphaSite = "AlphaSite"
    BetaSite = "BetaSite"


_KIND_ORDER = {k: i for i, k in enumerate(SiteKind)}


@dataclass(frozen=True)
class Site:
    """A detected pattern: two tour edges plus the displacement geometry.

    ``pos_n`` / ``pos_m`` are edge indices (edge i joins cell i to cell i+1,
    wrapping for closed tours); ``support`` holds the four endpoint cells
    (a^n, a^(n+1), a^m, a^(m+1)).
    """

    kind: SiteKind
    well_oriented: bool
    pos_n: int
    pos_m: int
    axis: int
    magnitude: int
    support: tuple[CellTuple, CellTuple, CellTuple, CellTuple]

    @property
    def orientation(self) -> str:
        return "well" if self.well_oriented else "non-well"

    def support_set(self) -> frozenset[CellTuple]:
        return frozenset(self.support)

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "well_oriented": self.well_oriented,
            "pos_n": self.pos_n,
            "pos_m": self.pos_m,
            "axis": self.axis,
            "magnitude": self.magnitude,
            "support": [list(c) for c in self.support],
        }

    def __str__(self) -> str:
        return (
            f"{self.kind.value}[{self.orientation}] edges ({self.pos_n},"
            f"{self.pos_m}) axis {self.axis} magnitude {self.magnitude}"
        )


def _classify_kind(
    mp: MoveParams, magnitude: int, well: bool, cross: bool
) -> SiteKind:
    if mp.as_tuple() == (2, 1) and magnitude == 2:
        if well:
            return SiteKind.WOCP if cross else SiteKind.WOPP
        return SiteKind.NWOCP if cross else SiteKind.NWOPP
    return SiteKind.AlphaSite if magnitude == mp.alpha else SiteKind.BetaSite


def _scan_sites(
    cells: np.ndarray,
    mp: MoveParams,
    closed: bool,
    row_lo: int = 0,
    row_hi: Optional[int] = None,
) -> list[Site]:
    """All sites with first-edge index in [row_lo, row_hi).

    Works on any cell sequence (open sequences get no wrap edge); only the
    displacement predicate is evaluated, callers are responsible for the
    sequence being a verified tour where that matters.
    """
    n_cells = cells.shape[0]
    n_edges = n_cells if closed else n_cells - 1
    if n_edges < 2:
        return []
    p0 = cells.astype(np.int32, copy=False)
    if closed:
        p1 = np.roll(p0, -1, axis=0)
    else:
        p0, p1 = p0[:-1], p0[1:]
    hi = n_edges if row_hi is None else min(row_hi, n_edges)
    step = _scan_row_chunk(n_edges, cells.shape[1])
    out: list[Site] = []
    for lo in range(row_lo, hi, step):
        stop = min(lo + step, hi)
        rn0 = p0[lo:stop, None, :]
        rn1 = p1[lo:stop, None, :]
        d1 = rn1 - p0[None, :, :]          # a^(n+1) - a^m
        d2 = p1[None, :, :] - rn0          # a^(m+1) - a^n
        g1 = rn0 - p0[None, :, :]          # a^n     - a^m
        g2 = p1[None, :, :] - rn1          # a^(m+1) - a^(n+1)
        for magnitude in (mp.alpha, mp.beta):
            for diff, other, well in ((d1, d2, True), (g1, g2, False)):
                a = np.abs(diff)
                axis_vec = (a.sum(axis=2) == magnitude) & (
                    a.max(axis=2) == magnitude
                )
                if not axis_vec.any():
                    continue
                cross = (diff == other).all(axis=2)
                par = (diff == -other).all(axis=2)
                hits = axis_vec & (cross | par)
                # keep strictly ordered pairs: global n < m
                ns, ms = np.nonzero(hits)
                keep = (ns + lo) < ms
                for ni, mi in zip(ns[keep], ms[keep]):
                    gn = int(ni + lo)
                    gm = int(mi)
                    axis = int(np.argmax(a[ni, mi]))
                    kind = _classify_kind(
                        mp, magnitude, well, bool(cross[ni, mi])
                    )
                    sup = (
                        tuple(int(x) for x in p0[gn]),
                        tuple(int(x) for x in p1[gn]),
                        tuple(int(x) for x in p0[gm]),
                        tuple(int(x) for x in p1[gm]),
                    )
                    out.append(
                        Site(
                            kind=kind,
                            well_oriented=well,
                            pos_n=gn,
                            pos_m=gm,
                            axis=axis,
                            magnitude=magnitude,
                            support=sup,
                        )
                    )
    out.sort(key=lambda s: (s.pos_n, s.pos_m, _KIND_ORDER[s.kind], s.axis))
    return out


def _require_closed_verified(t: Tour, op: str) -> None:
    if not t.closed:
        raise ValueError(f"{op} requires a closed tour")
    v = verify(t)
    if v is not None:
        raise ValueError(f"{op} requires a verified tour, got {v}")


def find_sites(t: Tour) -> list[Site]:
    """Every site of a verified closed tour, ordered by (pos_n, pos_m)."""
    _require_closed_verified(t, "find_sites")
    return _scan_sites(t.cells, t.mp, closed=True)


def disjoint_site_pair(sites: Sequence[Site]) -> Optional[tuple[Site, Site]]:
    """First pair of sites whose 4+4 endpoint cells are pairwise distinct."""
    supports = [s.support_set() for s in sites]
    for i in range(len(sites)):
        if len(supports[i]) != 4:
            continue
        for j in range(i + 1, len(sites)):
            if len(supports[j]) == 4 and supports[i].isdisjoint(supports[j]):
                return sites[i], sites[j]
    return None


def first_disjoint_pair(
    t: Tour, *, magnitude: Optional[int] = None
) -> Optional[tuple[Site, Site]]:
    """First support-disjoint site pair in scan order, or None.

    Scans edge-pair chunks incrementally and stops at the first disjoint
    pair, so large tours with plentiful sites answer quickly.  The optional
    magnitude filter restricts the pool to sites of one displacement size.
    """
    _require_closed_verified(t, "first_disjoint_pair")
    found: list[Site] = []
    n_edges = len(t)
    step = _scan_row_chunk(n_edges, t.cells.shape[1])
    for lo in range(0, n_edges, step):
        batch = _scan_sites(t.cells, t.mp, closed=True, row_lo=lo, row_hi=lo + step)
        if magnitude is not None:
            batch = [s for s in batch if s.magnitude == magnitude]
        found.extend(batch)
        pair = disjoint_site_pair(found)
        if pair is not None:
            return pair
    return None


def is_bisited(t: Tour) -> bool:
    """Whether the closed tour has two sites with disjoint support."""
    return first_disjoint_pair(t) is not None


def select_disjoint_sites(
    sites: Sequence[Site], magnitudes: Sequence[int]
) -> Optional[list[Site]]:
    """One site per requested magnitude, all supports pairwise disjoint.

    Deterministic: backtracks over sites in their given order, so the first
    feasible combination in lexicographic choice order wins.  Returns None
    when no disjoint combination exists.
    """
    pools = [
        [s for s in sites if s.magnitude == mag and len(s.support_set()) == 4]
        for mag in magnitudes
    ]
    chosen: list[Site] = []
    used: set[CellTuple] = set()

    def backtrack(i: int) -> bool:
        if i == len(pools):
            return True
        for s in pools[i]:
            sup = s.support_set()
            if used & sup:
                continue
            chosen.append(s)
            used.update(sup)
            if backtrack(i + 1):
                return True
            chosen.pop()
            used.difference_update(sup)
        return False

    return chosen if backtrack(0) else None


def canonical_form(t: Tour) -> Tour:
    """Rotate/reflect to a unique representative of the same cycle.

    Closed: lexicographically smallest cell first, direction chosen so the
    successor is smaller than the predecessor.  Open: endpoints compared,
    smaller endpoint first.
    """
    cells = t.cells
    n = len(t)
    if n == 0:
        return t
    if t.closed:
        start = int(np.lexsort(cells.T[::-1])[0])
        rolled = np.roll(cells, -start, axis=0)
        if n > 2 and tuple(rolled[-1]) < tuple(rolled[1]):
            rolled = np.roll(rolled[::-1], 1, axis=0)
        return Tour(t.board, rolled, closed=True, mp=t.mp)
    first, last = tuple(cells[0]), tuple(cells[-1])
    if last < first:
        cells = cells[::-1]
    return Tour(t.board, cells, closed=False, mp=t.mp)


def tour_key(t: Tour) -> bytes:
    """Stable dedupe key: the canonical form's raw cell bytes."""
    c = canonical_form(t)
    return c.cells.tobytes() + (b"C" if c.closed else b"O")
