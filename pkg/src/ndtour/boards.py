"""Boards, generalized knight moves, the edge relation, coloring, connectivity.

A board is a box ``[1, n1] x ... x [1, nk]`` of lattice cells.  A generalized
knight move displaces the knight by ``alpha`` along one axis and by ``beta``
along a second, distinct axis (any signs); the classical knight is (2, 1).
All public coordinates are 1-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

CellTuple = tuple[int, ...]

# Frontier chunk for the vectorized BFS in is_connected (bounds peak memory).
_BFS_CHUNK = 8192


@dataclass(frozen=True)
class MoveParams:
    """The (alpha, beta) pair defining the move set.

    Stored normalized with ``alpha > beta``; the two lengths must differ and
    both must be positive.  The default is the classical knight (2, 1).
    """

    alpha: int = 2
    beta: int = 1

    def __post_init__(self) -> None:
        a, b = int(self.alpha), int(self.beta)
        if a < 1 or b < 1:
            raise ValueError(f"move lengths must be positive, got ({a}, {b})")
        if a == b:
            raise ValueError(f"move lengths must differ, got ({a}, {b})")
        if a < b:
            a, b = b, a
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    def as_tuple(self) -> tuple[int, int]:
        return (self.alpha, self.beta)


CLASSICAL = MoveParams(2, 1)


@dataclass(frozen=True)
class BoardSpec:
    """An n-dimensional rectangular board given by its side lengths."""

    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        if len(dims) == 0:
            raise ValueError("a board needs at least one dimension")
        if any(d < 1 for d in dims):
            raise ValueError(f"side lengths must be >= 1, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def k(self) -> int:
        """Number of axes."""
        return len(self.dims)

    @property
    def cell_count(self) -> int:
        return math.prod(self.dims)

    def contains(self, cell: Sequence[int]) -> bool:
        return len(cell) == self.k and all(
            1 <= c <= d for c, d in zip(cell, self.dims)
        )

    def validate_cell(self, cell: Sequence[int]) -> None:
        if len(cell) != self.k:
            raise ValueError(
                f"cell {tuple(cell)} has {len(cell)} coordinates, "
                f"board {self.dims} has {self.k} axes"
            )
        if not self.contains(cell):
            raise ValueError(f"cell {tuple(cell)} is outside board {self.dims}")

    def __str__(self) -> str:
        return "x".join(str(d) for d in self.dims)


def board(*dims: int) -> BoardSpec:
    """Shorthand: ``board(3, 4) == BoardSpec((3, 4))``."""
    return BoardSpec(tuple(dims))


@lru_cache(maxsize=None)
def _move_set_cached(k: int, alpha: int, beta: int) -> tuple[CellTuple, ...]:
    deltas = []
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            for sa in (alpha, -alpha):
                for sb in (beta, -beta):
                    d = [0] * k
                    d[i] = sa
                    d[j] = sb
                    deltas.append(tuple(d))
    # alpha != beta so no duplicates arise; sort for a deterministic order
    return tuple(sorted(deltas))


def move_set(k: int, mp: MoveParams = CLASSICAL) -> list[CellTuple]:
    """All displacement vectors with one ``+-alpha`` entry, one ``+-beta``
    entry on a different axis, and zeros elsewhere.

    There are ``4*k*(k-1)`` of them; returned in lexicographic order.
    """
    if k < 2:
        raise ValueError(f"moves need at least 2 dimensions, got k={k}")
    return list(_move_set_cached(k, mp.alpha, mp.beta))


@lru_cache(maxsize=None)
def _move_lookup(k: int, alpha: int, beta: int) -> frozenset[CellTuple]:
    return frozenset(_move_set_cached(k, alpha, beta))


def is_edge(
    b: BoardSpec, a: Sequence[int], c: Sequence[int], mp: MoveParams = CLASSICAL
) -> bool:
    """True iff cells ``a`` and ``c`` of board ``b`` differ by a legal move."""
    b.validate_cell(a)
    b.validate_cell(c)
    if b.k < 2:
        return False
    delta = tuple(x - y for x, y in zip(a, c))
    return delta in _move_lookup(b.k, mp.alpha, mp.beta)


def neighbors(
    b: BoardSpec, a: Sequence[int], mp: MoveParams = CLASSICAL
) -> list[CellTuple]:
    """In-bounds cells one move away from ``a``, ordered by move vector."""
    b.validate_cell(a)
    if b.k < 2:
        return []
    out = []
    for delta in _move_set_cached(b.k, mp.alpha, mp.beta):
        c = tuple(x + d for x, d in zip(a, delta))
        if all(1 <= ci <= di for ci, di in zip(c, b.dims)):
            out.append(c)
    return out


def color(a: Sequence[int]) -> int:
    """Cell sign ``(-1) ** (a1 * a2 * ... * ak)``.

    -1 exactly when every coordinate is odd.  Note this product form is not a
    proper 2-coloring of the move graph: (2,2) and (3,4) are a knight move
    apart yet both get +1.  The proper checkerboard coloring uses the
    coordinate *sum*; see :func:`sum_color`.
    """
    return -1 if all(c % 2 == 1 for c in a) else 1


def sum_color(a: Sequence[int]) -> int:
    """Checkerboard sign ``(-1) ** (a1 + ... + ak)``.

    For moves with alpha + beta odd (the classical knight included) every move
    flips this sign, so it is a proper 2-coloring of the move graph.
    """
    return -1 if sum(a) % 2 == 1 else 1


def cells_array(b: BoardSpec) -> np.ndarray:
    """All cells of ``b`` as an ``(N, k)`` int32 array in C order, 1-based."""
    grids = np.meshgrid(
        *[np.arange(1, d + 1, dtype=np.int32) for d in b.dims], indexing="ij"
    )
    return np.stack(grids, axis=-1).reshape(b.cell_count, b.k)


def ravel_cells(b: BoardSpec, cells: np.ndarray) -> np.ndarray:
    """Flat C-order indices of 1-based cells given as an ``(N, k)`` array."""
    zero_based = np.asarray(cells, dtype=np.int64) - 1
    return np.ravel_multi_index(tuple(zero_based.T), b.dims)


def unravel_cells(b: BoardSpec, flat: np.ndarray) -> np.ndarray:
    """Inverse of :func:`ravel_cells`; returns 1-based ``(N, k)`` int32."""
    coords = np.unravel_index(np.asarray(flat, dtype=np.int64), b.dims)
    return (np.column_stack(coords) + 1).astype(np.int32)


def is_connected(b: BoardSpec, mp: MoveParams = CLASSICAL) -> bool:
    """Whether the move graph on all cells of ``b`` is a single component."""
    return reachable_count(b, mp) == b.cell_count


def reachable_count(b: BoardSpec, mp: MoveParams = CLASSICAL) -> int:
    """Number of cells reachable from the all-ones corner.

    Breadth-first traversal, vectorized over frontier chunks so
    multi-million-cell boards stay cheap.
    """
    n = b.cell_count
    if n == 1:
        return 1
    if b.k < 2:
        return 1  # no legal move exists on a 1-axis board
    moves = np.array(_move_set_cached(b.k, mp.alpha, mp.beta), dtype=np.int64)
    dims = np.array(b.dims, dtype=np.int64)
    visited = np.zeros(n, dtype=bool)
    visited[0] = True
    frontier = np.array([0], dtype=np.int64)
    seen = 1
    while frontier.size:
        nxt_parts = []
        for lo in range(0, frontier.size, _BFS_CHUNK):
            chunk = frontier[lo : lo + _BFS_CHUNK]
            coords = np.column_stack(np.unravel_index(chunk, b.dims))
            cand = (coords[:, None, :] + moves[None, :, :]).reshape(-1, b.k)
            ok = ((cand >= 0) & (cand < dims)).all(axis=1)
            if not ok.any():
                continue
            flat = np.ravel_multi_index(tuple(cand[ok].T), b.dims)
            flat = np.unique(flat[~visited[flat]])
            visited[flat] = True
            seen += flat.size
            nxt_parts.append(flat)
        frontier = (
            np.concatenate(nxt_parts) if nxt_parts else np.empty(0, dtype=np.int64)
        )
    return seen


def canonicalize(b: BoardSpec) -> tuple[BoardSpec, tuple[int, ...]]:
    """Sort the axes ascending; return the sorted board and the permutation.

    The permutation ``perm`` maps sorted axes back to original ones:
    ``perm[i]`` is the original index of sorted axis ``i``, so a cell ``c`` of
    the sorted board corresponds to the original-board cell ``orig`` with
    ``orig[perm[i]] = c[i]``.
    """
    order = tuple(sorted(range(b.k), key=lambda i: (b.dims[i], i)))
    sorted_dims = tuple(b.dims[i] for i in order)
    return BoardSpec(sorted_dims), order


def apply_axis_permutation(cells: np.ndarray, perm: Sequence[int]) -> np.ndarray:
    """Scatter columns: output column ``perm[i]`` is input column ``i``.

    Applied to a tour on the sorted board this yields the tour on the original
    board (see :func:`canonicalize`).
    """
    cells = np.asarray(cells)
    out = np.empty_like(cells)
    for i, p in enumerate(perm):
        out[:, p] = cells[:, i]
    return out


def invert_permutation(perm: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(perm)
    for i, p in enumerate(perm):
        inv[p] = i
    return tuple(inv)
