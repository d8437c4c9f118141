"""Shared test helpers: edge sets, brute-force site oracle, tiny tours."""

from __future__ import annotations

import numpy as np
import pytest

from ndtour.boards import BoardSpec
from ndtour.tours import Site, Tour


def edge_set(t: Tour) -> set[frozenset]:
    """Undirected tour edges as frozensets of cell tuples."""
    cells = [tuple(int(x) for x in row) for row in t.cells]
    n = len(cells)
    last = n if t.closed else n - 1
    return {frozenset((cells[i], cells[(i + 1) % n])) for i in range(last)}


def brute_force_sites(t: Tour) -> set[tuple]:
    """Literal double-loop site oracle, straight from the defining equations.

    For every ordered pair of edge indices n < m of a closed tour it tests
    the four displacement equations (well-oriented: a^{n+1}-a^m equal to
    +/-(a^{m+1}-a^n) and lying on an axis with magnitude alpha or beta;
    non-well-oriented: the a^n-a^m form).  No pair is skipped up front --
    same and adjacent edges must fall out of the equations on their own.
    Returns (pos_n, pos_m, well_oriented, axis, magnitude) tuples.
    """
    assert t.closed
    cells = t.cells.astype(int)
    N = len(cells)
    found = set()
    for n in range(N):
        for m in range(n + 1, N):
            an, an1 = cells[n], cells[(n + 1) % N]
            am, am1 = cells[m], cells[(m + 1) % N]
            for mag in (t.mp.alpha, t.mp.beta):
                # well-oriented: d1 = a^{n+1} - a^m vs d2 = a^{m+1} - a^n
                d1 = an1 - am
                d2 = am1 - an
                axis = _axis_of(d1, mag)
                if axis is not None and (
                    np.array_equal(d1, d2) or np.array_equal(d1, -d2)
                ):
                    found.add((n, m, True, axis, mag))
                # non-well-oriented: g1 = a^n - a^m vs g2 = a^{m+1} - a^{n+1}
                g1 = an - am
                g2 = am1 - an1
                axis = _axis_of(g1, mag)
                if axis is not None and (
                    np.array_equal(g1, g2) or np.array_equal(g1, -g2)
                ):
                    found.add((n, m, False, axis, mag))
    return found


def _axis_of(d: np.ndarray, mag: int):
    """Axis index when d = +/- mag * e_i, else None."""
    nz = np.flatnonzero(d)
    if len(nz) == 1 and abs(int(d[nz[0]])) == mag:
        return int(nz[0])
    return None


def site_tuple(s: Site) -> tuple:
    return (s.pos_n, s.pos_m, s.well_oriented, s.axis, s.magnitude)


@pytest.fixture(scope="session")
def tour_6x6():
    from ndtour.solver import solve

    out = solve(BoardSpec((6, 6)))
    assert out.found
    return out.tour


@pytest.fixture(scope="session")
def tour_10x10_32():
    from ndtour.boards import MoveParams
    from ndtour.solver import solve

    out = solve(BoardSpec((10, 10)), MoveParams(3, 2))
    assert out.found
    return out.tour
