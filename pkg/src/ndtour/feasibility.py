"""Shape-based tourability decisions plus search-free infeasibility certificates.

The closed-form classifications:

* 2-D (1 <= m <= n): no closed tour iff m and n are both odd, or m is 1, 2 or
  4, or m = 3 with n in {4, 6, 8}.
* 3-D (2 <= m <= n <= p): no closed tour iff all sides are odd, or m = n = 2,
  or (m, n, p) = (2, 3, 3).
* k >= 4 (sorted dims, all >= 2): no closed tour iff all dims are odd, or the
  second-largest dim is 2, or the largest dim is 3.

Unit axes never participate in a move, so they are dropped before dispatch;
boards that reduce to fewer than two axes are declared not tourable (a closed
tour needs at least two distinct cells).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .boards import (
    BoardSpec,
    CLASSICAL,
    MoveParams,
    cells_array,
    move_set,
    reachable_count,
)


class Reason(str, Enum):
    AllOdd = "AllOdd"
    ThinRows2D = "ThinRows2D"
    Small3xN = "Small3xN"
    MeqNeq2_3D = "MeqNeq2_3D"
    M2N3P3_3D = "M2N3P3_3D"
    SecondLargestIs2 = "SecondLargestIs2"
    LargestIs3 = "LargestIs3"
    OK = "OK"


class Theorem(str, Enum):
    Schwenk2D = "Schwenk2D"
    DeMaioMathew3D = "DeMaioMathew3D"
    MainND = "MainND"


@dataclass(frozen=True)
class Verdict:
    """Tourability decision with a machine-readable reason."""

    tourable: bool
    reason: Reason
    theorem: Theorem

    def __post_init__(self) -> None:
        if self.tourable != (self.reason is Reason.OK):
            raise ValueError("tourable must hold exactly when reason is OK")

    def __str__(self) -> str:
        word = "tourable" if self.tourable else "not tourable"
        return f"{word} ({self.reason.value}, by {self.theorem.value})"


def _verdict_2d(reason: Reason) -> Verdict:
    return Verdict(reason is Reason.OK, reason, Theorem.Schwenk2D)


def classify_2d(m: int, n: int) -> Verdict:
    """Closed-tour decision for an m x n board (sides swapped so m <= n)."""
    if m < 1 or n < 1:
        raise ValueError(f"invalid board sides ({m}, {n})")
    if m > n:
        m, n = n, m
    if m % 2 == 1 and n % 2 == 1:
        return _verdict_2d(Reason.AllOdd)
    if m in (1, 2, 4):
        return _verdict_2d(Reason.ThinRows2D)
    if m == 3 and n in (4, 6, 8):
        return _verdict_2d(Reason.Small3xN)
    return _verdict_2d(Reason.OK)


def classify_3d(m: int, n: int, p: int) -> Verdict:
    """Closed-tour decision for an m x n x p board (sides sorted first).

    A side of 1 drops that axis and delegates to the 2-D rule.
    """
    if m < 1 or n < 1 or p < 1:
        raise ValueError(f"invalid board sides ({m}, {n}, {p})")
    m, n, p = sorted((m, n, p))
    if m == 1:
        return classify_2d(n, p)
    if m % 2 == 1 and n % 2 == 1 and p % 2 == 1:
        return Verdict(False, Reason.AllOdd, Theorem.DeMaioMathew3D)
    if m == 2 and n == 2:
        return Verdict(False, Reason.MeqNeq2_3D, Theorem.DeMaioMathew3D)
    if (m, n, p) == (2, 3, 3):
        return Verdict(False, Reason.M2N3P3_3D, Theorem.DeMaioMathew3D)
    return Verdict(True, Reason.OK, Theorem.DeMaioMathew3D)


def classify_nd(b: BoardSpec | Sequence[int]) -> Verdict:
    """Closed-tour decision for any board; unit axes are dropped first."""
    dims = b.dims if isinstance(b, BoardSpec) else BoardSpec(tuple(b)).dims
    reduced = sorted(d for d in dims if d > 1)
    k = len(reduced)
    if k <= 1:
        # Degenerate: a point or a line holds no closed tour.
        return Verdict(False, Reason.ThinRows2D, Theorem.Schwenk2D)
    if k == 2:
        return classify_2d(*reduced)
    if k == 3:
        return classify_3d(*reduced)
    if all(d % 2 == 1 for d in reduced):
        return Verdict(False, Reason.AllOdd, Theorem.MainND)
    if reduced[-2] == 2:
        return Verdict(False, Reason.SecondLargestIs2, Theorem.MainND)
    if reduced[-1] == 3:
        return Verdict(False, Reason.LargestIs3, Theorem.MainND)
    return Verdict(True, Reason.OK, Theorem.MainND)


def knuth_connectivity_2d(m: int, n: int, mp: MoveParams = CLASSICAL) -> bool:
    """Closed-form 2-D connectivity for (alpha, beta) moves.

    The move graph on an m x n board is connected iff
    gcd(alpha+beta, alpha-beta) = 1, the larger side is >= 2*alpha, and the
    smaller side is >= alpha + beta.
    """
    if m < 1 or n < 1:
        raise ValueError(f"invalid board sides ({m}, {n})")
    if m == 1 and n == 1:
        return True  # a single cell is trivially connected
    big, small = max(m, n), min(m, n)
    a, b = mp.alpha, mp.beta
    return (
        math.gcd(a + b, a - b) == 1 and big >= 2 * a and small >= a + b
    )


def coprime_necessity(mp: MoveParams) -> bool:
    """gcd(alpha, beta) = 1 — necessary for any tour to exist.

    Every move changes each coordinate by a multiple of gcd(alpha, beta), so a
    non-coprime pair traps the knight on a sublattice.
    """
    return math.gcd(mp.alpha, mp.beta) == 1


# ---------------------------------------------------------------------------
# Infeasibility certificates (search-free ProvedNone justifications)
# ---------------------------------------------------------------------------

class CertificateKind(str, Enum):
    OddCellCount = "OddCellCount"
    Disconnected = "Disconnected"
    DegreeZeroCell = "DegreeZeroCell"
    DegreeOneForcing = "DegreeOneForcing"


@dataclass(frozen=True)
class Certificate:
    """A machine-checkable reason why no closed tour can exist."""

    kind: CertificateKind
    detail: tuple[tuple[str, object], ...]

    @classmethod
    def make(cls, kind: CertificateKind, **detail: object) -> "Certificate":
        return cls(kind, tuple(sorted(detail.items())))

    def as_dict(self) -> dict:
        return {"kind": self.kind.value, **dict(self.detail)}

    def __str__(self) -> str:
        items = ", ".join(f"{k}={v}" for k, v in self.detail)
        return f"{self.kind.value}({items})"


def _sum_color_class_sizes(dims: Sequence[int]) -> tuple[int, int]:
    """Sizes of the even/odd coordinate-sum classes, in closed form.

    The classes are balanced unless every side is odd, in which case they
    differ by exactly one.
    """
    total = math.prod(dims)
    diff = math.prod(-(d % 2) for d in dims)  # (#even-sum) - (#odd-sum)
    return (total + diff) // 2, (total - diff) // 2


def degree_table(b: BoardSpec, mp: MoveParams = CLASSICAL) -> np.ndarray:
    """Vertex degrees for every cell, as a flat C-order int32 array."""
    n = b.cell_count
    if b.k < 2:
        return np.zeros(n, dtype=np.int32)
    coords = cells_array(b)
    dims = np.array(b.dims, dtype=np.int32)
    deg = np.zeros(n, dtype=np.int32)
    for delta in move_set(b.k, mp):
        shifted = coords + np.array(delta, dtype=np.int32)
        deg += ((shifted >= 1) & (shifted <= dims)).all(axis=1)
    return deg


# Beyond this many cells the degree/connectivity scans are skipped; parity
# certificates are still produced (they are O(k)).
PRUNE_SCAN_CAP = 2_000_000


def prune_checks(
    b: BoardSpec, mp: MoveParams = CLASSICAL, scan_cap: int = PRUNE_SCAN_CAP
) -> list[Certificate]:
    """Certificates proving no closed tour exists, without any search.

    Checks, in order: bipartite class imbalance (only valid when alpha + beta
    is odd), degree-0 cells, degree-1 cells (a closed tour needs two tour
    edges at every cell), and connectivity.
    """
    certs: list[Certificate] = []
    even_cells, odd_cells = _sum_color_class_sizes(b.dims)
    if (mp.alpha + mp.beta) % 2 == 1 and even_cells != odd_cells:
        certs.append(
            Certificate.make(
                CertificateKind.OddCellCount,
                plus_cells=even_cells,
                minus_cells=odd_cells,
            )
        )
    if b.cell_count > scan_cap:
        return certs

    if b.k >= 2:
        deg = degree_table(b, mp)
        coords = cells_array(b)
        zero = np.flatnonzero(deg == 0)
        if zero.size:
            certs.append(
                Certificate.make(
                    CertificateKind.DegreeZeroCell,
                    cell=tuple(int(x) for x in coords[zero[0]]),
                    count=int(zero.size),
                )
            )
        ones = np.flatnonzero(deg == 1)
        if ones.size:
            certs.append(
                Certificate.make(
                    CertificateKind.DegreeOneForcing,
                    cell=tuple(int(x) for x in coords[ones[0]]),
                    count=int(ones.size),
                )
            )
    reach = reachable_count(b, mp)
    if reach != b.cell_count:
        certs.append(
            Certificate.make(
                CertificateKind.Disconnected,
                reachable_from_corner=reach,
                cell_count=b.cell_count,
            )
        )
    return certs
