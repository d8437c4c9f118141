"""Exhaustive/heuristic tour search over packed adjacency.

The depth-first kernel exists twice — a compiled extension and a pure-Python
twin — selected at import time (``NDTOUR_PURE=1`` forces the fallback).  Both
implement the identical algorithm, so any search with the same budget and
seed visits the same nodes in the same order.
"""

from ..feasibility import Certificate, CertificateKind, prune_checks
from .core import (
    SearchBudget,
    SearchConstraints,
    SolveOutcome,
    SolveStatus,
    active_engine,
    build_csr,
    get_engine,
    solve,
)

__all__ = [
    "Certificate",
    "CertificateKind",
    "SearchBudget",
    "SearchConstraints",
    "SolveOutcome",
    "SolveStatus",
    "active_engine",
    "build_csr",
    "get_engine",
    "prune_checks",
    "solve",
]
