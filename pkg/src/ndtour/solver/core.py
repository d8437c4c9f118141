"""Search orchestration: adjacency packing, constraints, budgets, restarts.

The oracle proves nonexistence only by certificate or by genuinely exhausting
the search space; budget cutoffs surface as ``Exhausted``.  Boards at most
``exhaustive_cap`` cells run one full depth-first search; larger boards run a
restart schedule (growing per-attempt node caps, per-attempt tie-break seeds)
that keeps the heuristic honest: it can still return ProvedNone if an attempt
terminates with the space exhausted rather than cut.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from ..boards import (
    BoardSpec,
    CLASSICAL,
    MoveParams,
    cells_array,
    move_set,
    ravel_cells,
    unravel_cells,
)
from ..feasibility import Certificate, CertificateKind, prune_checks
from ..tours import Tour, verify

from . import engine_py

try:  # compiled twin; synthesized from the same algorithm
    from . import _speedups  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - environment without a C toolchain
    _speedups = None

EdgeSpec = tuple[tuple[int, ...], tuple[int, ...]]

DEFAULT_EXHAUSTIVE_CAP = 40
DEFAULT_HEURISTIC_NODES = 30_000_000
RESTART_BASE_NODES = 50_000
ADJACENCY_CELL_CAP = 5_000_000


def active_engine() -> str:
    """Which kernel is in use: 'cython' unless unavailable or NDTOUR_PURE set."""
    if os.environ.get("NDTOUR_PURE"):
        return "python"
    return "cython" if _speedups is not None else "python"


def get_engine(name: Optional[str] = None):
    name = name or active_engine()
    if name == "python":
        return engine_py
    if name == "cython":
        if _speedups is None:
            raise RuntimeError("compiled engine not available in this install")
        return _speedups
    raise ValueError(f"unknown engine {name!r}")


def _normalize_edges(edges) -> tuple[EdgeSpec, ...]:
    out = []
    for e in edges:
        a, b = e
        out.append((tuple(int(x) for x in a), tuple(int(x) for x in b)))
    return tuple(out)


@dataclass(frozen=True)
class SearchConstraints:
    """Required/forbidden edges plus endpoint pinning for the search."""

    required_edges: tuple[EdgeSpec, ...] = ()
    forbidden_edges: tuple[EdgeSpec, ...] = ()
    start: Optional[tuple[int, ...]] = None
    end: Optional[tuple[int, ...]] = None
    closed: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "required_edges", _normalize_edges(self.required_edges)
        )
        object.__setattr__(
            self, "forbidden_edges", _normalize_edges(self.forbidden_edges)
        )
        for name in ("start", "end"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, tuple(int(x) for x in v))
        if self.closed and self.end is not None:
            raise ValueError("end constraint only applies to open searches")
        if (
            not self.closed
            and self.start is not None
            and self.start == self.end
        ):
            raise ValueError("open search needs distinct start and end")
        req = {frozenset(e) for e in self.required_edges}
        forb = {frozenset(e) for e in self.forbidden_edges}
        clash = req & forb
        if clash:
            raise ValueError(f"edges both required and forbidden: {sorted(clash)!r}")


@dataclass(frozen=True)
class SearchBudget:
    """Node/time limits plus the tie-break seed."""

    node_limit: Optional[int] = None
    time_limit: Optional[float] = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.node_limit is not None and self.node_limit <= 0:
            raise ValueError("node_limit must be positive")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")


class SolveStatus(str, Enum):
    Found = "Found"
    ProvedNone = "ProvedNone"
    Exhausted = "Exhausted"


@dataclass
class SolveOutcome:
    status: SolveStatus
    tour: Optional[Tour] = None
    certificates: list[Certificate] = field(default_factory=list)
    nodes: int = 0
    attempts: int = 0
    elapsed: float = 0.0
    note: str = ""

    @property
    def found(self) -> bool:
        return self.status is SolveStatus.Found

    def __str__(self) -> str:
        bits = [self.status.value]
        if self.note:
            bits.append(self.note)
        if self.certificates:
            bits.append("; ".join(str(c) for c in self.certificates))
        return " — ".join(bits)


def build_csr(
    b: BoardSpec,
    mp: MoveParams = CLASSICAL,
    forbidden_ids: Sequence[tuple[int, int]] = (),
) -> tuple[np.ndarray, np.ndarray]:
    """Packed adjacency (indptr, indices) over flat cell ids, ids ascending."""
    n = b.cell_count
    if n > ADJACENCY_CELL_CAP:
        raise ValueError(
            f"board {b} has {n} cells; adjacency capped at {ADJACENCY_CELL_CAP}"
        )
    if b.k < 2:
        return np.zeros(n + 1, dtype=np.int64), np.empty(0, dtype=np.int32)
    coords = cells_array(b)
    dims = np.array(b.dims, dtype=np.int32)
    srcs, dsts = [], []
    for delta in move_set(b.k, mp):
        shifted = coords + np.array(delta, dtype=np.int32)
        ok = ((shifted >= 1) & (shifted <= dims)).all(axis=1)
        if not ok.any():
            continue
        srcs.append(np.flatnonzero(ok))
        dsts.append(ravel_cells(b, shifted[ok]))
    if srcs:
        src = np.concatenate(srcs)
        dst = np.concatenate(dsts)
    else:
        src = np.empty(0, dtype=np.int64)
        dst = np.empty(0, dtype=np.int64)
    if forbidden_ids:
        bad = set()
        for u, v in forbidden_ids:
            bad.add(u * n + v)
            bad.add(v * n + u)
        keys = src * n + dst
        keep = ~np.isin(keys, np.fromiter(bad, dtype=np.int64))
        src, dst = src[keep], dst[keep]
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    indptr = np.cumsum(indptr)
    return indptr, dst.astype(np.int32)


def _cell_id(b: BoardSpec, cell: tuple[int, ...]) -> int:
    b.validate_cell(cell)
    return int(ravel_cells(b, np.array([cell], dtype=np.int64))[0])


@dataclass
class _Prepared:
    board: BoardSpec
    mp: MoveParams
    constraints: SearchConstraints
    indptr: np.ndarray
    indices: np.ndarray
    req_ptr: np.ndarray
    req_dat: np.ndarray
    req_a: np.ndarray
    req_b: np.ndarray
    start_id: int  # -1 when free
    end_id: int  # -1 when free
    infeasible_note: str = ""


def _prepare(b: BoardSpec, mp: MoveParams, c: SearchConstraints) -> _Prepared:
    n = b.cell_count
    forb_ids = [
        (_cell_id(b, u), _cell_id(b, v)) for u, v in c.forbidden_edges
    ]
    indptr, indices = build_csr(b, mp, forb_ids)

    def is_graph_edge(ui: int, vi: int) -> bool:
        row = indices[indptr[ui] : indptr[ui + 1]]
        return bool(np.isin(vi, row))

    req_pairs = []
    for u, v in c.required_edges:
        ui, vi = _cell_id(b, u), _cell_id(b, v)
        if ui == vi:
            raise ValueError(f"required edge {u}-{v} is a self-loop")
        if not is_graph_edge(ui, vi):
            raise ValueError(f"required edge {u}-{v} is not a move of the board")
        req_pairs.append((ui, vi))
    req_pairs = sorted(set(tuple(sorted(p)) for p in req_pairs))

    note = ""
    per_node: dict[int, list[int]] = {}
    for ui, vi in req_pairs:
        per_node.setdefault(ui, []).append(vi)
        per_node.setdefault(vi, []).append(ui)
    endpoint_ids = set()
    if not c.closed:
        if c.start is not None:
            endpoint_ids.add(_cell_id(b, c.start))
        if c.end is not None:
            endpoint_ids.add(_cell_id(b, c.end))
    for node, partners in per_node.items():
        # Interior cells hold two tour edges; pinned open endpoints hold one.
        limit = 1 if node in endpoint_ids else 2
        if len(partners) > limit:
            note = (
                f"cell id {node} carries {len(partners)} required edges; "
                f"at most {limit} can be tour edges there"
            )
    req_ptr = np.zeros(n + 1, dtype=np.int64)
    dat: list[int] = []
    for i in range(n):
        ps = sorted(per_node.get(i, ()))
        dat.extend(ps)
        req_ptr[i + 1] = len(dat)
    start_id = _cell_id(b, c.start) if c.start is not None else -1
    end_id = _cell_id(b, c.end) if c.end is not None else -1
    return _Prepared(
        board=b,
        mp=mp,
        constraints=c,
        indptr=indptr,
        indices=indices,
        req_ptr=req_ptr,
        req_dat=np.array(dat, dtype=np.int32),
        req_a=np.array([p[0] for p in req_pairs], dtype=np.int32),
        req_b=np.array([p[1] for p in req_pairs], dtype=np.int32),
        start_id=start_id,
        end_id=end_id,
        infeasible_note=note,
    )


def _prio_for(n: int, seed: int, attempt: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence((seed, attempt)))
    return rng.permutation(n).astype(np.int64)


def _jitter_for(n: int, seed: int, attempt: int) -> np.ndarray:
    """Warnsdorff perturbation: zero on the first attempt (pure heuristic),
    then a sparse {0,1,2} vector so each restart reorders some moves."""
    if attempt == 0:
        return np.zeros(n, dtype=np.int64)
    rng = np.random.default_rng(np.random.SeedSequence((seed, attempt, 7)))
    u = rng.random(n)
    return ((u > 0.85).astype(np.int64) + (u > 0.95)).astype(np.int64)


def _degrees_from_csr(indptr: np.ndarray) -> np.ndarray:
    return np.diff(indptr)


def _default_start(prep: _Prepared) -> int:
    if prep.start_id >= 0:
        return prep.start_id
    deg = _degrees_from_csr(prep.indptr)
    return int(np.argmin(deg))  # ties: lowest id (argmin is first occurrence)


def _run_tree(
    prep: _Prepared,
    prefix: Sequence[int],
    *,
    engine,
    seed: int,
    attempt: int,
    use_ordering: bool,
    node_limit: Optional[int],
    time_limit: Optional[float],
    conn_interval: int,
) -> tuple[int, Optional[np.ndarray], int]:
    n = prep.board.cell_count
    path_out = np.zeros(n, dtype=np.int32)
    status, nodes = engine.run_dfs(
        prep.indptr,
        prep.indices.astype(np.int32),
        n,
        np.array(prefix, dtype=np.int32),
        prep.end_id,
        bool(prep.constraints.closed),
        prep.req_ptr,
        prep.req_dat,
        prep.req_a,
        prep.req_b,
        _prio_for(n, seed, attempt),
        _jitter_for(n, seed, attempt),
        bool(use_ordering),
        int(node_limit or 0),
        float(time_limit or 0.0),
        int(conn_interval or 0),
        path_out,
    )
    if status == engine_py.FOUND:
        return status, path_out, nodes
    return status, None, nodes


def _tour_from_path(prep: _Prepared, path: np.ndarray) -> Tour:
    cells = unravel_cells(prep.board, path.astype(np.int64))
    t = Tour(prep.board, cells, closed=prep.constraints.closed, mp=prep.mp)
    v = verify(t)
    if v is not None and not (
        not prep.constraints.closed and v.kind.value == "IncompleteCoverage"
    ):
        raise AssertionError(f"engine returned an invalid tour: {v}")
    return t


def _start_list(prep: _Prepared) -> list[int]:
    """Root cells to try: the pinned start, or every cell (open, unpinned)."""
    if prep.start_id >= 0:
        return [prep.start_id]
    if prep.constraints.closed:
        return [_default_start(prep)]
    return [i for i in range(prep.board.cell_count) if i != prep.end_id]


def _applicable_certificates(
    b: BoardSpec, mp: MoveParams, closed: bool
) -> list[Certificate]:
    if b.cell_count == 1 and not closed:
        return []
    certs = prune_checks(b, mp)
    if closed:
        return certs
    open_valid = (CertificateKind.Disconnected, CertificateKind.DegreeZeroCell)
    return [c for c in certs if c.kind in open_valid]


def solve(
    b: BoardSpec,
    mp: MoveParams = CLASSICAL,
    constraints: Optional[SearchConstraints] = None,
    budget: Optional[SearchBudget] = None,
    *,
    workers: int = 1,
    exhaustive_cap: int = DEFAULT_EXHAUSTIVE_CAP,
    heuristic_ordering: bool = True,
    connectivity_interval: Optional[int] = None,
    use_certificates: bool = True,
    engine: Optional[str] = None,
) -> SolveOutcome:
    """Search for a tour under ``constraints`` within ``budget``.

    Found tours are verified before being returned.  ProvedNone carries
    either certificates or a completed exhaustive search; a budget cutoff is
    reported as Exhausted, never as a negative answer.
    """
    t0 = time.monotonic()
    c = constraints or SearchConstraints()
    bud = budget or SearchBudget()
    eng = get_engine(engine)

    if use_certificates:
        certs = _applicable_certificates(b, mp, c.closed)
        if certs:
            return SolveOutcome(
                SolveStatus.ProvedNone,
                certificates=certs,
                elapsed=time.monotonic() - t0,
            )
    prep = _prepare(b, mp, c)
    if prep.infeasible_note:
        return SolveOutcome(
            SolveStatus.ProvedNone,
            note=prep.infeasible_note,
            elapsed=time.monotonic() - t0,
        )
    n = b.cell_count
    exhaustive = n <= exhaustive_cap
    conn = (
        connectivity_interval
        if connectivity_interval is not None
        else (6 if exhaustive else 0)
    )
    deadline_left = bud.time_limit

    def time_left() -> Optional[float]:
        if deadline_left is None:
            return None
        return max(deadline_left - (time.monotonic() - t0), 0.001)

    total_nodes = 0
    attempts = 0

    if exhaustive:
        node_cap = bud.node_limit
        starts = _start_list(prep)
        any_cut = False
        for s in starts:
            attempts += 1
            remaining = None if node_cap is None else node_cap - total_nodes
            if remaining is not None and remaining <= 0:
                any_cut = True
                break
            if workers > 1:
                status, path, nodes = _run_parallel(
                    prep, s, bud.seed, attempts, heuristic_ordering,
                    remaining, time_left(), conn, workers,
                )
            else:
                status, path, nodes = _run_tree(
                    prep, [s], engine=eng, seed=bud.seed, attempt=0,
                    use_ordering=heuristic_ordering, node_limit=remaining,
                    time_limit=time_left(), conn_interval=conn,
                )
            total_nodes += nodes
            if status == engine_py.FOUND:
                return SolveOutcome(
                    SolveStatus.Found,
                    tour=_tour_from_path(prep, path),
                    nodes=total_nodes,
                    attempts=attempts,
                    elapsed=time.monotonic() - t0,
                )
            if status == engine_py.CUT:
                any_cut = True
                break
        if any_cut:
            return SolveOutcome(
                SolveStatus.Exhausted,
                nodes=total_nodes,
                attempts=attempts,
                elapsed=time.monotonic() - t0,
                note="budget exhausted before the space was",
            )
        return SolveOutcome(
            SolveStatus.ProvedNone,
            nodes=total_nodes,
            attempts=attempts,
            elapsed=time.monotonic() - t0,
            note="search space exhausted",
        )

    # Heuristic mode: many cheap randomized restarts, periodically one deep
    # dive.  Fresh jitter each attempt makes the restarts genuinely distinct.
    global_cap = bud.node_limit or DEFAULT_HEURISTIC_NODES
    base_cap = max(RESTART_BASE_NODES // 10, 60 * n)
    starts = _start_list(prep)
    attempt = 0
    while total_nodes < global_cap:
        per_attempt = min(
            base_cap * (32 if attempt % 8 == 7 else 1), global_cap - total_nodes
        )
        made_progress = False
        for s in starts:
            if total_nodes >= global_cap:
                break
            cap_now = min(per_attempt, global_cap - total_nodes)
            attempts += 1
            if workers > 1:
                status, path, nodes = _run_parallel(
                    prep, s, bud.seed, attempt, heuristic_ordering,
                    cap_now, time_left(), conn, workers,
                )
            else:
                status, path, nodes = _run_tree(
                    prep, [s], engine=eng, seed=bud.seed, attempt=attempt,
                    use_ordering=heuristic_ordering, node_limit=cap_now,
                    time_limit=time_left(), conn_interval=conn,
                )
            total_nodes += nodes
            made_progress = True
            if status == engine_py.FOUND:
                return SolveOutcome(
                    SolveStatus.Found,
                    tour=_tour_from_path(prep, path),
                    nodes=total_nodes,
                    attempts=attempts,
                    elapsed=time.monotonic() - t0,
                )
            if status == engine_py.EXHAUSTED and len(starts) == 1:
                return SolveOutcome(
                    SolveStatus.ProvedNone,
                    nodes=total_nodes,
                    attempts=attempts,
                    elapsed=time.monotonic() - t0,
                    note="search space exhausted",
                )
            if deadline_left is not None and time.monotonic() - t0 >= deadline_left:
                total_nodes = global_cap  # force loop exit
                break
        attempt += 1
        if not made_progress:
            break
    return SolveOutcome(
        SolveStatus.Exhausted,
        nodes=total_nodes,
        attempts=attempts,
        elapsed=time.monotonic() - t0,
        note="budget exhausted before the space was",
    )


# ---------------------------------------------------------------------------
# Parallel mode: independent subtree exploration from the first-branch frontier
# ---------------------------------------------------------------------------

def _subtree_task(payload: dict) -> tuple[int, Optional[list[int]], int]:
    b = BoardSpec(tuple(payload["dims"]))
    mp = MoveParams(*payload["mp"])
    c = SearchConstraints(
        required_edges=payload["required"],
        forbidden_edges=payload["forbidden"],
        start=payload["start"],
        end=payload["end"],
        closed=payload["closed"],
    )
    prep = _prepare(b, mp, c)
    status, path, nodes = _run_tree(
        prep,
        payload["prefix"],
        engine=get_engine(payload["engine"]),
        seed=payload["seed"],
        attempt=payload["attempt"],
        use_ordering=payload["ordering"],
        node_limit=payload["node_limit"],
        time_limit=payload["time_limit"],
        conn_interval=payload["conn"],
    )
    return status, (path.tolist() if path is not None else None), nodes


def _root_candidates(prep: _Prepared, start: int, seed: int, attempt: int,
                     use_ordering: bool) -> list[int]:
    row = prep.indices[prep.indptr[start] : prep.indptr[start + 1]].tolist()
    req = prep.req_dat[prep.req_ptr[start] : prep.req_ptr[start + 1]].tolist()
    slots = 2 if prep.constraints.closed else 1
    if req and len(req) == slots:
        row = [w for w in row if w in req]
    if not prep.constraints.closed and prep.end_id >= 0:
        row = [w for w in row if w != prep.end_id]
    if use_ordering:
        deg = _degrees_from_csr(prep.indptr)
        pr = _prio_for(prep.board.cell_count, seed, attempt)
        row.sort(key=lambda w: (int(deg[w]), int(pr[w])))
    else:
        row.sort()
    return row


def _run_parallel(
    prep: _Prepared,
    start: int,
    seed: int,
    attempt: int,
    use_ordering: bool,
    node_limit: Optional[int],
    time_limit: Optional[float],
    conn: int,
    workers: int,
) -> tuple[int, Optional[np.ndarray], int]:
    roots = _root_candidates(prep, start, seed, attempt, use_ordering)
    if not roots:
        return engine_py.EXHAUSTED, None, 0
    c = prep.constraints
    per_task_nodes = None if node_limit is None else max(node_limit // len(roots), 1)
    payloads = [
        {
            "dims": prep.board.dims,
            "mp": prep.mp.as_tuple(),
            "required": c.required_edges,
            "forbidden": c.forbidden_edges,
            "start": c.start,
            "end": c.end,
            "closed": c.closed,
            "prefix": [start, v],
            "engine": active_engine(),
            "seed": seed,
            "attempt": attempt,
            "ordering": use_ordering,
            "node_limit": per_task_nodes,
            "time_limit": time_limit,
            "conn": conn,
        }
        for v in roots
    ]
    total = 0
    any_cut = False
    found: Optional[np.ndarray] = None
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(_subtree_task, p) for p in payloads}
        try:
            while futures:
                done, futures = wait(futures, return_when=FIRST_COMPLETED)
                for fut in done:
                    status, path, nodes = fut.result()
                    total += nodes
                    if status == engine_py.FOUND and found is None:
                        found = np.array(path, dtype=np.int32)
                    elif status == engine_py.CUT:
                        any_cut = True
                if found is not None:
                    for fut in futures:
                        fut.cancel()
                    break
        finally:
            pool.shutdown(wait=False, cancel_futures=True)
    if found is not None:
        return engine_py.FOUND, found, total
    if any_cut:
        return engine_py.CUT, None, total
    return engine_py.EXHAUSTED, None, total
