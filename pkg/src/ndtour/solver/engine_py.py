"""Pure-Python backtracking kernel for Hamiltonian cycle/path search.

The kernel works on a packed CSR adjacency over integer cell ids.  It is the
reference implementation; the optional Cython twin (``_speedups``) mirrors it
statement-for-statement so both engines visit identical search trees and
return identical results for identical inputs.

Search-state invariants:

* ``path[0..depth]`` are the placed cells, ``visited``/``pos`` agree with it.
* ``rdeg[w]`` = number of *unvisited* neighbors of ``w``.
* Candidate lists are materialized per depth; a frame's pointer walks them in
  a deterministic order (Warnsdorff remaining-degree with seeded jitter and
  tie-breaks, or plain id order when heuristic ordering is disabled).

Soundness of the in-search pruning (never discards a valid completion):

* Required-edge forcing: a visited node's tour edges are fixed by the path,
  so an unsatisfied required edge at the tip either forces the next move or
  proves the branch dead (the closing edge can only serve the last cell).
* Degree forcing: an unvisited node whose unvisited-degree hits 0 can only be
  served by the current tip plus (closed tours) the start; if that is not
  enough capacity the branch is dead.
* Closure forcing: a closed tour must end on an unvisited neighbor of the
  start, an end-pinned path on an unvisited neighbor of the end; when none
  remain (and the path is not already at that final step) the branch is dead.
* Connectivity: the rest of any completion is one walk from the tip, so all
  unvisited cells must be reachable from the tip through unvisited cells.
"""

from __future__ import annotations

import time

import numpy as np

FOUND = 1
EXHAUSTED = 0
CUT = 2

# How often (in pushed nodes) the wall-clock deadline is polled.
_TIME_POLL_MASK = 0x3FF


def run_dfs(
    indptr: np.ndarray,
    indices: np.ndarray,
    n: int,
    prefix: np.ndarray,
    end: int,
    closed: bool,
    req_ptr: np.ndarray,
    req_dat: np.ndarray,
    req_a: np.ndarray,
    req_b: np.ndarray,
    prio: np.ndarray,
    jit: np.ndarray,
    use_ordering: bool,
    node_limit: int,
    time_limit: float,
    conn_interval: int,
    path_out: np.ndarray,
) -> tuple[int, int]:
    """Depth-first search for a Hamiltonian cycle (closed) or path.

    ``prefix`` (length >= 1) pins the first cells: alternatives to it are not
    explored.  ``end`` is -1 or the id the path must finish on (open only).
    ``jit`` perturbs the Warnsdorff key (ordered by ``2*rdeg + jit``) so that
    restarts explore genuinely different move orders; all-zero ``jit`` is the
    plain heuristic.  ``node_limit`` <= 0 means unlimited; ``time_limit`` <= 0
    means no deadline; ``conn_interval`` <= 0 disables connectivity checks.

    Returns (status, nodes_expanded); on FOUND the tour is in ``path_out``.
    """
    deadline = time.monotonic() + time_limit if time_limit > 0 else 0.0
    ip = indptr.tolist()
    adj = indices.tolist()
    adj_rows = [adj[ip[i] : ip[i + 1]] for i in range(n)]
    adj_sets = [set(r) for r in adj_rows]
    rp = req_ptr.tolist()
    rd = req_dat.tolist()
    req_rows = [rd[rp[i] : rp[i + 1]] for i in range(n)]
    ra = req_a.tolist()
    rb = req_b.tolist()
    pr = prio.tolist()
    jt = jit.tolist()

    rdeg = [len(r) for r in adj_rows]
    visited = [False] * n
    pos = [-1] * n
    path = [0] * n
    cand_stack: list[list[int]] = [[] for _ in range(n)]
    ptr_stack = [0] * n
    mark = [0] * n
    stamp = 0
    start = int(prefix[0])
    end_fixed = end >= 0
    nodes = 0

    # Closure bookkeeping: the cell the tour must finish next to.
    anchor = start if closed else (end if end_fixed else -1)
    is_anchor_nbr = [False] * n
    anchor_free = 0
    if anchor >= 0:
        for w in adj_rows[anchor]:
            is_anchor_nbr[w] = True
        anchor_free = len(adj_rows[anchor])
    # The last legal depth at which anchor_free may reach zero: the final
    # cell itself (closed: adjacent to start) or the next-to-last (open:
    # the predecessor of the pinned end).
    anchor_last = (n - 1) if closed else (n - 2)

    def push_bookkeeping(v: int, d: int) -> bool:
        """Mark v placed at depth d; returns False when the branch is dead."""
        nonlocal anchor_free
        visited[v] = True
        pos[v] = d
        path[d] = v
        dead = False
        for w in adj_rows[v]:
            rdeg[w] -= 1
            if not visited[w] and rdeg[w] == 0:
                if closed:
                    if start not in adj_sets[w]:
                        dead = True
                elif end_fixed and w != end:
                    dead = True
        if anchor >= 0 and is_anchor_nbr[v]:
            anchor_free -= 1
            if anchor_free == 0 and d < anchor_last:
                dead = True
        return not dead

    def pop_bookkeeping(v: int) -> None:
        nonlocal anchor_free
        visited[v] = False
        pos[v] = -1
        for w in adj_rows[v]:
            rdeg[w] += 1
        if anchor >= 0 and is_anchor_nbr[v]:
            anchor_free += 1

    def unvisited_reachable(tip: int, placed: int) -> bool:
        nonlocal stamp
        remaining = n - placed
        if remaining == 0:
            return True
        stamp += 1
        queue = [tip]
        seen = 0
        while queue:
            u = queue.pop()
            for w in adj_rows[u]:
                if not visited[w] and mark[w] != stamp:
                    mark[w] = stamp
                    seen += 1
                    queue.append(w)
        return seen == remaining

    def candidates_for(u: int, d: int) -> list[int]:
        prev = path[d - 1] if d > 0 else -1
        slots = 2 if (closed and d == 0) else 1
        base: list[int] | None = None
        ru = req_rows[u]
        if ru:
            unsat = [w for w in ru if w != prev]
            if len(unsat) > slots:
                return []
            if unsat and len(unsat) == slots:
                base = [w for w in unsat if not visited[w]]
                if len(base) != len(unsat) and slots == 1:
                    return []  # forced partner already visited: dead
        if base is None:
            base = [w for w in adj_rows[u] if not visited[w]]
        if not closed and end_fixed:
            if d + 1 == n - 1:
                base = [w for w in base if w == end]
            else:
                base = [w for w in base if w != end]
        if use_ordering:
            base.sort(key=lambda w: (2 * rdeg[w] + jt[w], pr[w]))
        else:
            base.sort()
        return base

    def required_satisfied() -> bool:
        for a, b in zip(ra, rb):
            diff = pos[a] - pos[b]
            if diff < 0:
                diff = -diff
            if diff != 1 and not (closed and diff == n - 1):
                return False
        return True

    # ---- seed the stack with the forced prefix ------------------------------
    depth = 0
    for d in range(len(prefix)):
        v = int(prefix[d])
        nodes += 1
        if not push_bookkeeping(v, d):
            return EXHAUSTED, nodes
        cand_stack[d] = [int(prefix[d + 1])] if d + 1 < len(prefix) else []
        ptr_stack[d] = 1 if d + 1 < len(prefix) else 0
        depth = d
    if depth < n - 1 and not cand_stack[depth] and ptr_stack[depth] == 0:
        cand_stack[depth] = candidates_for(path[depth], depth)

    while True:
        if depth == n - 1:
            tip = path[depth]
            ok = start in adj_sets[tip] if closed else (not end_fixed or tip == end)
            if ok and (not ra or required_satisfied()):
                for i in range(n):
                    path_out[i] = path[i]
                return FOUND, nodes
            pop_bookkeeping(tip)
            depth -= 1
            if depth < 0:
                return EXHAUSTED, nodes
            continue
        cl = cand_stack[depth]
        p = ptr_stack[depth]
        if p >= len(cl):
            tip = path[depth]
            pop_bookkeeping(tip)
            depth -= 1
            if depth < 0:
                return EXHAUSTED, nodes
            continue
        ptr_stack[depth] = p + 1
        v = cl[p]
        nodes += 1
        if node_limit > 0 and nodes >= node_limit:
            return CUT, nodes
        if deadline and (nodes & _TIME_POLL_MASK) == 0 and time.monotonic() > deadline:
            return CUT, nodes
        if not push_bookkeeping(v, depth + 1):
            pop_bookkeeping(v)
            continue
        if (
            conn_interval > 0
            and (depth + 2) % conn_interval == 0
            and not unvisited_reachable(v, depth + 2)
        ):
            pop_bookkeeping(v)
            continue
        depth += 1
        cand_stack[depth] = candidates_for(v, depth)
        ptr_stack[depth] = 0
