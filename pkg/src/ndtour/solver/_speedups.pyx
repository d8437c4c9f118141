# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled backtracking kernel: statement-level twin of engine_py.run_dfs.

Same inputs, same candidate orders, same pruning decisions, same node counts.
The deterministic tie-break (2*rdeg + jit, prio) is collapsed into a single
integer key (prio is a permutation, so the composite is collision-free and
orders exactly like the tuple).  Any behavioral divergence from engine_py is
a bug; the parity test drives both kernels over the same boards.
"""

import time

import numpy as np

from libc.stdint cimport int32_t, int64_t, uint8_t

FOUND = 1
EXHAUSTED = 0
CUT = 2

# How often (in pushed nodes) the wall-clock deadline is polled.
cdef int64_t TIME_POLL_MASK = 0x3FF


cdef inline bint _push(
    int64_t[::1] ip, int32_t[::1] adj,
    int32_t[::1] rdeg, uint8_t[::1] visited,
    int32_t[::1] pos, int32_t[::1] path,
    uint8_t[::1] is_anchor_nbr, uint8_t[::1] is_start_nbr,
    int64_t[::1] scal,
    int v, int d, bint closed, int end, bint end_fixed,
    int anchor, int64_t anchor_last,
):
    """Mark v placed at depth d; False when the branch is provably dead."""
    cdef int64_t j
    cdef int w
    cdef bint dead = False
    visited[v] = 1
    pos[v] = d
    path[d] = v
    for j in range(ip[v], ip[v + 1]):
        w = adj[j]
        rdeg[w] -= 1
        if visited[w] == 0 and rdeg[w] == 0:
            if closed:
                if is_start_nbr[w] == 0:
                    dead = True
            elif end_fixed and w != end:
                dead = True
    if anchor >= 0 and is_anchor_nbr[v]:
        scal[0] -= 1
        if scal[0] == 0 and d < anchor_last:
            dead = True
    return not dead


cdef inline void _pop(
    int64_t[::1] ip, int32_t[::1] adj,
    int32_t[::1] rdeg, uint8_t[::1] visited, int32_t[::1] pos,
    uint8_t[::1] is_anchor_nbr, int64_t[::1] scal,
    int v, int anchor,
):
    cdef int64_t j
    visited[v] = 0
    pos[v] = -1
    for j in range(ip[v], ip[v + 1]):
        rdeg[adj[j]] += 1
    if anchor >= 0 and is_anchor_nbr[v]:
        scal[0] += 1


cdef inline bint _unvisited_reachable(
    int64_t[::1] ip, int32_t[::1] adj,
    uint8_t[::1] visited, int32_t[::1] mark, int64_t[::1] scal,
    int32_t[::1] queue,
    int tip, int64_t placed, int64_t n,
):
    cdef int64_t remaining = n - placed
    if remaining == 0:
        return True
    scal[1] += 1
    cdef int32_t stamp = <int32_t> scal[1]
    cdef int64_t seen = 0, top = 0, j
    cdef int u, w
    queue[top] = tip
    top += 1
    while top > 0:
        top -= 1
        u = queue[top]
        for j in range(ip[u], ip[u + 1]):
            w = adj[j]
            if visited[w] == 0 and mark[w] != stamp:
                mark[w] = stamp
                seen += 1
                queue[top] = w
                top += 1
    return seen == remaining


cdef inline int64_t _candidates(
    int64_t[::1] ip, int32_t[::1] adj,
    int64_t[::1] rp, int32_t[::1] rd,
    int32_t[::1] rdeg, uint8_t[::1] visited, int32_t[::1] path,
    int64_t[::1] pr, int64_t[::1] jt,
    int32_t[::1] cand, int64_t[::1] key, int64_t off,
    int u, int d, bint closed, int end, bint end_fixed,
    bint use_ordering, int64_t n,
):
    """Fill cand[off:off+cnt] with u's successors in exploration order."""
    cdef int prev = path[d - 1] if d > 0 else -1
    cdef int slots = 2 if (closed and d == 0) else 1
    cdef int64_t cnt = -1  # -1: base not forced by required edges
    cdef int64_t j, i, unsat_cnt, kept
    cdef int w
    cdef int64_t kv
    cdef int32_t cv

    if rp[u + 1] > rp[u]:
        unsat_cnt = 0
        for j in range(rp[u], rp[u + 1]):
            w = rd[j]
            if w != prev:
                cand[off + unsat_cnt] = w
                unsat_cnt += 1
        if unsat_cnt > slots:
            return 0
        if unsat_cnt > 0 and unsat_cnt == slots:
            kept = 0
            for i in range(unsat_cnt):
                w = cand[off + i]
                if visited[w] == 0:
                    cand[off + kept] = w
                    kept += 1
            if kept != unsat_cnt and slots == 1:
                return 0  # forced partner already visited: dead
            cnt = kept
    if cnt < 0:
        cnt = 0
        for j in range(ip[u], ip[u + 1]):
            w = adj[j]
            if visited[w] == 0:
                cand[off + cnt] = w
                cnt += 1
    if (not closed) and end_fixed:
        kept = 0
        if d + 1 == n - 1:
            for i in range(cnt):
                if cand[off + i] == end:
                    cand[off + kept] = cand[off + i]
                    kept += 1
        else:
            for i in range(cnt):
                if cand[off + i] != end:
                    cand[off + kept] = cand[off + i]
                    kept += 1
        cnt = kept
    # exploration order: composite integer key reproduces the tuple sort
    # (2*rdeg + jit, prio) because prio is a permutation of 0..n-1
    for i in range(cnt):
        w = cand[off + i]
        if use_ordering:
            key[off + i] = (2 * <int64_t> rdeg[w] + jt[w]) * n + pr[w]
        else:
            key[off + i] = w
    for i in range(1, cnt):
        kv = key[off + i]
        cv = cand[off + i]
        j = i - 1
        while j >= 0 and key[off + j] > kv:
            key[off + j + 1] = key[off + j]
            cand[off + j + 1] = cand[off + j]
            j -= 1
        key[off + j + 1] = kv
        cand[off + j + 1] = cv
    return cnt


cdef inline bint _required_satisfied(
    int32_t[::1] ra, int32_t[::1] rb, int32_t[::1] pos,
    bint closed, int64_t n,
):
    cdef int64_t i, diff
    for i in range(ra.shape[0]):
        diff = pos[ra[i]] - pos[rb[i]]
        if diff < 0:
            diff = -diff
        if diff != 1 and not (closed and diff == n - 1):
            return False
    return True


def run_dfs(
    indptr,
    indices,
    n,
    prefix,
    end,
    closed,
    req_ptr,
    req_dat,
    req_a,
    req_b,
    prio,
    jit,
    use_ordering,
    node_limit,
    time_limit,
    conn_interval,
    path_out,
):
    """Depth-first search for a Hamiltonian cycle (closed) or path.

    See engine_py.run_dfs for the full contract; this kernel is its
    statement-level mirror and returns identical (status, nodes).
    """
    cdef int64_t[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef int32_t[::1] adj = np.ascontiguousarray(indices, dtype=np.int32)
    cdef int64_t nn = n
    cdef int32_t[::1] pref = np.ascontiguousarray(prefix, dtype=np.int32)
    cdef int end_c = end
    cdef bint closed_c = closed
    cdef int64_t[::1] rp = np.ascontiguousarray(req_ptr, dtype=np.int64)
    cdef int32_t[::1] rd = np.ascontiguousarray(req_dat, dtype=np.int32)
    cdef int32_t[::1] ra = np.ascontiguousarray(req_a, dtype=np.int32)
    cdef int32_t[::1] rb = np.ascontiguousarray(req_b, dtype=np.int32)
    cdef int64_t[::1] pr = np.ascontiguousarray(prio, dtype=np.int64)
    cdef int64_t[::1] jt = np.ascontiguousarray(jit, dtype=np.int64)
    cdef bint use_ord = use_ordering
    cdef int64_t node_lim = node_limit
    cdef double tlim = time_limit
    cdef int64_t conn_iv = conn_interval
    cdef int32_t[::1] out = path_out

    cdef double deadline = 0.0
    cdef bint have_deadline = tlim > 0
    if have_deadline:
        deadline = time.monotonic() + tlim

    cdef int32_t[::1] rdeg = np.empty(nn, dtype=np.int32)
    cdef uint8_t[::1] visited = np.zeros(nn, dtype=np.uint8)
    cdef int32_t[::1] pos = np.full(nn, -1, dtype=np.int32)
    cdef int32_t[::1] path = np.zeros(nn, dtype=np.int32)
    cdef int32_t[::1] mark = np.zeros(nn, dtype=np.int32)
    cdef int32_t[::1] queue = np.empty(nn, dtype=np.int32)
    cdef uint8_t[::1] is_anchor_nbr = np.zeros(nn, dtype=np.uint8)
    cdef uint8_t[::1] is_start_nbr = np.zeros(nn, dtype=np.uint8)
    # scal[0] = anchor_free, scal[1] = reachability stamp
    cdef int64_t[::1] scal = np.zeros(2, dtype=np.int64)

    cdef int64_t cap = adj.shape[0] + nn + 4
    cdef int32_t[::1] cand = np.empty(cap, dtype=np.int32)
    cdef int64_t[::1] key = np.empty(cap, dtype=np.int64)
    cdef int64_t[::1] cand_start = np.zeros(nn + 1, dtype=np.int64)
    cdef int64_t[::1] cand_len = np.zeros(nn + 1, dtype=np.int64)
    cdef int64_t[::1] cptr = np.zeros(nn + 1, dtype=np.int64)

    cdef int64_t i, j
    for i in range(nn):
        rdeg[i] = <int32_t> (ip[i + 1] - ip[i])

    cdef int start = pref[0]
    cdef bint end_fixed = end_c >= 0
    cdef int64_t nodes = 0
    cdef int anchor = start if closed_c else (end_c if end_fixed else -1)
    if anchor >= 0:
        for j in range(ip[anchor], ip[anchor + 1]):
            is_anchor_nbr[adj[j]] = 1
        scal[0] = ip[anchor + 1] - ip[anchor]
    for j in range(ip[start], ip[start + 1]):
        is_start_nbr[adj[j]] = 1
    cdef int64_t anchor_last = (nn - 1) if closed_c else (nn - 2)

    # ---- seed the stack with the forced prefix --------------------------
    cdef int64_t depth = 0, coff = 0, plen = pref.shape[0], d
    cdef int v, tip
    cdef int64_t p, cnt
    cdef bint ok
    for d in range(plen):
        v = pref[d]
        nodes += 1
        if not _push(ip, adj, rdeg, visited, pos, path, is_anchor_nbr,
                     is_start_nbr, scal, v, <int> d, closed_c, end_c,
                     end_fixed, anchor, anchor_last):
            return EXHAUSTED, nodes
        cand_start[d] = coff
        if d + 1 < plen:
            cand[coff] = pref[d + 1]
            cand_len[d] = 1
            cptr[d] = 1
            coff += 1
        else:
            cand_len[d] = 0
            cptr[d] = 0
        depth = d
    if depth < nn - 1 and cand_len[depth] == 0 and cptr[depth] == 0:
        cand_start[depth] = coff
        cnt = _candidates(ip, adj, rp, rd, rdeg, visited, path, pr, jt,
                          cand, key, coff, path[depth], <int> depth,
                          closed_c, end_c, end_fixed, use_ord, nn)
        cand_len[depth] = cnt
        coff += cnt

    while True:
        if depth == nn - 1:
            tip = path[depth]
            ok = is_start_nbr[tip] if closed_c else (
                (not end_fixed) or tip == end_c
            )
            if ok and (ra.shape[0] == 0
                       or _required_satisfied(ra, rb, pos, closed_c, nn)):
                for i in range(nn):
                    out[i] = path[i]
                return FOUND, nodes
            _pop(ip, adj, rdeg, visited, pos, is_anchor_nbr, scal, tip, anchor)
            coff = cand_start[depth]
            depth -= 1
            if depth < 0:
                return EXHAUSTED, nodes
            continue
        p = cptr[depth]
        if p >= cand_len[depth]:
            tip = path[depth]
            _pop(ip, adj, rdeg, visited, pos, is_anchor_nbr, scal, tip, anchor)
            coff = cand_start[depth]
            depth -= 1
            if depth < 0:
                return EXHAUSTED, nodes
            continue
        cptr[depth] = p + 1
        v = cand[cand_start[depth] + p]
        nodes += 1
        if node_lim > 0 and nodes >= node_lim:
            return CUT, nodes
        if have_deadline and (nodes & TIME_POLL_MASK) == 0:
            if time.monotonic() > deadline:
                return CUT, nodes
        if not _push(ip, adj, rdeg, visited, pos, path, is_anchor_nbr,
                     is_start_nbr, scal, v, <int> (depth + 1), closed_c,
                     end_c, end_fixed, anchor, anchor_last):
            _pop(ip, adj, rdeg, visited, pos, is_anchor_nbr, scal, v, anchor)
            continue
        if (conn_iv > 0 and (depth + 2) % conn_iv == 0
                and not _unvisited_reachable(ip, adj, visited, mark, scal,
                                             queue, v, depth + 2, nn)):
            _pop(ip, adj, rdeg, visited, pos, is_anchor_nbr, scal, v, anchor)
            continue
        depth += 1
        cand_start[depth] = coff
        cnt = _candidates(ip, adj, rp, rd, rdeg, visited, path, pr, jt,
                          cand, key, coff, v, <int> depth, closed_c, end_c,
                          end_fixed, use_ord, nn)
        cand_len[depth] = cnt
        cptr[depth] = 0
        coff += cnt
