#!/usr/bin/env python3
"""Compare the pure-Python and compiled search kernels on identical trees.

Both engines receive byte-identical CSR graphs, orderings, and budgets, so
they must explore the same tree: statuses, node counts, and found paths are
asserted equal before any timing is reported.  Throughput is nodes/second
over the better of ``--repeat`` runs.

Usage: python3 benchmarks/compare_engines.py [--repeat N] [--quick]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ndtour.boards import BoardSpec
from ndtour.solver import SearchConstraints
from ndtour.solver import core as solver_core
from ndtour.solver import engine_py

CASES = [
    ("6x6 closed (found)", (6, 6), True),
    ("8x8 closed (found)", (8, 8), True),
    ("2x4x6 closed (found)", (2, 4, 6), True),
    ("3x3x4 closed (found)", (3, 3, 4), True),
    ("4x6 closed (none, exhaustive)", (4, 6), True),
    ("4x8 closed (none, exhaustive)", (4, 8), True),
]

STATUS_NAMES = {0: "exhausted", 1: "found", 2: "cut"}


def run_engine(engine, prep, n, seed=0):
    path_out = np.zeros(n, dtype=np.int32)
    t0 = time.perf_counter()
    status, nodes = engine.run_dfs(
        prep.indptr,
        prep.indices.astype(np.int32),
        n,
        np.array([0], dtype=np.int32),
        prep.end_id,
        True,
        prep.req_ptr,
        prep.req_dat,
        prep.req_a,
        prep.req_b,
        solver_core._prio_for(n, seed, 0),
        solver_core._jitter_for(n, seed, 0),
        True,
        0,
        0.0,
        0,
        path_out,
    )
    return status, nodes, path_out, time.perf_counter() - t0


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true",
                    help="skip the multi-million-node exhaustive case")
    args = ap.parse_args()

    try:
        compiled = solver_core.get_engine("cython")
    except RuntimeError:
        print("compiled engine not built (pure-Python install); nothing to compare")
        return 0

    cases = CASES[:-1] if args.quick else CASES
    print(f"{'case':32s} {'nodes':>10s} {'python':>10s} {'compiled':>10s} "
          f"{'py Mn/s':>8s} {'cy Mn/s':>8s} {'speedup':>8s}")
    for label, dims, closed in cases:
        spec = BoardSpec(dims)
        prep = solver_core._prepare(
            spec, solver_core.CLASSICAL, SearchConstraints(closed=closed)
        )
        n = spec.cell_count
        best = {}
        for engine_name, engine in (("python", engine_py), ("cython", compiled)):
            for _ in range(args.repeat):
                status, nodes, path, dt = run_engine(engine, prep, n)
                rec = best.get(engine_name)
                if rec is None or dt < rec[3]:
                    best[engine_name] = (status, nodes, path, dt)
        (ps, pn, pp, pt) = best["python"]
        (cs, cn, cp, ct) = best["cython"]
        assert ps == cs, f"{label}: status diverged {ps} vs {cs}"
        assert pn == cn, f"{label}: node count diverged {pn} vs {cn}"
        assert np.array_equal(pp, cp), f"{label}: paths diverged"
        print(
            f"{label:32s} {pn:>10d} {pt * 1000:>8.1f}ms {ct * 1000:>8.1f}ms "
            f"{pn / pt / 1e6:>8.2f} {cn / ct / 1e6:>8.2f} {pt / ct:>7.1f}x"
        )
    print(f"\nidentical trees confirmed ({STATUS_NAMES[ps]} on the last case); "
          "timings are best of "
          f"{args.repeat}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
