"""Acceptance gate: every shipped guarantee, one test and one line each.

Each criterion prints ``[PASS]``/``[FAIL] criterion N`` with the measured
numbers, then asserts, so a ``pytest -v`` run shows one verdict line per
criterion and the printed detail survives on failure.
"""

from __future__ import annotations

import itertools
import math
import time

import pytest

from ndtour.blocks import BLOCK_SPECS, load_block
from ndtour.boards import BoardSpec, MoveParams, is_connected
from ndtour.construct import (
    NoExtenderError,
    NotTourableError,
    _ND_MEMO,
    build_extender,
    construct_nd,
    extend_seeded,
    lift,
    lift_generalized,
    stack_open_pair,
)
from ndtour.feasibility import classify_nd, knuth_connectivity_2d
from ndtour.solver import SearchBudget, SolveStatus, solve
from ndtour.construct import is_seeded
from ndtour.tours import find_sites, first_disjoint_pair, is_bisited, tour_key, verify


def report(n: int, label: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {label}"
    if detail:
        line += f" — {detail}"
    print(line)
    assert ok, line


def sorted_boards(axes, sides, max_cells):
    for k in axes:
        for dims in itertools.combinations_with_replacement(sides, k):
            if math.prod(dims) <= max_cells:
                yield dims


def test_criterion_1_classifier_matches_exhaustive_search():
    """Shape classification equals exhaustive search on every small board."""
    boards = list(sorted_boards(axes=(2, 3, 4), sides=range(1, 9), max_cells=32))
    named = [(3, 4), (3, 6), (3, 8), (2, 3, 3)] + [
        tuple(sorted((2, 2, k))) for k in range(1, 9)
    ]
    for dims in named:
        assert dims in boards, f"named negative {dims} missing from the sweep"
    mismatches = []
    budget = SearchBudget(time_limit=60.0)
    for dims in boards:
        spec = BoardSpec(dims)
        verdict = classify_nd(spec)
        outcome = solve(spec, budget=budget)
        if outcome.status is SolveStatus.Exhausted:
            mismatches.append((dims, "budget exhausted"))
            continue
        found = outcome.status is SolveStatus.Found
        if found != verdict.tourable:
            mismatches.append((dims, f"classify={verdict.tourable} solve={found}"))
        if found and verify(outcome.tour) is not None:
            mismatches.append((dims, "solver tour failed verification"))
    report(
        1,
        "classifier == exhaustive search, dims 2-4, sides <= 8, <= 32 cells",
        not mismatches,
        f"{len(boards)} boards, {len(mismatches)} mismatches"
        + (f": {mismatches[:4]}" if mismatches else ""),
    )


def test_criterion_2_construction_total_on_grid():
    """construct_nd succeeds exactly where the classifier says it must."""
    boards = list(
        sorted_boards(axes=(2, 3, 4, 5), sides=range(2, 9), max_cells=200_000)
    )
    built = failures = negatives = 0
    problems = []
    for dims in boards:
        verdict = classify_nd(BoardSpec(dims))
        if verdict.tourable:
            try:
                t = construct_nd(dims)
            except Exception as exc:  # noqa: BLE001 - report, don't crash
                failures += 1
                problems.append((dims, repr(exc)))
                continue
            v = verify(t)
            if v is not None or t.board.dims != dims or len(t) != math.prod(dims):
                failures += 1
                problems.append((dims, str(v)))
            else:
                built += 1
        else:
            negatives += 1
            try:
                construct_nd(dims)
            except NotTourableError as exc:
                if exc.verdict != verdict:
                    failures += 1
                    problems.append((dims, "verdict drift"))
            else:
                failures += 1
                problems.append((dims, "constructed an impossible board"))
    report(
        2,
        "verified tours on every tourable board, sides 2-8, dims 2-5, <= 200k cells",
        failures == 0,
        f"{len(boards)} boards: {built} built, {negatives} correctly refused"
        + (f", problems: {problems[:4]}" if problems else ""),
    )


def test_criterion_3_oracle_tours_are_bisited():
    """Twenty-plus independent search results all contain disjoint sites."""
    boards = [(3, 10), (3, 12), (5, 6), (5, 8), (6, 6), (6, 7), (7, 8), (8, 8)]
    keys = set()
    non_bisited = []
    for dims in boards:
        for seed in (0, 1, 2):
            outcome = solve(BoardSpec(dims), budget=SearchBudget(seed=seed))
            assert outcome.found, f"no tour found on {dims} seed {seed}"
            keys.add(tour_key(outcome.tour))
            if not is_bisited(outcome.tour):
                non_bisited.append((dims, seed))
    report(
        3,
        ">= 20 distinct oracle tours, every one bi-sited",
        len(keys) >= 20 and not non_bisited,
        f"{len(keys)} distinct tours, {len(non_bisited)} non-bisited",
    )


def test_criterion_4_lift_invariants_over_the_block_library():
    """Every closed bi-sited block lifts to k layers with surviving sites."""
    bases = [
        name
        for name, spec in BLOCK_SPECS.items()
        if spec.closed and spec.check == "bisited"
    ]
    assert len(bases) == 18
    checked = 0
    slow = []
    problems = []
    for name in bases:
        base = load_block(name)
        s1, s2 = first_disjoint_pair(base, magnitude=base.mp.alpha)
        for k in (2, 3, 4, 5, 6):
            t0 = time.perf_counter()
            out = lift(base, k)
            dt = time.perf_counter() - t0
            if len(base) <= 100 and dt >= 0.1:
                slow.append((name, k, round(dt * 1000, 1)))
            if len(out) != k * len(base) or verify(out) is not None:
                problems.append((name, k, "size/verify"))
                continue
            if not is_bisited(out):
                problems.append((name, k, "not bisited"))
                continue
            survivors = {1: s2, k: s2 if k % 2 == 0 else s1}
            detected = [set(s.support) for s in find_sites(out)]
            for layer, site in survivors.items():
                embedded = {cell + (layer,) for cell in site.support}
                if embedded not in detected:
                    problems.append((name, k, f"layer {layer} site lost"))
            checked += 1
    report(
        4,
        "k-layer lifts of all 18 bi-sited blocks: size, verify, sites, < 100 ms",
        not problems and not slow,
        f"{checked} lifts checked"
        + (f", problems: {problems[:4]}" if problems else "")
        + (f", slow: {slow[:4]}" if slow else ""),
    )


def test_criterion_5_scale_targets():
    """Cold-cache construction hits the wall-clock targets."""
    targets = [
        ((6, 6, 6, 6), 1.0),
        ((8, 8, 8, 8, 8), 1.0),
        ((8, 8, 8, 8, 8, 32), 30.0),
    ]
    timings = []
    ok = True
    for dims, bound in targets:
        _ND_MEMO.clear()
        t0 = time.perf_counter()
        t = construct_nd(dims)
        v = verify(t)
        dt = time.perf_counter() - t0
        timings.append(f"{'x'.join(map(str, dims))}: {dt:.2f}s/{bound:.0f}s")
        if v is not None or dt >= bound:
            ok = False
    report(5, "large-board construction within time budget", ok, ", ".join(timings))


def test_criterion_6_generalized_moves():
    """(3,2) oracle tour on 10x10, then verified 3-D lifts under 1 s."""
    t0 = time.perf_counter()
    outcome = solve(BoardSpec((10, 10)), MoveParams(3, 2),
                    budget=SearchBudget(time_limit=300.0))
    oracle_dt = time.perf_counter() - t0
    ok = outcome.found and oracle_dt < 300.0
    timings = [f"oracle {oracle_dt:.2f}s"]
    if ok:
        for k in (4, 5, 6):
            t0 = time.perf_counter()
            out = lift_generalized(outcome.tour, k)
            v = verify(out)
            dt = time.perf_counter() - t0
            timings.append(f"k={k}: {dt * 1000:.0f}ms")
            if v is not None or out.board.dims != (10, 10, k) or dt >= 1.0:
                ok = False
    report(6, "(3,2)-tour found and lifted to 10x10x{4,5,6}", ok,
           ", ".join(timings))


def test_criterion_7_closed_form_connectivity():
    """The arithmetic connectivity test agrees with breadth-first search."""
    pairs = [(2, 1), (3, 1), (3, 2), (4, 1), (4, 3)]  # gcd-normalized
    mismatches = []
    checked = 0
    for alpha, beta in pairs:
        mp = MoveParams(alpha, beta)
        for n in range(1, 13):
            for m in range(1, 13):
                closed_form = knuth_connectivity_2d(n, m, mp)
                bfs = is_connected(BoardSpec((n, m)), mp)
                checked += 1
                if closed_form != bfs:
                    mismatches.append((alpha, beta, n, m))
    report(
        7,
        "closed-form connectivity == BFS for all moves up to (4,3), boards to 12x12",
        not mismatches,
        f"{checked} boards checked, {len(mismatches)} mismatches"
        + (f": {mismatches[:4]}" if mismatches else ""),
    )


def test_criterion_8_growth_machinery():
    """Extender strips, iterated seeded growth to 20x20, and stacking."""
    problems = []
    for m in (3, 5, 6, 7, 8, 9, 10):
        t = build_extender(m)
        if verify(t) is not None or t.board.dims != (4, m):
            problems.append(("extender", m))
    for m in (1, 2, 4):
        try:
            build_extender(m)
            problems.append(("extender-no-error", m))
        except NoExtenderError:
            pass

    grown = 0
    for name, spec in BLOCK_SPECS.items():
        if not name.startswith("seeded-"):
            continue
        t = load_block(name)
        while t.board.dims[0] + 4 <= 20:
            t = extend_seeded(t, axis=0)
            grown += 1
            if verify(t) is not None or not is_seeded(t):
                problems.append((name, t.board.dims))
        while t.board.dims[1] + 4 <= 20:
            t = extend_seeded(t, axis=1)
            grown += 1
            if verify(t) is not None or not is_seeded(t):
                problems.append((name, t.board.dims))

    for name, dims in (
        ("stack-5x5", (5, 5, 2)),
        ("stack-5x7", (5, 7, 2)),
        ("stack-7x7", (7, 7, 2)),
    ):
        out = stack_open_pair(load_block(name))
        if verify(out) is not None or out.board.dims != dims:
            problems.append(("stack", name))
    report(
        8,
        "extenders {3,5..10}, seeded growth to 20x20, stacked pairs",
        not problems,
        f"{grown} growth steps verified"
        + (f", problems: {problems[:4]}" if problems else ""),
    )
