"""Command-line surface: classify, construct, verify, sites, solve, blocks, bench.

Exit codes: 0 success/tourable/found, 1 not-tourable/violation/proved-none,
2 usage or malformed input, 3 search budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from .boards import BoardSpec, CLASSICAL, MoveParams, is_connected
from .feasibility import Verdict, classify_nd, knuth_connectivity_2d
from .solver import SearchBudget, SearchConstraints, SolveStatus, solve
from .tourio import TourDocument, export_grid, export_json
from .tours import Tour, find_sites, first_disjoint_pair, verify

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_EXHAUSTED = 3

_CONNECTIVITY_CELL_CAP = 200_000


class _UsageError(Exception):
    pass


def _parse_dims(tokens: Sequence[str]) -> tuple[int, ...]:
    raw = "x".join(tokens).replace(",", "x").replace("×", "x")
    parts = [p for p in raw.split("x") if p]
    try:
        dims = tuple(int(p) for p in parts)
    except ValueError:
        raise _UsageError(f"bad dims {' '.join(tokens)!r}; expected e.g. 6x6x6")
    if not dims:
        raise _UsageError("no dims given")
    return dims


def _parse_cell(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.replace("x", ",").split(",") if p)
    except ValueError:
        raise _UsageError(f"bad cell {text!r}; expected e.g. 1,2,3")


def _parse_edge(text: str) -> tuple[tuple[int, ...], tuple[int, ...]]:
    parts = text.split(":")
    if len(parts) != 2:
        raise _UsageError(f"bad edge {text!r}; expected CELL:CELL e.g. 1,4:2,6")
    return _parse_cell(parts[0]), _parse_cell(parts[1])


def _mp_from_args(args: argparse.Namespace) -> MoveParams:
    try:
        return MoveParams(args.alpha, args.beta)
    except ValueError as exc:
        raise _UsageError(str(exc))


def _read_tour(path: str) -> Tour:
    """Load a tour document, distinguishing malformed files from bad tours."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc}")
    try:
        obj = json.loads(data)
        doc = TourDocument.from_obj(obj)
        return doc.to_tour()
    except (ValueError, TypeError) as exc:
        raise _UsageError(f"{path}: {exc}")


def _verdict_obj(spec: BoardSpec, mp: MoveParams, v: Verdict) -> dict:
    out: dict = {
        "dims": list(spec.dims),
        "alpha": mp.alpha,
        "beta": mp.beta,
        "tourable": v.tourable,
        "reason": v.reason.value,
        "theorem": v.theorem.value,
    }
    if mp != CLASSICAL:
        if spec.k == 2:
            out["knuth_condition"] = knuth_connectivity_2d(
                spec.dims[0], spec.dims[1], mp
            )
        if spec.cell_count <= _CONNECTIVITY_CELL_CAP:
            out["connected"] = is_connected(spec, mp)
    return out


def _write_output(text_or_bytes, path: Optional[str]) -> None:
    data = (
        text_or_bytes
        if isinstance(text_or_bytes, (bytes, bytearray))
        else text_or_bytes.encode("utf-8")
    )
    if path is None or path == "-":
        sys.stdout.write(data.decode("utf-8"))
        if not data.endswith(b"\n"):
            sys.stdout.write("\n")
    else:
        Path(path).write_bytes(data)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_classify(args: argparse.Namespace) -> int:
    dims = _parse_dims(args.dims)
    mp = _mp_from_args(args)
    try:
        spec = BoardSpec(dims)
    except ValueError as exc:
        raise _UsageError(str(exc))
    if mp == CLASSICAL:
        v = classify_nd(spec)
    else:
        # no closed-form classification beyond (2,1); report the known
        # necessary conditions and connectivity instead
        from .feasibility import prune_checks

        certs = prune_checks(spec, mp)
        v = None
    if v is not None:
        obj = _verdict_obj(spec, mp, v)
        if args.json:
            print(json.dumps(obj, indent=1))
        else:
            print(f"{'x'.join(map(str, dims))}: {v}")
        return EXIT_OK if v.tourable else EXIT_NEGATIVE
    obj = {
        "dims": list(spec.dims),
        "alpha": mp.alpha,
        "beta": mp.beta,
        # an obstruction certificate is a proof; otherwise undecided
        "tourable": False if certs else None,
        "obstructions": [c.as_dict() for c in certs],
    }
    if spec.k == 2:
        obj["knuth_condition"] = knuth_connectivity_2d(dims[0], dims[1], mp)
    if spec.cell_count <= _CONNECTIVITY_CELL_CAP:
        obj["connected"] = is_connected(spec, mp)
    if args.json:
        print(json.dumps(obj, indent=1))
    else:
        name = "x".join(map(str, dims))
        if certs:
            reasons = "; ".join(str(c) for c in certs)
            print(f"{name} ({mp.alpha},{mp.beta}): no tour ({reasons})")
        else:
            extra = ""
            if "connected" in obj:
                extra = ", connected" if obj["connected"] else ", disconnected"
            print(
                f"{name} ({mp.alpha},{mp.beta}): no obstruction found{extra}; "
                "use `solve` for a definite answer"
            )
    if certs:
        return EXIT_NEGATIVE
    return EXIT_OK


def _cmd_construct(args: argparse.Namespace) -> int:
    from .construct import NotTourableError, construct_nd

    dims = _parse_dims(args.dims)
    try:
        t = construct_nd(dims)
    except NotTourableError as exc:
        print(f"{'x'.join(map(str, dims))}: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    v = verify(t)
    if v is not None:  # construct_nd verifies; double bolt before writing
        print(f"internal error: constructed tour invalid: {v}", file=sys.stderr)
        return EXIT_NEGATIVE
    if args.format == "grid":
        try:
            _write_output(export_grid(t), args.output)
        except ValueError as exc:
            raise _UsageError(str(exc))
    else:
        meta = {"generator": "construct"}
        _write_output(export_json(t, meta), args.output)
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    try:
        data = Path(args.file).read_bytes()
    except OSError as exc:
        raise _UsageError(f"cannot read {args.file}: {exc}")
    try:
        doc = TourDocument.from_obj(json.loads(data))
        t = doc.to_tour()
    except (ValueError, TypeError) as exc:
        raise _UsageError(f"{args.file}: {exc}")
    v = verify(t)
    if v is None:
        kind = "closed" if t.closed else "open"
        print(f"Ok: {kind} tour, {len(t)} cells on "
              f"{'x'.join(map(str, t.board.dims))}")
        return EXIT_OK
    print(f"Violation: {v}")
    return EXIT_NEGATIVE


def _cmd_sites(args: argparse.Namespace) -> int:
    t = _read_tour(args.file)
    v = verify(t)
    if v is not None:
        print(f"Violation: {v}", file=sys.stderr)
        return EXIT_NEGATIVE
    if not t.closed:
        raise _UsageError("sites are defined for closed tours only")
    sites = find_sites(t)
    obj: dict = {
        "dims": list(t.board.dims),
        "count": len(sites),
        "sites": [s.as_dict() for s in sites],
    }
    if args.disjoint:
        pair = first_disjoint_pair(t, magnitude=t.mp.alpha)
        obj["disjoint_pair"] = (
            [pair[0].as_dict(), pair[1].as_dict()] if pair else None
        )
    print(json.dumps(obj, indent=1))
    return EXIT_OK


def _cmd_solve(args: argparse.Namespace) -> int:
    dims = _parse_dims(args.dims)
    mp = _mp_from_args(args)
    try:
        spec = BoardSpec(dims)
        constraints = SearchConstraints(
            closed=not args.open,
            start=_parse_cell(args.start) if args.start else None,
            end=_parse_cell(args.end) if args.end else None,
            required_edges=tuple(_parse_edge(e) for e in args.require_edge),
            forbidden_edges=tuple(_parse_edge(e) for e in args.forbid_edge),
        )
        budget = SearchBudget(
            node_limit=args.node_limit,
            time_limit=args.budget_ms / 1000.0 if args.budget_ms else None,
            seed=args.seed,
        )
    except ValueError as exc:
        raise _UsageError(str(exc))
    outcome = solve(
        spec, mp, constraints=constraints, budget=budget, workers=args.workers
    )
    summary = {
        "dims": list(dims),
        "alpha": mp.alpha,
        "beta": mp.beta,
        "status": outcome.status.value,
        "nodes": outcome.nodes,
        "elapsed_s": round(outcome.elapsed, 3),
    }
    if outcome.note:
        summary["note"] = outcome.note
    if outcome.certificates:
        summary["certificates"] = [c.as_dict() for c in outcome.certificates]
    if outcome.status is SolveStatus.Found:
        t = outcome.tour
        if verify(t) is not None:  # solver output is verified; belt and braces
            print("internal error: solver returned invalid tour", file=sys.stderr)
            return EXIT_NEGATIVE
        if args.output:
            _write_output(export_json(t, {"generator": "solve",
                                          "seed": args.seed}), args.output)
            summary["written"] = args.output
        print(json.dumps(summary, indent=1))
        return EXIT_OK
    print(json.dumps(summary, indent=1))
    if outcome.status is SolveStatus.ProvedNone:
        return EXIT_NEGATIVE
    return EXIT_EXHAUSTED


def _cmd_blocks(args: argparse.Namespace) -> int:
    from .blocks import BLOCK_SPECS, cache_dir, regenerate

    if args.blocks_cmd == "regenerate":
        only = args.only or None
        if only:
            unknown = [n for n in only if n not in BLOCK_SPECS]
            if unknown:
                raise _UsageError(
                    f"unknown block(s): {', '.join(unknown)}; "
                    f"known: {', '.join(sorted(BLOCK_SPECS))}"
                )
        dest = args.dest or str(cache_dir())
        t0 = time.time()
        count = 0
        for name, path, seed in regenerate(only=only, dest=dest):
            count += 1
            print(f"  {name:18s} seed={seed}  -> {path}")
        print(f"{count} block(s) rebuilt in {time.time() - t0:.1f}s at {dest}")
        return EXIT_OK
    if args.blocks_cmd == "list":
        for name, spec in sorted(BLOCK_SPECS.items()):
            dims = "x".join(map(str, spec.dims))
            kind = "closed" if spec.closed else "open"
            print(f"  {name:18s} {dims:10s} {kind:6s} ({spec.role})")
        return EXIT_OK
    raise _UsageError("blocks requires a subcommand: regenerate | list")


_BENCH_BOARDS = [
    (6, 6),
    (8, 8),
    (20, 20),
    (50, 50),
    (6, 6, 6),
    (8, 8, 8),
    (6, 6, 6, 6),
    (8, 8, 8, 8),
    (8, 8, 8, 8, 8),
    (8, 8, 8, 8, 8, 32),
]


def _cmd_bench(args: argparse.Namespace) -> int:
    from .construct import construct_nd
    from .solver import get_engine

    print(f"{'board':>16s} {'cells':>9s} {'construct':>10s} {'verify':>8s} "
          f"{'cells/s':>10s}")
    for dims in _BENCH_BOARDS:
        spec = BoardSpec(dims)
        if spec.cell_count > args.max_cells:
            continue
        t0 = time.time()
        t = construct_nd(dims)
        dt_build = time.time() - t0
        t0 = time.time()
        v = verify(t)
        dt_verify = time.time() - t0
        assert v is None
        rate = spec.cell_count / max(dt_build + dt_verify, 1e-9)
        name = "x".join(map(str, dims))
        print(f"{name:>16s} {spec.cell_count:>9d} {dt_build:>9.3f}s "
              f"{dt_verify:>7.3f}s {rate:>10.0f}")

    print()
    print("solver engines (closed 6x6 search, fixed seed):")
    for engine in ("python", "cython"):
        try:
            get_engine(engine)
        except (RuntimeError, ValueError):
            print(f"  {engine:>7s}: not available")
            continue
        t0 = time.time()
        out = solve(
            BoardSpec((6, 6)),
            budget=SearchBudget(seed=1),
            engine=engine,
            use_certificates=False,
        )
        dt = time.time() - t0
        print(
            f"  {engine:>7s}: {out.status.value} in {dt:.3f}s, "
            f"{out.nodes} nodes, {out.nodes / max(dt, 1e-9):,.0f} nodes/s"
        )
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_move_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=int, default=2, help="move long component")
    p.add_argument("--beta", type=int, default=1, help="move short component")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ndtour",
        description="Closed knight's tours on n-dimensional boards: "
        "classify, construct, verify, search.",
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("classify", help="decide tourability from the theorems")
    p.add_argument("dims", nargs="+", help="board dims, e.g. 6x6x6 or 6 6 6")
    _add_move_args(p)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("construct", help="build a verified closed tour")
    p.add_argument("dims", nargs="+")
    p.add_argument("-o", "--output", default=None, help="file (default stdout)")
    p.add_argument(
        "--format", choices=("json", "grid"), default="json",
        help="json document or visit-number grid (2D/3D only)",
    )
    p.set_defaults(func=_cmd_construct)

    p = sub.add_parser("verify", help="check a tour document")
    p.add_argument("file")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("sites", help="list the structural sites of a closed tour")
    p.add_argument("file")
    p.add_argument(
        "--disjoint", action="store_true",
        help="also report the first disjoint site pair",
    )
    p.set_defaults(func=_cmd_sites)

    p = sub.add_parser("solve", help="exhaustive/heuristic tour search")
    p.add_argument("dims", nargs="+")
    _add_move_args(p)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--closed", action="store_true", default=True,
                      help="search for a closed tour (default)")
    mode.add_argument("--open", action="store_true", default=False,
                      help="search for an open path instead")
    p.add_argument("--start", default=None, help="start cell, e.g. 1,1")
    p.add_argument("--end", default=None, help="end cell (open only)")
    p.add_argument("--require-edge", action="append", default=[],
                   metavar="U:V", help="edge that must appear (repeatable)")
    p.add_argument("--forbid-edge", action="append", default=[],
                   metavar="U:V", help="edge that must not appear (repeatable)")
    p.add_argument("--budget-ms", type=int, default=None)
    p.add_argument("--node-limit", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output", default=None, help="write found tour JSON")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("blocks", help="base-block library maintenance")
    bsub = p.add_subparsers(dest="blocks_cmd", required=True)
    pr = bsub.add_parser("regenerate", help="re-derive blocks into the cache")
    pr.add_argument("--only", action="append", default=[], metavar="NAME")
    pr.add_argument("--dest", default=None, help="target directory")
    bsub.add_parser("list", help="show the block catalogue")
    p.set_defaults(func=_cmd_blocks)

    p = sub.add_parser("bench", help="construction/verification throughput")
    p.add_argument("--max-cells", type=int, default=1_100_000)
    p.set_defaults(func=_cmd_bench)

    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
