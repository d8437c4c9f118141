"""Base-block library: small oracle-derived tours the constructors start from.

Every block is a tour on one specific small board, pinned down by search
constraints (required edges, fixed endpoints) plus a post-condition
(bi-sitedness, site inventory) that plain constraints cannot express.  Blocks
are derived once by the solver, written to JSON with their derivation
recipe recorded, and loaded read-only afterwards.

Lookup order: the cache directory (``NDTOUR_BLOCK_CACHE`` env var, falling
back to ``./ndtour-blocks``), then the copies shipped inside the package.
``regenerate`` is the only writer.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterator, Optional, Sequence

from . import tourio
from .boards import BoardSpec, CLASSICAL, MoveParams
from .solver import SearchBudget, SearchConstraints, SolveStatus, solve
from .tours import Tour, find_sites, first_disjoint_pair, select_disjoint_sites

ENV_CACHE_DIR = "NDTOUR_BLOCK_CACHE"
MANIFEST_NAME = "MANIFEST.json"
MANIFEST_SCHEMA = "blocks/1"

# per-derivation-attempt search budget; every block is far smaller than this
_ATTEMPT_NODES = 4_000_000
_MAX_SEED_TRIES = 64


class BlockDerivationError(RuntimeError):
    """A block's constrained search or post-condition could not be satisfied."""


class BlockNotFoundError(KeyError):
    """No cached or packaged copy of the requested block exists."""


def seed_edges(n: int, m: int) -> tuple[tuple, tuple]:
    """The two seed edges of an n x m seeded tour.

    Both are legal knight moves for any n, m >= 3 (and n = 4 extenders).
    """
    return (((1, m - 2), (2, m)), ((n - 2, 1), (n, 2)))


@dataclass(frozen=True)
class BlockSpec:
    """Derivation recipe: board, constraints, and post-condition tag."""

    name: str
    dims: tuple[int, ...]
    mp: MoveParams = CLASSICAL
    closed: bool = True
    start: Optional[tuple[int, ...]] = None
    end: Optional[tuple[int, ...]] = None
    required_edges: tuple = ()
    check: str = "bisited"  # bisited | stacked-bisited | site-inventory | none
    role: str = ""


def _seeded_base(n: int, m: int) -> BlockSpec:
    return BlockSpec(
        name=f"seeded-{n}x{m}",
        dims=(n, m),
        required_edges=seed_edges(n, m),
        check="bisited",
        role="closed seeded base for 2-D residue construction",
    )


def _extender_base(m: int) -> BlockSpec:
    return BlockSpec(
        name=f"extender-4x{m}",
        dims=(4, m),
        closed=False,
        start=(4, m),
        end=(4, m - 1),
        required_edges=seed_edges(4, m),
        check="none",
        role="open seeded extender base (+4-row splices)",
    )


def _stack_base(n: int, m: int) -> BlockSpec:
    return BlockSpec(
        name=f"stack-{n}x{m}",
        dims=(n, m),
        closed=False,
        start=(n, m),
        end=(n, m - 2),
        required_edges=seed_edges(n, m),
        check="stacked-bisited",
        role="open seeded base for stacking odd x odd x 2 tours",
    )


def _piece_3d(a: int, b: int, c: int) -> BlockSpec:
    return BlockSpec(
        name=f"block-{a}x{b}x{c}",
        dims=(a, b, c),
        check="bisited",
        role="3-D glue piece",
    )


def _block_spec_list() -> list[BlockSpec]:
    specs: list[BlockSpec] = []
    for n, m in [
        (3, 10), (3, 12), (5, 6), (5, 8), (6, 6), (6, 7), (6, 8), (7, 8), (8, 8)
    ]:
        specs.append(_seeded_base(n, m))
    for m in (3, 5, 7):
        specs.append(_extender_base(m))
    for n, m in [(5, 5), (5, 7), (7, 7)]:
        specs.append(_stack_base(n, m))
    for dims in [
        (2, 3, 4), (2, 3, 5), (2, 3, 6), (2, 3, 7),
        (2, 4, 4), (2, 4, 5), (3, 3, 4), (3, 3, 6), (3, 4, 4),
    ]:
        specs.append(_piece_3d(*dims))
    specs.append(
        BlockSpec(
            name="gen-10x10-a3b2",
            dims=(10, 10),
            mp=MoveParams(3, 2),
            check="site-inventory",
            role="(3,2) base carrying two alpha- and two beta-sites, "
            "pairwise disjoint",
        )
    )
    return specs


BLOCK_SPECS: dict[str, BlockSpec] = {s.name: s for s in _block_spec_list()}


def list_blocks() -> list[str]:
    return list(BLOCK_SPECS)


# ---------------------------------------------------------------------------
# post-conditions
# ---------------------------------------------------------------------------

def check_block(spec: BlockSpec, t: Tour) -> bool:
    """Whether a candidate tour satisfies the spec's post-condition."""
    if spec.check == "none":
        return True
    if spec.check == "bisited":
        return first_disjoint_pair(t, magnitude=t.mp.alpha) is not None
    if spec.check == "stacked-bisited":
        from .construct import stack_open_pair

        stacked = stack_open_pair(t)
        return first_disjoint_pair(stacked, magnitude=t.mp.alpha) is not None
    if spec.check == "site-inventory":
        want = [t.mp.alpha, t.mp.alpha, t.mp.beta, t.mp.beta]
        return select_disjoint_sites(find_sites(t), want) is not None
    raise ValueError(f"unknown check tag {spec.check!r}")


# ---------------------------------------------------------------------------
# derivation
# ---------------------------------------------------------------------------

def derive_block(
    spec: BlockSpec, *, max_seed_tries: int = _MAX_SEED_TRIES
) -> tuple[Tour, int]:
    """Search for a tour satisfying the spec; returns (tour, seed used).

    Seeds are tried in order, so derivation is deterministic.  A proved-none
    outcome aborts immediately (the constraints are unsatisfiable); budget
    exhaustion or a failed post-condition moves on to the next seed.
    """
    constraints = SearchConstraints(
        required_edges=spec.required_edges,
        start=spec.start,
        end=spec.end,
        closed=spec.closed,
    )
    b = BoardSpec(spec.dims)
    for seed in range(max_seed_tries):
        out = solve(
            b,
            spec.mp,
            constraints,
            SearchBudget(node_limit=_ATTEMPT_NODES, seed=seed),
        )
        if out.status is SolveStatus.ProvedNone:
            raise BlockDerivationError(
                f"{spec.name}: constraints admit no tour ({out.note or 'search exhausted'})"
            )
        if out.tour is None:
            continue
        if check_block(spec, out.tour):
            return out.tour, seed
    raise BlockDerivationError(
        f"{spec.name}: no derived tour passed check {spec.check!r} "
        f"in {max_seed_tries} seeds"
    )


# ---------------------------------------------------------------------------
# storage
# ---------------------------------------------------------------------------

def cache_dir() -> Path:
    env = os.environ.get(ENV_CACHE_DIR)
    return Path(env) if env else Path.cwd() / "ndtour-blocks"


def _packaged_dir():
    return resources.files("ndtour") / "data" / "blocks"


def _block_metadata(spec: BlockSpec, seed: int) -> dict:
    meta = {
        "generator": "ndtour blocks regenerate",
        "block": spec.name,
        "role": spec.role,
        "check": spec.check,
        "seed": seed,
        "constraints": {
            "required_edges": [[list(u), list(v)] for u, v in spec.required_edges],
            "start": list(spec.start) if spec.start else None,
            "end": list(spec.end) if spec.end else None,
            "closed": spec.closed,
        },
    }
    return meta


def regenerate(
    only: Optional[str | Sequence[str]] = None, dest: Optional[Path] = None
) -> Iterator[tuple[str, Path, int]]:
    """Derive blocks and write them (plus the manifest) to the cache.

    Yields (name, file path, seed) per block as it completes, so callers can
    stream progress.  With ``only`` (a name or list of names), just those
    blocks are rebuilt and their manifest entries updated in place.
    """
    dest = Path(dest) if dest is not None else cache_dir()
    dest.mkdir(parents=True, exist_ok=True)
    manifest_path = dest / MANIFEST_NAME
    manifest = {"schema": MANIFEST_SCHEMA, "blocks": {}}
    if only is not None and manifest_path.exists():
        try:
            old = json.loads(manifest_path.read_text())
            if old.get("schema") == MANIFEST_SCHEMA:
                manifest = old
        except (OSError, json.JSONDecodeError):
            pass

    if only is None:
        names = list(BLOCK_SPECS)
    elif isinstance(only, str):
        names = [only]
    else:
        names = list(only)
    for name in names:
        if name not in BLOCK_SPECS:
            raise BlockNotFoundError(name)
        spec = BLOCK_SPECS[name]
        tour, seed = derive_block(spec)
        payload = tourio.export_json(tour, metadata=_block_metadata(spec, seed))
        path = dest / f"{name}.json"
        path.write_bytes(payload)
        manifest["blocks"][name] = {
            "file": path.name,
            "dims": list(spec.dims),
            "alpha": spec.mp.alpha,
            "beta": spec.mp.beta,
            "closed": spec.closed,
            "check": spec.check,
            "seed": seed,
            "cells": len(tour),
        }
        manifest_path.write_text(json.dumps(manifest, indent=1, sort_keys=True))
        yield name, path, seed


# in-process cache of loaded blocks, keyed by the file they came from
_loaded: dict[str, Tour] = {}


def load_block(name: str) -> Tour:
    """Load a block by name, preferring the cache dir over packaged data."""
    if name not in BLOCK_SPECS:
        raise BlockNotFoundError(name)
    fname = f"{name}.json"
    cached = cache_dir() / fname
    if cached.exists():
        key = str(cached.resolve())
        if key not in _loaded:
            _loaded[key] = tourio.import_json(cached.read_bytes())
        return _loaded[key]
    packaged = _packaged_dir() / fname
    if packaged.is_file():
        key = f"pkg:{fname}"
        if key not in _loaded:
            _loaded[key] = tourio.import_json(packaged.read_bytes())
        return _loaded[key]
    raise BlockNotFoundError(
        f"{name}: not in {cache_dir()} nor in packaged data; "
        f"run `ndtour blocks regenerate`"
    )
