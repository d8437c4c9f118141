"""Tour serialization: versioned JSON documents and fixed-width grid text.

JSON is the canonical format (n-dimensional, lossless, versioned); the grid
rendering exists for eyeballing 2D and 3D tours and is presentation-only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .boards import BoardSpec, MoveParams
from .tours import Tour, canonical_form, verify

SCHEMA_VERSION = "tour/1"


@dataclass
class TourDocument:
    """On-disk form of a tour: board, mover, cycle, and free-form metadata."""

    dims: tuple[int, ...]
    alpha: int
    beta: int
    closed: bool
    cycle: list[list[int]]
    metadata: dict[str, Any] = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    @classmethod
    def from_tour(cls, t: Tour, metadata: Optional[dict[str, Any]] = None) -> "TourDocument":
        return cls(
            dims=t.board.dims,
            alpha=t.mp.alpha,
            beta=t.mp.beta,
            closed=t.closed,
            cycle=[[int(x) for x in row] for row in t.cells],
            metadata=dict(metadata or {}),
        )

    def to_tour(self) -> Tour:
        return Tour(
            BoardSpec(tuple(self.dims)),
            np.array(self.cycle, dtype=np.int32),
            closed=self.closed,
            mp=MoveParams(self.alpha, self.beta),
        )

    def to_obj(self) -> dict[str, Any]:
        return {
            "schema": self.schema_version,
            "dims": list(self.dims),
            "alpha": self.alpha,
            "beta": self.beta,
            "closed": self.closed,
            "cycle": self.cycle,
            "metadata": self.metadata,
        }

    @classmethod
    def from_obj(cls, obj: dict[str, Any]) -> "TourDocument":
        if not isinstance(obj, dict):
            raise ValueError("tour document must be a JSON object")
        schema = obj.get("schema")
        if schema != SCHEMA_VERSION:
            raise ValueError(
                f"unsupported tour schema {schema!r}; this build reads {SCHEMA_VERSION!r}"
            )
        missing = {"dims", "alpha", "beta", "closed", "cycle"} - obj.keys()
        if missing:
            raise ValueError(f"tour document missing fields: {sorted(missing)}")
        return cls(
            dims=tuple(int(x) for x in obj["dims"]),
            alpha=int(obj["alpha"]),
            beta=int(obj["beta"]),
            closed=bool(obj["closed"]),
            cycle=[[int(x) for x in row] for row in obj["cycle"]],
            metadata=dict(obj.get("metadata") or {}),
            schema_version=schema,
        )


def export_json(t: Tour, metadata: Optional[dict[str, Any]] = None) -> bytes:
    """Serialize a verified tour. Refuses tours that fail verification."""
    v = verify(t)
    if v is not None:
        raise ValueError(f"refusing to export an invalid tour: {v}")
    doc = TourDocument.from_tour(t, metadata)
    return json.dumps(doc.to_obj(), indent=1).encode("utf-8")


def import_json(data: bytes) -> Tour:
    """Parse and verify a tour document; invalid cycles are rejected."""
    try:
        obj = json.loads(data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data)
    except json.JSONDecodeError as exc:
        raise ValueError(f"not a tour document: {exc}") from exc
    doc = TourDocument.from_obj(obj)
    t = doc.to_tour()
    v = verify(t)
    if v is not None:
        raise ValueError(f"tour document failed verification: {v}")
    return t


def _grid_lines(cells: np.ndarray, dims: tuple[int, int], width: int) -> list[str]:
    n, m = dims
    grid = np.zeros((n, m), dtype=np.int64)
    for visit, (i, j) in enumerate(cells, start=1):
        grid[i - 1, j - 1] = visit
    return [
        " ".join(f"{grid[i, j]:>{width}d}" for j in range(m)) for i in range(n)
    ]


def export_grid(t: Tour) -> str:
    """Visit-number grid: rows are the first axis, one block per 3D layer."""
    v = verify(t)
    if v is not None:
        raise ValueError(f"refusing to render an invalid tour: {v}")
    k = t.board.k
    if k not in (2, 3):
        raise ValueError(
            f"grid rendering supports 2 or 3 dimensions, not {k}; use JSON export"
        )
    width = len(str(len(t)))
    if k == 2:
        return "\n".join(_grid_lines(t.cells, t.board.dims, width)) + "\n"
    n, m, p = t.board.dims
    blocks = []
    for z in range(1, p + 1):
        mask = t.cells[:, 2] == z
        order = np.flatnonzero(mask)
        layer = t.cells[order][:, :2]
        grid = np.zeros((n, m), dtype=np.int64)
        for visit, (i, j) in zip(order + 1, layer):
            grid[i - 1, j - 1] = visit
        lines = [
            " ".join(f"{grid[i, j]:>{width}d}" for j in range(m)) for i in range(n)
        ]
        blocks.append(f"layer {z}:\n" + "\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def tours_equal(a: Tour, b: Tour) -> bool:
    """Cycle equality up to rotation/reflection (canonical form comparison)."""
    if a.board.dims != b.board.dims or a.closed != b.closed:
        return False
    return np.array_equal(canonical_form(a).cells, canonical_form(b).cells)
