"""JSON and grid serialization: round trips, tampering, rendering."""

from __future__ import annotations

import json

import numpy as np
import pytest

from ndtour.boards import BoardSpec, MoveParams
from ndtour.tourio import (
    SCHEMA_VERSION,
    TourDocument,
    export_grid,
    export_json,
    import_json,
    tours_equal,
)
from ndtour.tours import Tour, canonical_form


def test_json_round_trip(tour_6x6):
    data = export_json(tour_6x6)
    back = import_json(data)
    assert tours_equal(back, tour_6x6)
    assert back.board.dims == (6, 6)
    assert back.mp == tour_6x6.mp
    assert back.closed


def test_json_round_trip_generalized(tour_10x10_32):
    back = import_json(export_json(tour_10x10_32))
    assert tours_equal(back, tour_10x10_32)
    assert back.mp == MoveParams(3, 2)


def test_metadata_survives_round_trip(tour_6x6):
    meta = {"origin": "unit test", "attempt": 3}
    data = export_json(tour_6x6, metadata=meta)
    doc = TourDocument.from_obj(json.loads(data))
    assert doc.metadata == meta


def test_document_fields(tour_6x6):
    obj = json.loads(export_json(tour_6x6))
    assert obj["schema"] == SCHEMA_VERSION == "tour/1"
    assert obj["dims"] == [6, 6]
    assert obj["alpha"] == 2 and obj["beta"] == 1
    assert obj["closed"] is True
    assert len(obj["cycle"]) == 36
    assert all(len(c) == 2 for c in obj["cycle"])


def test_export_refuses_invalid_tour():
    # a teleporting "tour": constructor accepts it, verification must not
    cells = [(1, 1), (4, 4), (2, 2), (3, 3)]
    t = Tour(BoardSpec((4, 4)), cells, closed=True)
    with pytest.raises(ValueError, match="invalid tour"):
        export_json(t)


def test_import_rejects_truncated_file(tour_6x6):
    data = export_json(tour_6x6)
    with pytest.raises(ValueError, match="not a tour document"):
        import_json(data[: len(data) // 2])


def test_import_rejects_duplicate_cell(tour_6x6):
    obj = json.loads(export_json(tour_6x6))
    obj["cycle"][5] = obj["cycle"][0]  # revisit: no longer a permutation
    with pytest.raises(ValueError, match="verification"):
        import_json(json.dumps(obj).encode())


def test_import_rejects_broken_step(tour_6x6):
    obj = json.loads(export_json(tour_6x6))
    # swap two interior visits: coverage still fine, some step is no move
    obj["cycle"][7], obj["cycle"][20] = obj["cycle"][20], obj["cycle"][7]
    with pytest.raises(ValueError, match="verification"):
        import_json(json.dumps(obj).encode())


def test_import_rejects_unknown_schema(tour_6x6):
    obj = json.loads(export_json(tour_6x6))
    obj["schema"] = "tour/999"
    with pytest.raises(ValueError, match="schema"):
        import_json(json.dumps(obj).encode())


def test_import_rejects_missing_field(tour_6x6):
    obj = json.loads(export_json(tour_6x6))
    del obj["cycle"]
    with pytest.raises(ValueError):
        import_json(json.dumps(obj).encode())


def test_grid_2d_is_visit_permutation(tour_6x6):
    text = export_grid(tour_6x6)
    rows = [line.split() for line in text.strip().splitlines()]
    assert len(rows) == 6 and all(len(r) == 6 for r in rows)
    numbers = sorted(int(x) for row in rows for x in row)
    assert numbers == list(range(1, 37))
    # visit number at (i, j) is the 1-based position of (i, j) in the cycle
    cells = [tuple(map(int, c)) for c in tour_6x6.cells]
    for i, row in enumerate(rows, start=1):
        for j, val in enumerate(row, start=1):
            assert cells[int(val) - 1] == (i, j)


def test_grid_3d_layers():
    from ndtour.construct import construct_3d

    t = construct_3d(4, 3, 2)
    text = export_grid(t)
    blocks = text.strip().split("\n\n")
    assert len(blocks) == 2
    assert blocks[0].startswith("layer 1:")
    assert blocks[1].startswith("layer 2:")
    numbers = []
    for block in blocks:
        lines = block.splitlines()[1:]
        assert len(lines) == 4 and all(len(l.split()) == 3 for l in lines)
        numbers += [int(x) for l in lines for x in l.split()]
    assert sorted(numbers) == list(range(1, 25))


def test_grid_rejects_higher_dimensions():
    from ndtour.construct import construct_nd

    t = construct_nd((2, 3, 4, 5))
    with pytest.raises(ValueError, match="JSON"):
        export_grid(t)


def test_grid_stable_across_json_round_trip(tour_6x6):
    back = import_json(export_json(tour_6x6))
    assert export_grid(back) == export_grid(tour_6x6)


def test_tours_equal_rotation_and_reflection(tour_6x6):
    cells = tour_6x6.cells
    rolled = Tour(tour_6x6.board, np.roll(cells, 7, axis=0), closed=True)
    reflected = Tour(tour_6x6.board, cells[::-1], closed=True)
    assert tours_equal(rolled, tour_6x6)
    assert tours_equal(reflected, tour_6x6)
    assert np.array_equal(
        canonical_form(rolled).cells, canonical_form(tour_6x6).cells
    )


def test_tours_equal_distinguishes_boards(tour_6x6):
    from ndtour.construct import construct_2d

    other = construct_2d(6, 8)
    assert not tours_equal(other, tour_6x6)
