"""Block library: catalogue, derivation, packaged data, cache precedence."""

from __future__ import annotations

import json

import pytest

from ndtour.blocks import (
    BLOCK_SPECS,
    MANIFEST_SCHEMA,
    BlockDerivationError,
    BlockNotFoundError,
    BlockSpec,
    check_block,
    derive_block,
    list_blocks,
    load_block,
    regenerate,
    seed_edges,
)
from ndtour.boards import BoardSpec, MoveParams
from ndtour.construct import is_seeded
from ndtour.tours import find_sites, first_disjoint_pair, verify
from conftest import edge_set


EXPECTED_NAMES = {
    # closed seeded 2-D bases, one per residue class the construction needs
    "seeded-3x10", "seeded-3x12", "seeded-5x6", "seeded-5x8", "seeded-6x6",
    "seeded-6x7", "seeded-6x8", "seeded-7x8", "seeded-8x8",
    # open 4-row extension strips
    "extender-4x3", "extender-4x5", "extender-4x7",
    # open odd-by-odd halves for two-layer stacking
    "stack-5x5", "stack-5x7", "stack-7x7",
    # closed 3-D pieces for face lifting and gluing
    "block-2x3x4", "block-2x3x5", "block-2x3x6", "block-2x3x7",
    "block-2x4x4", "block-2x4x5", "block-3x3x4", "block-3x3x6",
    "block-3x4x4",
    # the one non-classical base
    "gen-10x10-a3b2",
}


def test_catalogue_names_and_count():
    assert set(BLOCK_SPECS) == EXPECTED_NAMES
    assert len(BLOCK_SPECS) == 25
    assert list_blocks() == list(BLOCK_SPECS)  # catalogue order, grouped by role


def test_catalogue_shapes():
    for name, spec in BLOCK_SPECS.items():
        assert spec.name == name
        assert name.split("-")[1].startswith(
            "x".join(str(d) for d in spec.dims)
        ) or name == "gen-10x10-a3b2"
    gen = BLOCK_SPECS["gen-10x10-a3b2"]
    assert gen.mp == MoveParams(3, 2)
    assert all(
        s.mp == MoveParams(2, 1) for n, s in BLOCK_SPECS.items() if n != gen.name
    )


@pytest.mark.parametrize("name", sorted(EXPECTED_NAMES))
def test_packaged_block_is_valid(name):
    """Every shipped block re-verifies and satisfies its spec's post-check."""
    spec = BLOCK_SPECS[name]
    t = load_block(name)
    assert t.board.dims == spec.dims
    assert t.mp == spec.mp
    assert t.closed == spec.closed
    assert verify(t) is None
    assert check_block(spec, t)
    for u, v in spec.required_edges:
        assert frozenset((u, v)) in edge_set(t)
    if spec.start is not None:
        assert tuple(int(x) for x in t.cells[0]) == spec.start
    if spec.end is not None:
        assert tuple(int(x) for x in t.cells[-1]) == spec.end


def test_seeded_blocks_carry_both_seed_edges():
    for name in EXPECTED_NAMES:
        if name.startswith("seeded-"):
            t = load_block(name)
            assert is_seeded(t)
            n, m = t.board.dims
            e1, e2 = seed_edges(n, m)
            edges = edge_set(t)
            assert frozenset(e1) in edges and frozenset(e2) in edges


def test_extender_blocks_are_open_strips():
    for m in (3, 5, 7):
        t = load_block(f"extender-4x{m}")
        assert not t.closed
        assert tuple(int(x) for x in t.cells[0]) == (4, m)
        assert tuple(int(x) for x in t.cells[-1]) == (4, m - 1)


def test_stack_blocks_stack_into_bisited_pairs():
    from ndtour.construct import stack_open_pair

    for name in ("stack-5x5", "stack-5x7", "stack-7x7"):
        t = load_block(name)
        assert not t.closed
        stacked = stack_open_pair(t)
        assert verify(stacked) is None
        assert first_disjoint_pair(stacked, magnitude=2) is not None


def test_gen_block_site_inventory():
    t = load_block("gen-10x10-a3b2")
    sites = find_sites(t)
    mags = sorted(s.magnitude for s in sites)
    assert 3 in mags and 2 in mags
    # enough structure for the generalized lift: two disjoint pairs per move arm
    from ndtour.construct import lift_generalized

    lifted = lift_generalized(t, 4)
    assert verify(lifted) is None


def test_load_block_unknown_name():
    with pytest.raises(BlockNotFoundError, match="no-such-block"):
        load_block("no-such-block")


def test_derive_block_respects_constraints():
    spec = BLOCK_SPECS["extender-4x3"]
    t, seed = derive_block(spec)
    assert verify(t) is None
    assert not t.closed
    assert isinstance(seed, int)
    for u, v in spec.required_edges:
        assert frozenset((u, v)) in edge_set(t)


def test_derive_block_fails_fast_on_impossible_board():
    impossible = BlockSpec(name="bogus", dims=(3, 4), check="none")
    with pytest.raises(BlockDerivationError):
        derive_block(impossible)


def test_packaged_manifest_matches_catalogue():
    from importlib import resources

    raw = (resources.files("ndtour") / "data" / "blocks" / "MANIFEST.json").read_text()
    manifest = json.loads(raw)
    assert manifest["schema"] == MANIFEST_SCHEMA == "blocks/1"
    assert set(manifest["blocks"]) == EXPECTED_NAMES
    for name, entry in manifest["blocks"].items():
        spec = BLOCK_SPECS[name]
        assert tuple(entry["dims"]) == spec.dims
        assert (entry["alpha"], entry["beta"]) == (spec.mp.alpha, spec.mp.beta)
        assert entry["closed"] == spec.closed
        assert entry["check"] == spec.check
        assert entry["cells"] >= 12
        assert entry["file"] == f"{name}.json"


def test_cache_dir_takes_precedence(tmp_path, monkeypatch):
    """A block in the cache dir shadows the packaged copy of the same name."""
    import ndtour.blocks as blocks_mod

    monkeypatch.setenv("NDTOUR_BLOCK_CACHE", str(tmp_path))
    monkeypatch.setattr(blocks_mod, "_loaded", {})
    packaged = load_block("extender-4x3")  # cache dir empty: packaged copy

    results = list(regenerate(only="extender-4x3"))
    assert len(results) == 1
    name, path, seed = results[0]
    assert name == "extender-4x3"
    assert path.parent == tmp_path
    assert path.exists()

    monkeypatch.setattr(blocks_mod, "_loaded", {})
    cached = load_block("extender-4x3")
    assert verify(cached) is None
    assert cached.board.dims == packaged.board.dims
    manifest = json.loads((tmp_path / "MANIFEST.json").read_text())
    assert manifest["blocks"]["extender-4x3"]["seed"] == seed


def test_regenerate_subset_updates_manifest_in_place(tmp_path):
    list(regenerate(only=["extender-4x3"], dest=tmp_path))
    list(regenerate(only=["extender-4x5"], dest=tmp_path))
    manifest = json.loads((tmp_path / "MANIFEST.json").read_text())
    assert set(manifest["blocks"]) == {"extender-4x3", "extender-4x5"}


def test_regenerate_unknown_name(tmp_path):
    with pytest.raises(BlockNotFoundError):
        list(regenerate(only="not-a-block", dest=tmp_path))


def test_regenerated_block_round_trips_through_files(tmp_path):
    from ndtour import tourio

    list(regenerate(only="extender-4x3", dest=tmp_path))
    data = (tmp_path / "extender-4x3.json").read_bytes()
    t = tourio.import_json(data)
    assert t.board.dims == (4, 3)
    doc_meta = json.loads(data)["metadata"]
    assert doc_meta["block"] == "extender-4x3"
    assert "seed" in doc_meta
