"""ndtour: closed knight's tours on n-dimensional rectangular boards.

Decides tourability of ``n1 x ... x nk`` boards under generalized (alpha, beta)
knight moves, constructs verified closed tours by pattern-based dimension
lifting, and ships an exhaustive-search oracle used to derive and validate the
base blocks the construction is built from.
"""

from .boards import (
    BoardSpec,
    MoveParams,
    CLASSICAL,
    canonicalize,
    color,
    is_connected,
    is_edge,
    move_set,
    neighbors,
)
from .feasibility import (
    Verdict,
    Reason,
    Theorem,
    classify_2d,
    classify_3d,
    classify_nd,
    coprime_necessity,
    knuth_connectivity_2d,
    prune_checks,
)
from .tours import (
    Tour,
    Site,
    SiteKind,
    Violation,
    disjoint_site_pair,
    find_sites,
    first_disjoint_pair,
    flip_move,
    is_bisited,
    select_disjoint_sites,
    verify,
)
from .solver import SearchBudget, SearchConstraints, SolveOutcome, solve
from .construct import (
    ConstructionError,
    EndpointError,
    MissingSitesError,
    NoExtenderError,
    NotGluableError,
    NotSeededError,
    NotTourableError,
    build_extender,
    construct_2d,
    construct_3d,
    construct_nd,
    d_sequence,
    extend_seeded,
    glue,
    is_seeded,
    lift,
    lift_generalized,
    permute_tour,
    seed_edges_2d,
    stack_open_pair,
)
from .blocks import (
    BLOCK_SPECS,
    BlockDerivationError,
    BlockNotFoundError,
    BlockSpec,
    derive_block,
    load_block,
    regenerate,
)
from .tourio import export_grid, export_json, import_json

__version__ = "0.1.0"

__all__ = [
    "BoardSpec",
    "MoveParams",
    "CLASSICAL",
    "move_set",
    "is_edge",
    "neighbors",
    "color",
    "is_connected",
    "canonicalize",
    "Verdict",
    "Reason",
    "Theorem",
    "classify_2d",
    "classify_3d",
    "classify_nd",
    "knuth_connectivity_2d",
    "coprime_necessity",
    "prune_checks",
    "Tour",
    "Site",
    "SiteKind",
    "Violation",
    "verify",
    "flip_move",
    "find_sites",
    "disjoint_site_pair",
    "first_disjoint_pair",
    "is_bisited",
    "select_disjoint_sites",
    "SearchBudget",
    "SearchConstraints",
    "SolveOutcome",
    "solve",
    "NotTourableError",
    "ConstructionError",
    "MissingSitesError",
    "NotGluableError",
    "NoExtenderError",
    "NotSeededError",
    "EndpointError",
    "lift",
    "lift_generalized",
    "d_sequence",
    "glue",
    "build_extender",
    "extend_seeded",
    "is_seeded",
    "seed_edges_2d",
    "construct_2d",
    "construct_3d",
    "construct_nd",
    "stack_open_pair",
    "permute_tour",
    "BLOCK_SPECS",
    "BlockSpec",
    "BlockDerivationError",
    "BlockNotFoundError",
    "derive_block",
    "load_block",
    "regenerate",
    "export_json",
    "import_json",
    "export_grid",
    "__version__",
]
