"""Separator-based single-source shortest paths for sparse directed graphs
with negative integer weights, plus the checkable building blocks: vertex
separators, edge-partition divisions, delta-system APSP merging, boundary
skeletons, and classic SSSP engines.
"""

from .errors import (
    BudgetUnmet,
    DimacsError,
    GenerationError,
    InvalidDeltaError,
    NegativeCycleError,
    NegativeEdgeError,
    OverflowGuardError,
    SepshortError,
    UnreachableError,
)
from .graph import (
    INF,
    DiGraph,
    VertexWeighting,
    gen_grid,
    gen_sparse,
    load_dimacs,
    parse_generator_spec,
    save_dimacs,
    underlying_undirected,
)

__all__ = [
    "INF",
    "DiGraph",
    "VertexWeighting",
    "gen_grid",
    "gen_sparse",
    "load_dimacs",
    "parse_generator_spec",
    "save_dimacs",
    "underlying_undirected",
    "SepshortError",
    "DimacsError",
    "GenerationError",
    "OverflowGuardError",
    "BudgetUnmet",
    "NegativeCycleError",
    "NegativeEdgeError",
    "UnreachableError",
    "InvalidDeltaError",
]

__version__ = "0.1.0"
