"""Seeded subgraph-to-subgraph matching toolkit.

Find K vertices in each of two graphs and a bijection between them that
approximately minimizes adjacency disagreements, honoring known seed
correspondences.  Includes the Frank-Wolfe matcher, its exact generalized
assignment subroutine, a correlated random graph-pair simulator, exhaustive
oracles for tiny instances, and a benchmark harness.
"""

from .glap import PartialPermutation, pad_matrix, solve_glap
from .graph_model import (
    CorrelatedPairSpec,
    GraphPair,
    MatchabilityDiagnostics,
    diagnostics,
    match_ratio,
    sample_pair,
)
from .lap import Assignment, solve_lap
from .matcher import (
    MatchResult,
    SignedAdjacency,
    SolverOptions,
    SubstochasticMatrix,
    build_signed_adjacency,
    count_disagreements,
    gradient_step_matrix,
    line_search,
    objective,
    project_to_partial_permutation,
    ssgm,
)
from .oracle import (
    EnumerationBudgetError,
    RecoveryReport,
    brute_force_match,
    brute_force_pq,
    enumerate_partial_permutations,
    partial_permutation_count,
    verify_matchability,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "CorrelatedPairSpec",
    "EnumerationBudgetError",
    "GraphPair",
    "MatchResult",
    "MatchabilityDiagnostics",
    "PartialPermutation",
    "RecoveryReport",
    "SignedAdjacency",
    "SolverOptions",
    "SubstochasticMatrix",
    "brute_force_match",
    "brute_force_pq",
    "build_signed_adjacency",
    "count_disagreements",
    "diagnostics",
    "enumerate_partial_permutations",
    "gradient_step_matrix",
    "line_search",
    "match_ratio",
    "objective",
    "pad_matrix",
    "partial_permutation_count",
    "project_to_partial_permutation",
    "sample_pair",
    "solve_glap",
    "solve_lap",
    "ssgm",
    "verify_matchability",
]
