"""Solver toolkit for the enhanced double digest restriction-mapping problem."""

from .digestgraph import (
    DigestGraph,
    NodeRef,
    StructureVerdict,
    StructureViolation,
    build_graph,
    check_structure,
    export_edges,
)
from .generator import CutModel, InfeasibleParams, instance_from_cuts, random_instance
from .instance import (
    AssignmentCapExceeded,
    ConsistencyReport,
    EddInstance,
    LabeledInstance,
    LabeledLength,
    ParseError,
    count_assignments,
    label_duplicates,
    parse_instance,
    serialize_instance,
    validate_consistency,
)
from .reduction import (
    AugmentedGraph,
    MalformedSolution,
    SimpleGraph,
    augment,
    extract_path,
    has_hamiltonian_path,
    parse_graph,
    reduce_graph,
    serialize_graph,
)
from .solver import (
    Block,
    CPermutation,
    FamilyExpansion,
    Fixed,
    NoSolution,
    NotConsecutiveError,
    Solution,
    SolutionFamily,
    SolveResult,
    canonical_key,
    canonicalize_solution,
    dangler_first_search,
    expand_family,
    induced_permutation,
    mirror_solution,
    solve,
    solve_labeled,
)
from .verifier import (
    CoincidentCut,
    Layout,
    LayoutPiece,
    OracleCapExceeded,
    SumMismatch,
    VerifyResult,
    brute_force_solve,
    layout,
    verify_permutation,
)

__all__ = [
    "AssignmentCapExceeded",
    "AugmentedGraph",
    "Block",
    "CPermutation",
    "CoincidentCut",
    "ConsistencyReport",
    "CutModel",
    "DigestGraph",
    "EddInstance",
    "FamilyExpansion",
    "Fixed",
    "InfeasibleParams",
    "LabeledInstance",
    "LabeledLength",
    "Layout",
    "LayoutPiece",
    "MalformedSolution",
    "NoSolution",
    "NodeRef",
    "NotConsecutiveError",
    "OracleCapExceeded",
    "ParseError",
    "SimpleGraph",
    "Solution",
    "SolutionFamily",
    "SolveResult",
    "StructureVerdict",
    "StructureViolation",
    "SumMismatch",
    "VerifyResult",
    "augment",
    "brute_force_solve",
    "build_graph",
    "canonical_key",
    "canonicalize_solution",
    "check_structure",
    "count_assignments",
    "dangler_first_search",
    "expand_family",
    "export_edges",
    "extract_path",
    "has_hamiltonian_path",
    "induced_permutation",
    "instance_from_cuts",
    "label_duplicates",
    "layout",
    "mirror_solution",
    "parse_graph",
    "parse_instance",
    "random_instance",
    "reduce_graph",
    "serialize_graph",
    "serialize_instance",
    "solve",
    "solve_labeled",
    "validate_consistency",
    "verify_permutation",
]
