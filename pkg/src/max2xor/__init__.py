"""Weighted MaxSAT to Max2XOR compiler, certification oracles, and parity resolution."""

from .core import (
    Assignment,
    EvalResult,
    Max2XorError,
    OrClause,
    Rational,
    Var,
    X2XProblem,
    XorConstraint,
    clause,
    evaluate,
    flip_variable,
    normalize,
    substitute_constant,
    xor,
)
from .gadgets import (
    CompileReport,
    GadgetParams,
    ParityConstraint,
    TreeShape,
    VarAllocator,
    binary_gadget,
    chain_to_3sat,
    clause_params,
    compile_maxsat,
    compose_params,
    expand_full_parity,
    sequential_gadget,
    to_maxcut,
    tree_gadget,
    trevisan_3to2,
)
from .oracle import (
    GadgetVerdict,
    OracleResult,
    brute_opt_cost,
    brute_opt_cost_items,
    verify_gadget,
)
from .proofs import (
    BoundVerdict,
    CheckVerdict,
    ProofStep,
    ProofSummary,
    apply_compact_rule,
    apply_rule,
    bound_to_original,
    check_proof,
    find_odd_cycle,
    saturate,
)
from .textio import (
    CutGraph,
    WcnfInstance,
    emit_maxcut,
    emit_proof,
    emit_x2x,
    parse_cnf,
    parse_maxcut,
    parse_proof,
    parse_x2x,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "BoundVerdict",
    "CheckVerdict",
    "CompileReport",
    "CutGraph",
    "EvalResult",
    "GadgetParams",
    "GadgetVerdict",
    "Max2XorError",
    "OracleResult",
    "OrClause",
    "ParityConstraint",
    "ProofStep",
    "ProofSummary",
    "Rational",
    "TreeShape",
    "Var",
    "VarAllocator",
    "WcnfInstance",
    "X2XProblem",
    "XorConstraint",
    "apply_compact_rule",
    "apply_rule",
    "binary_gadget",
    "bound_to_original",
    "brute_opt_cost",
    "brute_opt_cost_items",
    "chain_to_3sat",
    "check_proof",
    "clause",
    "clause_params",
    "compile_maxsat",
    "compose_params",
    "emit_maxcut",
    "emit_proof",
    "emit_x2x",
    "evaluate",
    "expand_full_parity",
    "find_odd_cycle",
    "flip_variable",
    "normalize",
    "parse_cnf",
    "parse_maxcut",
    "parse_proof",
    "parse_x2x",
    "saturate",
    "sequential_gadget",
    "substitute_constant",
    "to_maxcut",
    "tree_gadget",
    "trevisan_3to2",
    "verify_gadget",
    "xor",
]
