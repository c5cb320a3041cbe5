"""Exhaustive ground-truth engines.

Two oracles: exact optimum / cost of a weighted constraint multiset by full
assignment enumeration, and certification of claimed translation parameters
per the (alpha, beta) definition by exhaustive search over auxiliary-variable
extensions.

Enumeration is vectorized with numpy over *scaled integers* (weights are
multiplied by the lcm of their denominators), so every comparison is exact.
If the scaled totals would not fit in int64 the same code runs on
arbitrary-precision Python ints via an object-dtype array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import (
    OrClause,
    SizeGuardError,
    X2XProblem,
    ZERO,
)

MAX_ORACLE_VARS = 26
_CHUNK_BITS = 20

WeightedItem = Tuple[object, Fraction]  # (constraint, weight)


@dataclass
class OracleResult:
    opt: Fraction
    cost: Fraction
    opt_witness: Dict[int, int]
    cost_witness: Dict[int, int]


@dataclass
class GadgetVerdict:
    certified: bool
    alpha: Fraction
    beta: Fraction
    counterexample: Optional[Tuple[Dict[int, int], Fraction]] = None
    reason: Optional[str] = None


def _item_vars(item) -> Tuple[int, ...]:
    if isinstance(item, OrClause):
        return item.variables()
    return tuple(item.vars)


def _collect_vars(items: Sequence[WeightedItem]) -> List[int]:
    seen = set()
    for constraint, _ in items:
        seen.update(_item_vars(constraint))
    return sorted(seen)


def _scale_factor(weights: Sequence[Fraction]) -> int:
    scale = 1
    for w in weights:
        scale = scale // math.gcd(scale, w.denominator) * w.denominator
    return scale


def _bit_columns(indices: np.ndarray, positions: Dict[int, int], nvars: int):
    """Value of each variable for each assignment index.

    Assignment index i encodes the lexicographic tuple of values in variable
    order: the first variable is the most significant bit, so ascending index
    order is ascending lexicographic order.
    """

    def column(var: int) -> np.ndarray:
        shift = nvars - 1 - positions[var]
        return ((indices >> shift) & 1).astype(indices.dtype)

    return column


def _unsat_values(
    items: Sequence[WeightedItem],
    scaled: Sequence[int],
    indices: np.ndarray,
    positions: Dict[int, int],
    nvars: int,
) -> np.ndarray:
    col = _bit_columns(indices, positions, nvars)
    acc = np.zeros(indices.shape, dtype=indices.dtype)
    for (constraint, _), w in zip(items, scaled):
        if isinstance(constraint, OrClause):
            if not constraint.lits:
                acc += w
                continue
            falsified = np.ones(indices.shape, dtype=indices.dtype)
            for lit in constraint.lits:
                bit = col(abs(lit))
                falsified &= bit ^ 1 if lit > 0 else bit
            acc += w * falsified
        else:
            if not constraint.vars:
                if constraint.parity == 1:
                    acc += w
                continue
            par = col(constraint.vars[0])
            for v in constraint.vars[1:]:
                par = par ^ col(v)
            acc += w * (par ^ constraint.parity)
    return acc


def _index_to_assignment(index: int, order: Sequence[int]) -> Dict[int, int]:
    n = len(order)
    return {v: (index >> (n - 1 - j)) & 1 for j, v in enumerate(order)}


def _dtype_for(total_scaled: int):
    return np.int64 if total_scaled < 2**62 else object


def brute_opt_cost_items(
    items: Sequence[WeightedItem],
    floor: Fraction = ZERO,
    max_vars: int = MAX_ORACLE_VARS,
) -> OracleResult:
    """Exact optimum and cost of a weighted constraint multiset.

    Enumerates every assignment of the occurring variables in lexicographic
    order; witnesses are the lexicographically least optimizers.  The maximum
    satisfied weight and the minimum unsatisfied weight are attained by the
    same assignment, so the two witnesses coincide.
    """
    order = _collect_vars(items)
    n = len(order)
    if n > max_vars:
        raise SizeGuardError(f"{n} variables exceed the enumeration guard of {max_vars}")
    floor = Fraction(floor)
    weights = [Fraction(w) for _, w in items]
    total_weight = sum(weights, ZERO)
    if n == 0:
        unsat = sum((w for (c, _), w in zip(items, weights) if not _constant_satisfied(c)), ZERO)
        return OracleResult(total_weight - unsat, floor + unsat, {}, {})

    scale = _scale_factor(weights)
    scaled = [int(w * scale) for w in weights]
    dtype = _dtype_for(sum(scaled) + 1)
    positions = {v: j for j, v in enumerate(order)}

    best_unsat: Optional[int] = None
    best_index = 0
    for start in range(0, 1 << n, 1 << _CHUNK_BITS):
        stop = min(start + (1 << _CHUNK_BITS), 1 << n)
        indices = np.arange(start, stop, dtype=np.int64)
        if dtype is object:
            indices = indices.astype(object)
        unsat = _unsat_values(items, scaled, indices, positions, n)
        j = int(np.argmin(unsat))
        value = int(unsat[j])
        if best_unsat is None or value < best_unsat:
            best_unsat = value
            best_index = start + j

    min_unsat = Fraction(best_unsat, scale)
    witness = _index_to_assignment(best_index, order)
    return OracleResult(
        opt=total_weight - min_unsat,
        cost=floor + min_unsat,
        opt_witness=dict(witness),
        cost_witness=dict(witness),
    )


def _constant_satisfied(constraint) -> bool:
    if isinstance(constraint, OrClause):
        return bool(constraint.lits)  # only the empty clause is variable-free
    return constraint.parity == 0


def unsat_weight_profile(
    items: Sequence[WeightedItem],
    var_order: Sequence[int],
    floor: Fraction = ZERO,
    max_vars: int = MAX_ORACLE_VARS,
) -> List[Fraction]:
    """Exact unsatisfied weight for every assignment of ``var_order``.

    Index i encodes the assignment whose bits, most significant first, are
    the values of the variables in order.  Useful for pointwise comparisons
    between a raw multiset and a rewritten form of it.
    """
    order = list(var_order)
    n = len(order)
    if n > max_vars:
        raise SizeGuardError(f"{n} variables exceed the enumeration guard of {max_vars}")
    for constraint, _ in items:
        if any(v not in set(order) for v in _item_vars(constraint)):
            raise SizeGuardError("var_order must cover every variable of the items")
    floor = Fraction(floor)
    weights = [Fraction(w) for _, w in items]
    scale = _scale_factor(weights + [floor])
    scaled = [int(w * scale) for w in weights]
    dtype = _dtype_for(sum(scaled) + int(floor * scale) + 1)
    positions = {v: j for j, v in enumerate(order)}
    indices = np.arange(1 << n, dtype=np.int64)
    if dtype is object:
        indices = indices.astype(object)
    unsat = _unsat_values(items, scaled, indices, positions, n)
    base = int(floor * scale)
    return [Fraction(int(value) + base, scale) for value in unsat]


def brute_opt_cost(problem: X2XProblem, max_vars: int = MAX_ORACLE_VARS) -> OracleResult:
    return brute_opt_cost_items(problem.sorted_entries(), floor=problem.floor, max_vars=max_vars)


def _satisfied_matrix_term(
    constraint,
    w: int,
    src_col,
    aux_col,
    src_shape: Tuple[int, ...],
    aux_shape: Tuple[int, ...],
    src_vars: set,
):
    """Weighted satisfaction of one constraint as an outer (source x aux) term."""
    if isinstance(constraint, OrClause):
        sat_src = np.zeros(src_shape, dtype=np.int64)
        sat_aux = np.zeros(aux_shape, dtype=np.int64)
        for lit in constraint.lits:
            v = abs(lit)
            if v in src_vars:
                bit = src_col(v)
                sat_src |= bit ^ 1 if lit < 0 else bit
            else:
                bit = aux_col(v)
                sat_aux |= bit ^ 1 if lit < 0 else bit
        return w * (sat_src[:, None] | sat_aux[None, :])
    par_src = np.zeros(src_shape, dtype=np.int64)
    par_aux = np.zeros(aux_shape, dtype=np.int64)
    for v in constraint.vars:
        if v in src_vars:
            par_src = par_src ^ src_col(v)
        else:
            par_aux = par_aux ^ aux_col(v)
    diff = par_src[:, None] ^ par_aux[None, :] ^ constraint.parity
    return w * (diff ^ 1)


def verify_gadget(
    source,
    translation: Sequence[WeightedItem],
    claimed,
    max_vars: int = MAX_ORACLE_VARS,
) -> GadgetVerdict:
    """Certify claimed (alpha, beta) parameters of a translation.

    For every assignment of the source constraint's variables, the maximum
    translation value over all extensions to the auxiliary variables must be
    exactly alpha when the source is satisfied and alpha - 1 otherwise, and
    beta must equal the total translation weight.  Returns the first failing
    source assignment with the achieved maximum otherwise.
    """
    alpha = Fraction(claimed.alpha)
    beta = Fraction(claimed.beta)
    weights = [Fraction(w) for _, w in translation]
    total = sum(weights, ZERO)
    if total != beta:
        return GadgetVerdict(
            certified=False,
            alpha=alpha,
            beta=beta,
            reason=f"claimed beta {beta} differs from total weight {total}",
        )

    src_order = sorted(set(_item_vars(source)))
    src_set = set(src_order)
    aux_order = [v for v in _collect_vars(translation) if v not in src_set]
    ns, na = len(src_order), len(aux_order)
    if ns + na > max_vars:
        raise SizeGuardError(f"{ns + na} variables exceed the enumeration guard of {max_vars}")

    scale = _scale_factor(weights + [alpha])
    scaled = [int(w * scale) for w in weights]
    alpha_scaled = int(alpha * scale)
    dtype = _dtype_for((sum(scaled) + abs(alpha_scaled) + scale) * 2)

    src_idx = np.arange(1 << ns, dtype=np.int64)
    aux_idx = np.arange(1 << max(na, 0), dtype=np.int64)
    if dtype is object:
        src_idx = src_idx.astype(object)
        aux_idx = aux_idx.astype(object)
    src_pos = {v: j for j, v in enumerate(src_order)}
    aux_pos = {v: j for j, v in enumerate(aux_order)}
    src_col = _bit_columns(src_idx, src_pos, ns)
    aux_col = _bit_columns(aux_idx, aux_pos, na)

    sat_matrix = np.zeros((1 << ns, 1 << max(na, 0)), dtype=dtype)
    for (constraint, _), w in zip(translation, scaled):
        sat_matrix += _satisfied_matrix_term(
            constraint, w, src_col, aux_col, src_idx.shape, aux_idx.shape, src_set
        )
    best = sat_matrix.max(axis=1)

    for i in range(1 << ns):
        assignment = _index_to_assignment(i, src_order)
        target = alpha_scaled if source.satisfied_by(assignment) else alpha_scaled - scale
        if int(best[i]) != target:
            achieved = Fraction(int(best[i]), scale)
            return GadgetVerdict(
                certified=False,
                alpha=alpha,
                beta=beta,
                counterexample=(assignment, achieved),
                reason=(
                    f"source assignment {assignment} reaches {achieved}, "
                    f"expected {Fraction(target, scale)}"
                ),
            )
    return GadgetVerdict(certified=True, alpha=alpha, beta=beta)
