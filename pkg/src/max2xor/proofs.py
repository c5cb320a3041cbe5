"""Parity resolution: rules, saturation engine, and independent proof checker.

The proof system combines two parity constraints sharing a variable into one
conclusion plus SAT residue clauses that preserve the unsatisfied weight
pointwise; the contradiction rule turns an opposite-parity pair into empty
clause weight.  Derived empty-clause weight m certifies that the problem's
cost is at least m.

Weighted application protocol: a rule always fires at the minimum of its two
premise weights, so at least one premise is consumed entirely.  The working
state is a plain weighted multiset; unlike :class:`~max2xor.core.X2XProblem`
it may hold both parities of a variable subset, because cancelling them is
exactly the contradiction rule and must appear in the log.

Compact rules replace the residue clauses of a chain step by three parity
constraints on a fresh variable.  Their conclusions flip the chain
conclusion's parity and overshoot the unsatisfied weight by exactly the
applied weight; the overshoot is tracked per step in ``offset`` and
subtracted from the usable bound.  Retranslation steps (``xlate2``,
``xlate3``) turn an accumulated residue clause back into parity constraints
through the clause translations and carry their cost shift as ``offset`` in
the same way.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

from .core import (
    EMPTY_CLAUSE,
    Max2XorError,
    OrClause,
    TAUTOLOGY,
    X2XProblem,
    XorConstraint,
    ZERO,
    check_weight,
    format_rational,
    normalize,
)
from .gadgets import (
    CompileReport,
    VarAllocator,
    binary_gadget,
    problem_digest,
    sequential_gadget,
)


class RuleApplicationError(Max2XorError):
    """A premise was missing or the applied weight broke the protocol."""


class PatternError(Max2XorError):
    """Premises or conclusions do not fit the named rule."""


class ProvenanceError(Max2XorError):
    """A proof summary was paired with a report it was not derived from."""


# ---------------------------------------------------------------------------
# Rule tables
#
# Roles: x is the shared variable, a the first premise's other variable, b the
# second premise's.  Chain rules conclude a+b with the XOR of the premise
# parities and emit two double-weight ternary residues; unit rules conclude a
# unit and one binary residue.  Residue templates are literal signs on
# (x, a[, b]).

_CHAIN_RULES = {
    "chain00": (0, 0, ((+1, -1, -1), (-1, +1, +1))),
    "chain01": (0, 1, ((+1, -1, +1), (-1, +1, -1))),
    "chain11": (1, 1, ((+1, +1, +1), (-1, -1, -1))),
}

_UNIT_RULES = {
    "unit00": (0, 0, (-1, +1)),
    "unit01": (0, 1, (-1, -1)),
    "unit10": (1, 0, (+1, -1)),
    "unit11": (1, 1, (+1, +1)),
}

# Compact variants: conclusion parity is the chain conclusion flipped; the
# entries (px, pa, pb) are the parities of the fresh-variable edges.
_COMPACT_RULES = {
    "compact00": (0, 0, (0, 0, 0)),
    "compact01": (0, 1, (0, 0, 1)),
    "compact11": (1, 1, (0, 1, 1)),
}

_XLATE_RULES = ("xlate2", "xlate3")

KNOWN_RULES = frozenset(
    list(_CHAIN_RULES) + list(_UNIT_RULES) + list(_COMPACT_RULES) + ["contra"] + list(_XLATE_RULES)
)

TWO = Fraction(2)
HALF = Fraction(1, 2)


@dataclass(frozen=True)
class ProofStep:
    """One replayable rule application.

    ``premises`` are consumed at ``weight`` each; conclusions and residues
    are added at ``weight`` times their multiplier.  ``offset`` is the exact
    amount by which the conclusions over-count the unsatisfied weight (0 for
    the plain rules).
    """

    rule: str
    weight: Fraction
    premises: Tuple[object, ...]
    conclusions: Tuple[Tuple[XorConstraint, Fraction], ...]
    residues: Tuple[Tuple[OrClause, Fraction], ...] = ()
    offset: Fraction = ZERO
    fresh_var: Optional[int] = None


@dataclass
class ProofState:
    """Evolving multiset the engine and the checker both replay against."""

    entries: Dict[XorConstraint, Fraction] = field(default_factory=dict)
    floor: Fraction = ZERO
    residues: Dict[OrClause, Fraction] = field(default_factory=dict)
    offset_total: Fraction = ZERO
    seen_vars: Set[int] = field(default_factory=set)


RawItems = Iterable[Tuple[XorConstraint, Fraction]]


def make_state(source: Union[X2XProblem, RawItems]) -> ProofState:
    """Ingest a problem or a raw weighted multiset.

    Raw input is merged by key only: opposite-parity pairs are kept so that
    their cancellation shows up as explicit contradiction steps.
    """
    state = ProofState()
    if isinstance(source, X2XProblem):
        state.entries = dict(source.entries)
        state.floor = source.floor
        state.seen_vars = set(range(1, source.var_count + 1))
        for constraint in source.entries:
            state.seen_vars.update(constraint.vars)
        return state
    for constraint, weight in source:
        weight = check_weight(weight)
        if constraint == TAUTOLOGY:
            continue
        if constraint == EMPTY_CLAUSE:
            state.floor += weight
            continue
        state.entries[constraint] = state.entries.get(constraint, ZERO) + weight
        state.seen_vars.update(constraint.vars)
    return state


# ---------------------------------------------------------------------------
# Step construction


def _shared_variable(p1: XorConstraint, p2: XorConstraint) -> int:
    shared = set(p1.vars) & set(p2.vars)
    if len(shared) != 1:
        raise PatternError(f"premises must share exactly one variable: {p1} / {p2}")
    return shared.pop()


def _other(premise: XorConstraint, x: int) -> int:
    return premise.vars[0] if premise.vars[1] == x else premise.vars[1]


def _residue_clause(signs: Sequence[int], variables: Sequence[int]) -> OrClause:
    lits = tuple(sorted((s * v for s, v in zip(signs, variables)), key=abs))
    return OrClause(lits)


def build_step(
    rule: str,
    premises: Tuple[object, ...],
    weight: Fraction,
    fresh_var: Optional[int] = None,
) -> ProofStep:
    """Construct the canonical step for a rule instance; raises on bad patterns."""
    weight = check_weight(weight)
    if rule in _CHAIN_RULES or rule in _COMPACT_RULES:
        if len(premises) != 2:
            raise PatternError(f"{rule} takes two premises")
        p1, p2 = premises
        if not (isinstance(p1, XorConstraint) and isinstance(p2, XorConstraint)):
            raise PatternError(f"{rule} premises must be parity constraints")
        if p1.arity != 2 or p2.arity != 2:
            raise PatternError(f"{rule} premises must have two variables: {p1} / {p2}")
        x = _shared_variable(p1, p2)
        a, b = _other(p1, x), _other(p2, x)
        if rule in _CHAIN_RULES:
            par1, par2, templates = _CHAIN_RULES[rule]
            if (p1.parity, p2.parity) != (par1, par2):
                raise PatternError(f"{rule} premises must have parities {par1}/{par2}")
            if fresh_var is not None:
                raise PatternError(f"{rule} takes no fresh variable")
            conclusion = XorConstraint(tuple(sorted((a, b))), par1 ^ par2)
            residues = tuple(
                (_residue_clause(signs, (x, a, b)), TWO) for signs in templates
            )
            return ProofStep(rule, weight, (p1, p2), ((conclusion, Fraction(1)),), residues)
        par1, par2, edge_parities = _COMPACT_RULES[rule]
        if (p1.parity, p2.parity) != (par1, par2):
            raise PatternError(f"{rule} premises must have parities {par1}/{par2}")
        if fresh_var is None or fresh_var <= 0:
            raise PatternError(f"{rule} needs a fresh variable")
        if fresh_var in (x, a, b):
            raise PatternError(f"fresh variable {fresh_var} occurs in the premises")
        px, pa, pb = edge_parities
        conclusions = (
            (XorConstraint(tuple(sorted((a, b))), par1 ^ par2 ^ 1), Fraction(1)),
            (XorConstraint(tuple(sorted((x, fresh_var))), px), TWO),
            (XorConstraint(tuple(sorted((a, fresh_var))), pa), TWO),
            (XorConstraint(tuple(sorted((b, fresh_var))), pb), TWO),
        )
        return ProofStep(
            rule, weight, (p1, p2), conclusions, (), offset=weight, fresh_var=fresh_var
        )

    if rule in _UNIT_RULES:
        if len(premises) != 2:
            raise PatternError(f"{rule} takes two premises")
        p1, p2 = premises
        if not (isinstance(p1, XorConstraint) and isinstance(p2, XorConstraint)):
            raise PatternError(f"{rule} premises must be parity constraints")
        par1, par2, template = _UNIT_RULES[rule]
        if p1.arity != 1 or p2.arity != 2:
            raise PatternError(f"{rule} premises must be a unit and a pair: {p1} / {p2}")
        (x,) = p1.vars
        if x not in p2.vars:
            raise PatternError(f"{rule} premises must share the unit variable")
        if (p1.parity, p2.parity) != (par1, par2):
            raise PatternError(f"{rule} premises must have parities {par1}/{par2}")
        a = _other(p2, x)
        conclusion = XorConstraint((a,), par1 ^ par2)
        residues = ((_residue_clause(template, (x, a)), TWO),)
        return ProofStep(rule, weight, (p1, p2), ((conclusion, Fraction(1)),), residues)

    if rule == "contra":
        if len(premises) != 2:
            raise PatternError("contra takes two premises")
        p1, p2 = premises
        if not (isinstance(p1, XorConstraint) and isinstance(p2, XorConstraint)):
            raise PatternError("contra premises must be parity constraints")
        if p1.vars != p2.vars or (p1.parity, p2.parity) != (0, 1):
            raise PatternError(
                f"contra premises must be the same variables at parities 0/1: {p1} / {p2}"
            )
        return ProofStep(rule, weight, (p1, p2), ((EMPTY_CLAUSE, Fraction(1)),))

    if rule in _XLATE_RULES:
        if len(premises) != 1 or not isinstance(premises[0], OrClause):
            raise PatternError(f"{rule} takes one residue clause premise")
        cl = premises[0]
        if rule == "xlate2":
            if cl.k != 2:
                raise PatternError(f"xlate2 needs a binary clause, got width {cl.k}")
            if fresh_var is not None:
                raise PatternError("xlate2 takes no fresh variable")
            conclusions = tuple((c, w) for c, w in binary_gadget(Fraction(1), cl))
            return ProofStep(rule, weight, (cl,), conclusions, (), offset=weight * HALF)
        if cl.k != 3:
            raise PatternError(f"xlate3 needs a ternary clause, got width {cl.k}")
        if fresh_var is None or fresh_var <= 0:
            raise PatternError("xlate3 needs a fresh variable")
        if fresh_var in cl.variables():
            raise PatternError(f"fresh variable {fresh_var} occurs in the clause")
        items = sequential_gadget(cl, None, VarAllocator(fresh_var))
        conclusions = tuple((c, w) for c, w in items)
        return ProofStep(
            rule, weight, (cl,), conclusions, (), offset=weight, fresh_var=fresh_var
        )

    raise PatternError(f"unknown rule id {rule!r}")


# ---------------------------------------------------------------------------
# State transition


def _check_weights(state: ProofState, step: ProofStep) -> None:
    if step.rule in _XLATE_RULES:
        pool = state.residues.get(step.premises[0])
        if pool is None:
            raise RuleApplicationError(f"residue clause {step.premises[0]} not present")
        if pool != step.weight:
            raise RuleApplicationError(
                f"retranslation must consume the full residue weight {pool}, "
                f"got {step.weight}"
            )
        return
    w1 = state.entries.get(step.premises[0])
    w2 = state.entries.get(step.premises[1])
    if w1 is None or w2 is None or w1 < step.weight or w2 < step.weight:
        raise RuleApplicationError(
            f"premises of {step.rule} missing or lighter than {step.weight}"
        )
    if step.weight != min(w1, w2):
        raise RuleApplicationError(
            f"applied weight {step.weight} must equal the smaller premise weight "
            f"{min(w1, w2)} (one premise is consumed entirely)"
        )


def _check_freshness(state: ProofState, step: ProofStep) -> None:
    if step.fresh_var is not None and step.fresh_var in state.seen_vars:
        raise PatternError(f"variable {step.fresh_var} is not fresh")


def _apply_step(state: ProofState, step: ProofStep) -> None:
    if step.rule in _XLATE_RULES:
        cl = step.premises[0]
        remaining = state.residues[cl] - step.weight
        if remaining == 0:
            del state.residues[cl]
        else:
            state.residues[cl] = remaining
    else:
        for premise in step.premises:
            remaining = state.entries[premise] - step.weight
            if remaining == 0:
                del state.entries[premise]
            else:
                state.entries[premise] = remaining
    for constraint, multiplier in step.conclusions:
        added = step.weight * multiplier
        if constraint == EMPTY_CLAUSE:
            state.floor += added
            continue
        state.entries[constraint] = state.entries.get(constraint, ZERO) + added
        state.seen_vars.update(constraint.vars)
    for cl, multiplier in step.residues:
        state.residues[cl] = state.residues.get(cl, ZERO) + step.weight * multiplier
    state.offset_total += step.offset
    if step.fresh_var is not None:
        state.seen_vars.add(step.fresh_var)


def apply_rule(
    state: ProofState,
    rule: str,
    premise_keys: Tuple[XorConstraint, XorConstraint],
    weight: Fraction,
) -> Tuple[ProofState, ProofStep]:
    """Fire one plain rule against the state; returns the mutated state and step."""
    if rule in _COMPACT_RULES or rule in _XLATE_RULES:
        raise PatternError(f"{rule} needs apply_compact_rule / retranslation")
    step = build_step(rule, tuple(premise_keys), weight)
    _check_weights(state, step)
    _apply_step(state, step)
    return state, step


def apply_compact_rule(
    state: ProofState,
    rule: str,
    premise_keys: Tuple[XorConstraint, XorConstraint],
    weight: Fraction,
    alloc: VarAllocator,
) -> Tuple[ProofState, ProofStep]:
    """Fire a compact rule, drawing the fresh variable from the allocator."""
    if rule not in _COMPACT_RULES:
        raise PatternError(f"{rule} is not a compact rule")
    step = build_step(rule, tuple(premise_keys), weight, fresh_var=alloc.next_id)
    _check_weights(state, step)
    _check_freshness(state, step)
    alloc.fresh()
    _apply_step(state, step)
    return state, step


def _apply_retranslation(
    state: ProofState, cl: OrClause, alloc: VarAllocator
) -> ProofStep:
    weight = state.residues[cl]
    if cl.k == 2:
        step = build_step("xlate2", (cl,), weight)
    elif cl.k == 3:
        step = build_step("xlate3", (cl,), weight, fresh_var=alloc.next_id)
        _check_freshness(state, step)
        alloc.fresh()
    else:
        raise PatternError(f"no retranslation for residue width {cl.k}")
    _check_weights(state, step)
    _apply_step(state, step)
    return step


# ---------------------------------------------------------------------------
# Odd cycle search

Entries = Mapping[XorConstraint, Fraction]
CONSTANT_NODE = 0  # virtual endpoint of unit constraints


def _entries_of(source: Union[X2XProblem, Entries]) -> Entries:
    return source.entries if isinstance(source, X2XProblem) else source


def _opposite_pair(entries: Entries) -> Optional[List[XorConstraint]]:
    by_vars: Dict[Tuple[int, ...], Set[int]] = {}
    for constraint in entries:
        by_vars.setdefault(constraint.vars, set()).add(constraint.parity)
    for vars_ in sorted(by_vars):
        if len(by_vars[vars_]) == 2:
            return [XorConstraint(vars_, 0), XorConstraint(vars_, 1)]
    return None


def _adjacency(entries: Entries) -> Dict[int, List[Tuple[int, int]]]:
    adj: Dict[int, List[Tuple[int, int]]] = {}
    for constraint in sorted(entries):
        if constraint.arity == 1:
            u, v = CONSTANT_NODE, constraint.vars[0]
        elif constraint.arity == 2:
            u, v = constraint.vars
        else:
            continue
        adj.setdefault(u, []).append((v, constraint.parity))
        adj.setdefault(v, []).append((u, constraint.parity))
    for neighbours in adj.values():
        neighbours.sort()
    return adj


def _bfs_odd_walk(
    adj: Dict[int, List[Tuple[int, int]]], source: int
) -> Optional[List[Tuple[int, int, int]]]:
    """Shortest odd closed walk through ``source`` as (u, v, parity) edges.

    Runs a breadth-first search on the parity double cover: node (v, s) means
    v reached along a walk of parity s.
    """
    start = (source, 0)
    goal = (source, 1)
    parents: Dict[Tuple[int, int], Tuple[int, int, int]] = {start: None}
    queue = deque([start])
    while queue:
        node, sign = queue.popleft()
        for nbr, parity in adj.get(node, ()):
            nxt = (nbr, sign ^ parity)
            if nxt in parents:
                continue
            parents[nxt] = (node, sign, parity)
            if nxt == goal:
                edges = []
                cur = nxt
                while parents[cur] is not None:
                    prev_node, prev_sign, par = parents[cur]
                    edges.append((prev_node, cur[0], par))
                    cur = (prev_node, prev_sign)
                edges.reverse()
                return edges
            queue.append(nxt)
    return None


def _edge_constraint(u: int, v: int, parity: int) -> XorConstraint:
    if u == CONSTANT_NODE:
        return XorConstraint((v,), parity)
    if v == CONSTANT_NODE:
        return XorConstraint((u,), parity)
    return XorConstraint(tuple(sorted((u, v))), parity)


def find_odd_cycle(
    source: Union[X2XProblem, Entries]
) -> Optional[Tuple[List[XorConstraint], Fraction]]:
    """Shortest cycle whose parities XOR to one, or None.

    Two-variable constraints are edges, unit constraints are edges to a
    virtual constant node; an opposite-parity pair is a two-cycle.  The walk
    starts at the constant node whenever the cycle passes through it, so the
    cycle's constraint order is directly contractible.  Deterministic:
    sources and neighbours are scanned in ascending order.
    """
    entries = _entries_of(source)
    pair = _opposite_pair(entries)
    if pair is not None:
        return pair, min(entries[pair[0]], entries[pair[1]])

    adj = _adjacency(entries)
    best: Optional[List[Tuple[int, int, int]]] = None
    for s in sorted(adj):
        walk = _bfs_odd_walk(adj, s)
        if walk is not None and (best is None or len(walk) < len(best)):
            best = walk
    if best is None:
        return None
    cycle = [_edge_constraint(u, v, p) for u, v, p in best]
    if len(set(cycle)) != len(cycle):  # globally shortest odd walks are simple
        return None
    return cycle, min(entries[c] for c in cycle)


def _parity_balanced_triangle(entries: Entries) -> Optional[List[XorConstraint]]:
    """Smallest pure-variable triangle whose parities XOR to zero.

    Under compact chaining the conclusion parity flips, so these are the
    three-cycles that still close with a contradiction step.
    """
    edges: Dict[Tuple[int, int], int] = {}
    for constraint in entries:
        if constraint.arity == 2:
            edges[constraint.vars] = constraint.parity
    neighbours: Dict[int, Set[int]] = {}
    for u, v in edges:
        neighbours.setdefault(u, set()).add(v)
        neighbours.setdefault(v, set()).add(u)
    for u in sorted(neighbours):
        for v in sorted(w for w in neighbours[u] if w > u):
            for w in sorted(x for x in neighbours[u] & neighbours[v] if x > v):
                p1 = edges[(u, v)]
                p2 = edges[(v, w)]
                p3 = edges[(u, w)]
                if p1 ^ p2 ^ p3 == 0:
                    return [
                        XorConstraint((u, v), p1),
                        XorConstraint((v, w), p2),
                        XorConstraint((u, w), p3),
                    ]
    return None


def _find_compact_cycle(
    entries: Entries, triangle_quota: int
) -> Optional[Tuple[List[XorConstraint], str]]:
    """Next contractible cycle in compact mode.

    Priority: opposite-parity pairs, then odd cycles through the constant
    node (unit-rule chains, which do not flip parities), then quota-limited
    parity-balanced triangles that exercise the compact chain rules.
    """
    pair = _opposite_pair(entries)
    if pair is not None:
        return pair, "pair"
    adj = _adjacency(entries)
    if CONSTANT_NODE in adj:
        walk = _bfs_odd_walk(adj, CONSTANT_NODE)
        if walk is not None:
            cycle = [_edge_constraint(u, v, p) for u, v, p in walk]
            if len(set(cycle)) == len(cycle):
                return cycle, "unit-chain"
    if triangle_quota > 0:
        triangle = _parity_balanced_triangle(entries)
        if triangle is not None:
            return triangle, "triangle"
    return None


# ---------------------------------------------------------------------------
# Saturation engine


@dataclass
class ProofSummary:
    """Outcome of a saturation run.

    ``bound_m`` is the usable certified bound: total derived empty-clause
    weight (the final floor, which includes the input floor) minus the
    accumulated rule offsets.  Exactly
    ``bound_m + Cost(residual and residues) = Cost(input)``.
    """

    bound_m: Fraction
    residual: X2XProblem
    residue_clauses: Tuple[Tuple[OrClause, Fraction], ...]
    rounds: int
    steps: int
    floor_total: Fraction
    offset_total: Fraction
    round_stats: Tuple[Tuple[int, int], ...] = ()  # (entries at round start, rule steps)
    provenance: str = ""


MODES = ("discard", "retranslate", "compact")


def _combine(acc: XorConstraint, edge: XorConstraint, compact: bool):
    """Rule id and ordered premises for one contraction step."""
    if acc.arity == 1:
        rule = f"unit{acc.parity}{edge.parity}"
        return rule, (acc, edge)
    first, second = acc, edge
    if first.parity > second.parity:
        first, second = second, first
    family = "compact" if compact else "chain"
    return f"{family}{first.parity}{second.parity}", (first, second)


def _contract_cycle(
    state: ProofState,
    cycle: List[XorConstraint],
    compact: bool,
    alloc: VarAllocator,
    steps: List[ProofStep],
) -> int:
    acc = cycle[0]
    for edge in cycle[1:-1]:
        rule, premises = _combine(acc, edge, compact)
        weight = min(state.entries[premises[0]], state.entries[premises[1]])
        if rule.startswith("compact"):
            _, step = apply_compact_rule(state, rule, premises, weight, alloc)
        else:
            _, step = apply_rule(state, rule, premises, weight)
        steps.append(step)
        acc = step.conclusions[0][0]
    closing = cycle[-1]
    premises = (acc, closing) if acc.parity == 0 else (closing, acc)
    weight = min(state.entries[premises[0]], state.entries[premises[1]])
    _, step = apply_rule(state, "contra", premises, weight)
    steps.append(step)
    return len(cycle) - 1


def saturate(
    source: Union[X2XProblem, RawItems],
    mode: str = "discard",
    max_rounds: int = 3,
    compact_triangle_quota: int = 4,
) -> Tuple[ProofSummary, List[ProofStep]]:
    """Derive empty-clause weight by repeated odd-cycle contraction.

    ``discard`` logs residue clauses but never feeds them back;
    ``retranslate`` compiles them into fresh parity constraints between
    rounds (up to ``max_rounds`` saturation rounds); ``compact`` uses the
    fresh-variable chain rules instead of residue clauses.  Per round, rule
    applications are budgeted by the entry count at the round's start, which
    enforces the linear derivation length.
    """
    if mode not in MODES:
        raise Max2XorError(f"unknown mode {mode!r}; pick one of {MODES}")
    provenance = problem_digest(source) if isinstance(source, X2XProblem) else ""
    state = make_state(source)
    alloc = VarAllocator(max(state.seen_vars, default=0) + 1)
    steps: List[ProofStep] = []
    round_stats: List[Tuple[int, int]] = []
    rounds = 0
    total_rounds = max_rounds if mode == "retranslate" else 1

    while True:
        rounds += 1
        if rounds > 1:
            for cl, _ in sorted(state.residues.items()):
                if cl.k in (2, 3):
                    steps.append(_apply_retranslation(state, cl, alloc))
        budget = len(state.entries)
        used = 0
        quota = compact_triangle_quota
        while True:
            if mode == "compact":
                found = _find_compact_cycle(state.entries, quota)
                if found is None:
                    break
                cycle, kind = found
                if kind == "triangle":
                    quota -= 1
            else:
                found = find_odd_cycle(state.entries)
                if found is None:
                    break
                cycle = found[0]
            if used + len(cycle) - 1 > budget:
                break
            used += _contract_cycle(state, cycle, mode == "compact", alloc, steps)
        round_stats.append((budget, used))
        if mode != "retranslate" or rounds >= total_rounds:
            break
        if not any(cl.k in (2, 3) for cl in state.residues):
            break

    residual = normalize(state.entries.items(), var_count=alloc.next_id - 1)
    summary = ProofSummary(
        bound_m=state.floor - state.offset_total,
        residual=residual,
        residue_clauses=tuple(sorted(state.residues.items())),
        rounds=rounds,
        steps=len(steps),
        floor_total=state.floor,
        offset_total=state.offset_total,
        round_stats=tuple(round_stats),
        provenance=provenance,
    )
    return summary, steps


# ---------------------------------------------------------------------------
# Independent checker


@dataclass
class CheckVerdict:
    accepted: bool
    failing_step: Optional[int] = None
    reason: Optional[str] = None
    summary: Optional[ProofSummary] = None


def _unsat(item, assignment) -> bool:
    return not item.satisfied_by(assignment)


def _truth_table_reason(step: ProofStep) -> Optional[str]:
    """Exact unsatisfied-weight check of one step over all assignments.

    Without a fresh variable the conclusions must over-count the premises by
    exactly ``offset`` pointwise; with one, by exactly ``offset`` at the best
    fresh value and by at least ``offset`` at the other.
    """
    variables: Set[int] = set()
    for premise in step.premises:
        variables.update(
            premise.variables() if isinstance(premise, OrClause) else premise.vars
        )
    for constraint, _ in step.conclusions:
        variables.update(constraint.vars)
    for cl, _ in step.residues:
        variables.update(cl.variables())
    fresh = step.fresh_var
    base = sorted(variables - {fresh})

    for values in product((0, 1), repeat=len(base)):
        assignment = dict(zip(base, values))
        premise_unsat = sum(
            (step.weight for p in step.premises if _unsat(p, assignment)), ZERO
        )

        def conclusion_unsat() -> Fraction:
            total = ZERO
            for constraint, multiplier in step.conclusions:
                if _unsat(constraint, assignment):
                    total += step.weight * multiplier
            for cl, multiplier in step.residues:
                if _unsat(cl, assignment):
                    total += step.weight * multiplier
            return total

        if fresh is None:
            delta = conclusion_unsat() - premise_unsat
            if delta != step.offset:
                return (
                    f"unsatisfied weight changes by {delta} instead of {step.offset} "
                    f"at {assignment}"
                )
        else:
            deltas = []
            for value in (0, 1):
                assignment[fresh] = value
                deltas.append(conclusion_unsat() - premise_unsat)
            del assignment[fresh]
            if min(deltas) != step.offset or any(d < step.offset for d in deltas):
                return (
                    f"fresh-variable deltas {deltas} violate offset {step.offset} "
                    f"at {assignment}"
                )
    return None


def _derived_rounds(steps: Sequence[ProofStep]) -> int:
    rounds = 1
    previous_was_xlate = False
    for step in steps:
        is_xlate = step.rule in _XLATE_RULES
        if is_xlate and not previous_was_xlate:
            rounds += 1
        previous_was_xlate = is_xlate
    return rounds


def check_proof(
    source: Union[X2XProblem, RawItems],
    steps: Sequence[ProofStep],
    claimed: Optional[ProofSummary] = None,
) -> CheckVerdict:
    """Replay a proof against the input, re-verifying every step.

    Each step is checked for rule-pattern fidelity (the step must equal the
    canonical instance the rule produces from its premises), weight protocol
    (the applied weight equals the smaller premise weight), freshness of
    introduced variables, and exact unsatisfied-weight preservation by truth
    table.  Accepts, or pinpoints the first failing step.
    """
    state = make_state(source)
    for index, step in enumerate(steps):
        try:
            if step.rule not in KNOWN_RULES:
                raise PatternError(f"unknown rule id {step.rule!r}")
            expected = build_step(step.rule, step.premises, step.weight, step.fresh_var)
            if expected != step:
                raise PatternError(
                    f"step is not the canonical {step.rule} instance of its premises"
                )
            _check_weights(state, step)
            _check_freshness(state, step)
            table_reason = _truth_table_reason(step)
            if table_reason is not None:
                raise PatternError(f"truth table: {table_reason}")
            _apply_step(state, step)
        except Max2XorError as exc:
            return CheckVerdict(accepted=False, failing_step=index, reason=str(exc))

    residual = normalize(
        state.entries.items(), var_count=max(state.seen_vars, default=0)
    )
    derived = ProofSummary(
        bound_m=state.floor - state.offset_total,
        residual=residual,
        residue_clauses=tuple(sorted(state.residues.items())),
        rounds=_derived_rounds(steps),
        steps=len(steps),
        floor_total=state.floor,
        offset_total=state.offset_total,
    )
    if claimed is not None:
        if claimed.bound_m != derived.bound_m:
            return CheckVerdict(
                accepted=False,
                reason=(
                    f"claimed bound {format_rational(claimed.bound_m)} differs from "
                    f"derived {format_rational(derived.bound_m)}"
                ),
                summary=derived,
            )
        if (
            claimed.residual.entries != derived.residual.entries
            or claimed.residual.floor != derived.residual.floor
        ):
            return CheckVerdict(
                accepted=False, reason="claimed residual differs from replay", summary=derived
            )
        if tuple(claimed.residue_clauses) != derived.residue_clauses:
            return CheckVerdict(
                accepted=False, reason="claimed residues differ from replay", summary=derived
            )
    return CheckVerdict(accepted=True, summary=derived)


# ---------------------------------------------------------------------------
# Linking bounds back to the source instance


@dataclass
class BoundVerdict:
    unsat_proven: bool
    lower_bound: Fraction  # on the source instance's cost
    message: str


def bound_to_original(summary: ProofSummary, report: CompileReport) -> BoundVerdict:
    """Interpret a compiled-problem bound for the source instance.

    The compilation shifted the cost up by ``report.shift``, so the source
    cost is at least ``bound_m - shift``; reaching ``shift + 1`` proves a
    decision instance unsatisfiable.
    """
    if summary.provenance != report.provenance:
        raise ProvenanceError(
            "proof summary was not derived from this compilation's problem"
        )
    lower = summary.bound_m - report.shift
    if lower < 0:
        lower = ZERO
    unsat = summary.bound_m >= report.threshold
    keyword = "UNSAT" if unsat else "UNKNOWN"
    return BoundVerdict(
        unsat_proven=unsat,
        lower_bound=lower,
        message=f"{keyword} lb={format_rational(lower)}",
    )
