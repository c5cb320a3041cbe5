"""Resolution rules, the saturation engine, and the independent checker."""

import random
from dataclasses import replace
from fractions import Fraction
from itertools import product

import pytest

from max2xor.core import EMPTY_CLAUSE, XorConstraint, clause, normalize, xor
from max2xor.gadgets import VarAllocator, compile_maxsat
from max2xor.oracle import brute_opt_cost, brute_opt_cost_items
from max2xor.proofs import (
    PatternError,
    ProvenanceError,
    RuleApplicationError,
    apply_compact_rule,
    apply_rule,
    bound_to_original,
    build_step,
    check_proof,
    find_odd_cycle,
    make_state,
    saturate,
)
from max2xor.textio import emit_proof, parse_cnf

F = Fraction
H = Fraction(1, 2)


def unsat_weight(items, assignment):
    return sum((w for item, w in items if not item.satisfied_by(assignment)), F(0))


# ---------------------------------------------------------------------------
# Rule soundness by truth table


FIGURE_RULES = [
    ("chain00", xor([1, 2], 0), xor([1, 3], 0)),
    ("chain01", xor([1, 2], 0), xor([1, 3], 1)),
    ("chain11", xor([1, 2], 1), xor([1, 3], 1)),
    ("unit00", xor([1], 0), xor([1, 2], 0)),
    ("unit01", xor([1], 0), xor([1, 2], 1)),
    ("unit10", xor([1], 1), xor([1, 2], 0)),
    ("unit11", xor([1], 1), xor([1, 2], 1)),
    ("contra", xor([1, 2], 0), xor([1, 2], 1)),
]


@pytest.mark.parametrize("rule,p1,p2", FIGURE_RULES, ids=[r for r, _, _ in FIGURE_RULES])
def test_figure_rule_preserves_unsat_weight(rule, p1, p2):
    step = build_step(rule, (p1, p2), F(1))
    variables = sorted(set(p1.vars) | set(p2.vars) | {v for c, _ in step.conclusions for v in c.vars})
    for values in product((0, 1), repeat=len(variables)):
        assignment = dict(zip(variables, values))
        premise_unsat = unsat_weight([(p1, F(1)), (p2, F(1))], assignment)
        conclusion_unsat = unsat_weight(
            [(c, m) for c, m in step.conclusions] + [(r, m) for r, m in step.residues],
            assignment,
        )
        assert conclusion_unsat == premise_unsat, (rule, assignment)


COMPACT_RULES = [
    ("compact00", xor([1, 2], 0), xor([1, 3], 0)),
    ("compact01", xor([1, 2], 0), xor([1, 3], 1)),
    ("compact11", xor([1, 2], 1), xor([1, 3], 1)),
]


@pytest.mark.parametrize("rule,p1,p2", COMPACT_RULES, ids=[r for r, _, _ in COMPACT_RULES])
def test_compact_rule_offsets_by_weight(rule, p1, p2):
    for weight in (F(1), H):
        step = build_step(rule, (p1, p2), weight, fresh_var=9)
        assert step.offset == weight
        for values in product((0, 1), repeat=3):
            assignment = dict(zip((1, 2, 3), values))
            premise_unsat = unsat_weight([(p1, weight), (p2, weight)], assignment)
            deltas = []
            for y in (0, 1):
                assignment[9] = y
                conclusion_unsat = unsat_weight(
                    [(c, weight * m) for c, m in step.conclusions], assignment
                )
                deltas.append(conclusion_unsat - premise_unsat)
            del assignment[9]
            # exactly +w at the best fresh value, never below
            assert min(deltas) == weight, (rule, assignment, deltas)
            assert all(d >= weight for d in deltas)


def test_compact_step_shape():
    step = build_step("compact00", (xor([1, 2], 0), xor([1, 3], 0)), F(1), fresh_var=9)
    assert step.conclusions == (
        (xor([2, 3], 1), F(1)),  # chain conclusion with flipped parity
        (xor([1, 9], 0), F(2)),
        (xor([2, 9], 0), F(2)),
        (xor([3, 9], 0), F(2)),
    )
    assert step.residues == ()


# ---------------------------------------------------------------------------
# Rule application against a state


def test_contra_decomposition_protocol():
    state = make_state([(xor([1, 2], 0), F(3)), (xor([1, 2], 1), F(2))])
    _, step = apply_rule(state, "contra", (xor([1, 2], 0), xor([1, 2], 1)), F(2))
    assert state.floor == F(2)
    assert state.entries == {xor([1, 2], 0): F(1)}
    assert step.conclusions == ((EMPTY_CLAUSE, F(1)),)


def test_chain00_example():
    state = make_state([(xor([1, 2], 0), F(1)), (xor([1, 3], 0), F(1))])
    _, step = apply_rule(state, "chain00", (xor([1, 2], 0), xor([1, 3], 0)), F(1))
    assert state.entries == {xor([2, 3], 0): F(1)}
    assert state.residues == {clause(1, -2, -3): F(2), clause(-1, 2, 3): F(2)}
    assert step.residues == ((clause(1, -2, -3), F(2)), (clause(-1, 2, 3), F(2)))


def test_unit10_example():
    state = make_state([(xor([1], 1), F(1)), (xor([1, 2], 0), F(1))])
    _, step = apply_rule(state, "unit10", (xor([1], 1), xor([1, 2], 0)), F(1))
    assert state.entries == {xor([2], 1): F(1)}
    assert state.residues == {clause(1, -2): F(2)}


def test_apply_rule_weight_protocol_errors():
    state = make_state([(xor([1, 2], 0), F(3)), (xor([1, 2], 1), F(2))])
    with pytest.raises(RuleApplicationError):
        apply_rule(state, "contra", (xor([1, 2], 0), xor([1, 2], 1)), F(3))  # > min
    with pytest.raises(RuleApplicationError):
        apply_rule(state, "contra", (xor([1, 2], 0), xor([1, 2], 1)), F(1))  # < min
    with pytest.raises(RuleApplicationError):
        apply_rule(state, "contra", (xor([1, 3], 0), xor([1, 3], 1)), F(1))  # absent


def test_apply_rule_pattern_errors():
    state = make_state([(xor([1, 2], 0), F(1)), (xor([3, 4], 0), F(1))])
    with pytest.raises(PatternError):
        apply_rule(state, "chain00", (xor([1, 2], 0), xor([3, 4], 0)), F(1))  # no shared var
    with pytest.raises(PatternError):
        apply_rule(state, "chain01", (xor([1, 2], 0), xor([1, 2], 0)), F(1))  # parities
    with pytest.raises(PatternError):
        apply_rule(state, "compact00", (xor([1, 2], 0), xor([3, 4], 0)), F(1))  # wrong api


def test_apply_compact_rule_scaling():
    state = make_state([(xor([1, 2], 0), H), (xor([1, 3], 0), H)])
    alloc = VarAllocator(4)
    _, step = apply_compact_rule(state, "compact00", (xor([1, 2], 0), xor([1, 3], 0)), H, alloc)
    assert step.offset == H
    assert state.offset_total == H
    assert state.entries[xor([1, 4], 0)] == F(1)  # 2 * 1/2
    assert state.entries[xor([2, 3], 1)] == H
    assert step.fresh_var == 4


# ---------------------------------------------------------------------------
# Odd cycle search


def test_find_odd_cycle_triangle():
    entries = {xor([1, 2], 1): F(1), xor([2, 3], 1): F(1), xor([1, 3], 1): F(1)}
    cycle, weight = find_odd_cycle(entries)
    assert len(cycle) == 3
    assert set(cycle) == set(entries)
    assert weight == F(1)


def test_find_odd_cycle_through_constant_node():
    entries = {xor([1], 0): F(1), xor([1, 2], 0): F(1), xor([2], 1): F(1)}
    cycle, weight = find_odd_cycle(entries)
    assert len(cycle) == 3
    assert cycle[0].arity == 1 and cycle[-1].arity == 1  # rotated to start at the unit
    assert weight == F(1)


def test_find_odd_cycle_none_when_consistent():
    entries = {xor([1, 2], 1): F(1), xor([2, 3], 1): F(1), xor([1, 3], 0): F(1)}
    assert find_odd_cycle(entries) is None


def test_find_odd_cycle_prefers_two_cycle():
    entries = {
        xor([1, 2], 0): F(2),
        xor([1, 2], 1): F(5),
        xor([2, 3], 1): F(1),
        xor([1, 3], 1): F(1),
    }
    cycle, weight = find_odd_cycle(entries)
    assert cycle == [xor([1, 2], 0), xor([1, 2], 1)]
    assert weight == F(2)


def test_find_odd_cycle_on_problem_object():
    problem = normalize([(xor([1, 2], 1), F(1)), (xor([2, 3], 1), F(1)), (xor([1, 3], 1), F(1))])
    cycle, _ = find_odd_cycle(problem)
    assert len(cycle) == 3


# ---------------------------------------------------------------------------
# Saturation


def test_saturate_raw_opposite_pair_single_step():
    summary, steps = saturate([(xor([1], 0), F(1)), (xor([1], 1), F(1))])
    assert summary.bound_m == F(1)
    assert summary.residual.entries == {}
    assert len(steps) == 1 and steps[0].rule == "contra"


def test_saturate_consistent_problem_is_untouched():
    problem = normalize([(xor([1, 2], 1), F(1))], var_count=2)
    summary, steps = saturate(problem)
    assert summary.bound_m == 0
    assert steps == []
    assert summary.residual.entries == problem.entries


def test_saturate_four_clause_contradiction():
    report = compile_maxsat(parse_cnf("p cnf 2 4\n1 2 0\n1 -2 0\n-1 2 0\n-1 -2 0\n"))
    assert report.shift == F(2)
    summary, _ = saturate(report.problem)
    assert summary.bound_m >= F(3)
    assert brute_opt_cost(report.problem).cost == F(3)
    verdict = bound_to_original(summary, report)
    assert verdict.unsat_proven
    assert verdict.message == "UNSAT lb=1/1"


def test_saturate_triangle_by_rules():
    items = [(xor([1, 2], 1), F(1)), (xor([2, 3], 1), F(1)), (xor([1, 3], 1), F(1))]
    summary, steps = saturate(items)
    assert [s.rule for s in steps] == ["chain11", "contra"]
    assert summary.bound_m == F(1)
    assert brute_opt_cost_items(items).cost == F(1)


def test_saturate_unit_chain_cycle():
    items = [(xor([1], 0), F(1)), (xor([1, 2], 0), F(1)), (xor([2], 1), F(1))]
    summary, steps = saturate(items)
    assert summary.bound_m == F(1)
    assert steps[0].rule.startswith("unit")
    assert steps[-1].rule == "contra"


def test_saturate_determinism():
    rng = random.Random(123)
    raw = []
    for _ in range(12):
        arity = rng.choice([1, 2, 2])
        vs = rng.sample(range(1, 7), arity)
        raw.append((xor(vs, rng.randint(0, 1)), F(rng.randint(1, 8), rng.choice([1, 2]))))
    problem = normalize(raw, var_count=6)
    outputs = set()
    for _ in range(3):
        for mode in ("discard", "retranslate", "compact"):
            _, steps = saturate(problem, mode=mode)
            outputs.add((mode, emit_proof(steps)))
    assert len(outputs) == 3  # one canonical proof per mode


def test_saturate_round_budget_respected():
    rng = random.Random(321)
    for _ in range(40):
        n = rng.randint(3, 7)
        raw = []
        for _ in range(rng.randint(3, 10)):
            arity = rng.choice([1, 2, 2])
            vs = rng.sample(range(1, n + 1), arity)
            raw.append((xor(vs, rng.randint(0, 1)), F(rng.randint(1, 8), rng.choice([1, 2, 4]))))
        problem = normalize(raw, var_count=n)
        for mode in ("discard", "retranslate", "compact"):
            summary, _ = saturate(problem, mode=mode)
            for budget, used in summary.round_stats:
                assert used <= budget


def test_retranslate_consumes_residues_and_keeps_identity():
    # two overlapping odd triangles leave ternary residues to feed round two
    items = [
        (xor([1, 2], 1), F(1)),
        (xor([2, 3], 1), F(1)),
        (xor([1, 3], 1), F(1)),
        (xor([3, 4], 1), F(1)),
        (xor([1, 4], 1), F(1)),
    ]
    summary, steps = saturate(items, mode="retranslate", max_rounds=2)
    assert any(s.rule == "xlate3" for s in steps)
    assert summary.rounds == 2
    cost_in = brute_opt_cost_items(items).cost
    rest = brute_opt_cost_items(
        list(summary.residual.sorted_entries()) + list(summary.residue_clauses),
        floor=summary.residual.floor,
    )
    assert summary.bound_m + rest.cost == cost_in


def test_compact_mode_exercises_compact_rules():
    # a parity-balanced triangle: contraction spends one compact step and one
    # contradiction, for zero net bound but full weight bookkeeping
    items = [(xor([1, 2], 0), F(1)), (xor([2, 3], 0), F(1)), (xor([1, 3], 0), F(1))]
    summary, steps = saturate(items, mode="compact")
    assert any(s.rule.startswith("compact") for s in steps)
    assert summary.offset_total > 0
    assert summary.bound_m == summary.floor_total - summary.offset_total
    cost_in = brute_opt_cost_items(items).cost
    rest = brute_opt_cost_items(
        list(summary.residual.sorted_entries()) + list(summary.residue_clauses),
        floor=summary.residual.floor,
    )
    assert summary.bound_m + rest.cost == cost_in


# ---------------------------------------------------------------------------
# Checker


def _random_problem(rng):
    n = rng.randint(3, 7)
    raw = []
    for _ in range(rng.randint(3, 10)):
        arity = rng.choice([1, 2, 2])
        vs = rng.sample(range(1, n + 1), arity)
        raw.append((xor(vs, rng.randint(0, 1)), F(rng.randint(1, 8), rng.choice([1, 2, 4]))))
    return normalize(raw, var_count=n)


def test_checker_accepts_engine_proofs():
    rng = random.Random(55)
    for _ in range(60):
        problem = _random_problem(rng)
        for mode in ("discard", "retranslate", "compact"):
            summary, steps = saturate(problem, mode=mode, max_rounds=2)
            verdict = check_proof(problem, steps, summary)
            assert verdict.accepted, (mode, verdict.failing_step, verdict.reason)
            assert verdict.summary.bound_m == summary.bound_m


def test_checker_accepts_empty_proof():
    problem = normalize([(xor([1, 2], 1), F(1))], var_count=2)
    verdict = check_proof(problem, [], None)
    assert verdict.accepted
    assert verdict.summary.bound_m == 0


def test_checker_rejects_tampered_residue_weight():
    items = [(xor([1, 2], 0), F(1)), (xor([1, 3], 0), F(1)), (xor([2, 3], 1), F(1))]
    summary, steps = saturate(items)
    chain_index = next(i for i, s in enumerate(steps) if s.rule.startswith("chain"))
    step = steps[chain_index]
    tampered = replace(step, residues=((step.residues[0][0], F(1)), step.residues[1]))
    broken = list(steps)
    broken[chain_index] = tampered
    verdict = check_proof(items, broken, None)
    assert not verdict.accepted
    assert verdict.failing_step == chain_index


def test_checker_rejects_tampered_fields_everywhere():
    rng = random.Random(901)
    tampered_total = 0
    for _ in range(20):
        problem = _random_problem(rng)
        summary, steps = saturate(problem)
        if not steps:
            continue
        for index, step in enumerate(steps):
            mutations = [replace(step, weight=step.weight * 2)]
            constraint, mult = step.conclusions[0]
            if constraint.vars:
                flipped = XorConstraint(constraint.vars, constraint.parity ^ 1)
                mutations.append(
                    replace(step, conclusions=((flipped, mult),) + step.conclusions[1:])
                )
            premise = step.premises[0]
            if isinstance(premise, XorConstraint):
                flipped_premise = XorConstraint(premise.vars, premise.parity ^ 1)
                mutations.append(
                    replace(step, premises=(flipped_premise,) + step.premises[1:])
                )
            if step.residues:
                cl, mult = step.residues[0]
                mutations.append(replace(step, residues=((cl, F(1)),) + step.residues[1:]))
            for mutant in mutations:
                broken = list(steps)
                broken[index] = mutant
                verdict = check_proof(problem, broken, summary)
                assert not verdict.accepted
                tampered_total += 1
    assert tampered_total > 50


def test_checker_rejects_wrong_claimed_bound():
    items = [(xor([1], 0), F(1)), (xor([1], 1), F(1))]
    summary, steps = saturate(items)
    inflated = replace(summary, bound_m=summary.bound_m + 1)
    verdict = check_proof(items, steps, inflated)
    assert not verdict.accepted
    assert "bound" in verdict.reason


def test_checker_rejects_stale_fresh_variable():
    state_items = [(xor([1, 2], 0), F(1)), (xor([1, 3], 0), F(1))]
    with pytest.raises(PatternError):
        build_step("compact00", (xor([1, 2], 0), xor([1, 3], 0)), F(1), fresh_var=2)

    step = build_step("compact00", (xor([1, 2], 0), xor([1, 3], 0)), F(1), fresh_var=4)
    # variable 4 already occurs elsewhere in the input, so it is not fresh
    verdict = check_proof(state_items + [(xor([4, 5], 1), F(1))], [step], None)
    assert not verdict.accepted
    assert "fresh" in verdict.reason


# ---------------------------------------------------------------------------
# Linking back to the source


def test_bound_to_original_arithmetic():
    report = compile_maxsat(parse_cnf("p cnf 1 2\n1 0\n-1 0\n"))
    summary, _ = saturate(report.problem)
    verdict = bound_to_original(summary, report)
    assert verdict.unsat_proven and verdict.message == "UNSAT lb=1/1"

    weaker = replace(summary, bound_m=report.shift)
    verdict = bound_to_original(weaker, report)
    assert not verdict.unsat_proven
    assert verdict.lower_bound == 0
    assert verdict.message.startswith("UNKNOWN lb=")

    stronger = replace(summary, bound_m=report.shift + F(5, 2))
    verdict = bound_to_original(stronger, report)
    assert verdict.lower_bound == F(5, 2)


def test_bound_to_original_provenance_check():
    report = compile_maxsat(parse_cnf("p cnf 1 2\n1 0\n-1 0\n"))
    other = compile_maxsat(parse_cnf("p cnf 2 1\n1 2 0\n"))
    summary, _ = saturate(other.problem)
    with pytest.raises(ProvenanceError):
        bound_to_original(summary, report)
