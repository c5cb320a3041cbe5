"""Exact-weight parity constraint model.

Everything downstream (gadget translations, brute-force oracles, the
resolution engine) works on the types defined here: OR clauses over signed
DIMACS-style literals, parity (XOR) constraints with at most two variables,
and normalized weighted problems.  All weights are `fractions.Fraction`;
there is no floating point anywhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Mapping, NamedTuple, Optional, Tuple

Rational = Fraction
Var = int  # positive variable id
Assignment = Mapping[int, int]

ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)


class Max2XorError(Exception):
    """Base class for all errors raised by this package."""


class InvalidWeightError(Max2XorError):
    """A constraint weight was zero or negative."""


class InvalidClauseError(Max2XorError):
    """A clause contained a duplicated or complementary literal pair."""


class IncompleteAssignmentError(Max2XorError):
    """An assignment did not cover every variable of the problem."""


class ArityError(Max2XorError):
    """A translation was applied to a clause of unsupported width."""


class ShapeError(Max2XorError):
    """A tree shape did not match the clause it was applied to."""


class SizeGuardError(Max2XorError):
    """An exhaustive operation was asked to enumerate too many variables."""


class UnsupportedFeatureError(Max2XorError):
    """Input used a feature outside this package's scope (e.g. hard clauses)."""


class ParseError(Max2XorError):
    """Malformed textual input; carries a 1-based line number when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


def check_weight(weight: Fraction) -> Fraction:
    weight = Fraction(weight)
    if weight <= 0:
        raise InvalidWeightError(f"weight must be positive, got {weight}")
    return weight


@dataclass(frozen=True, order=True)
class XorConstraint:
    """Parity equation over at most two variables: XOR of `vars` equals `parity`.

    The XOR over the empty variable set is 0, so ``((), 1)`` is the always
    false constraint (the empty clause) and ``((), 0)`` is the tautology.
    """

    vars: Tuple[int, ...]
    parity: int

    def __post_init__(self):
        if len(self.vars) > 2:
            raise ArityError(f"at most 2 variables per parity constraint, got {self.vars}")
        if list(self.vars) != sorted(set(self.vars)):
            raise InvalidClauseError(f"variables must be sorted and distinct: {self.vars}")
        if any(v <= 0 for v in self.vars):
            raise InvalidClauseError(f"variable ids must be positive: {self.vars}")
        if self.parity not in (0, 1):
            raise InvalidClauseError(f"parity must be 0 or 1, got {self.parity}")

    @property
    def arity(self) -> int:
        return len(self.vars)

    def satisfied_by(self, assignment: Assignment) -> bool:
        acc = 0
        for v in self.vars:
            if v not in assignment:
                raise IncompleteAssignmentError(f"assignment misses variable {v}")
            acc ^= assignment[v] & 1
        return acc == self.parity


def xor(variables: Iterable[int], parity: int) -> XorConstraint:
    """Canonical parity constraint: sorts variables and applies x+x=0 cancellation."""
    counts: Dict[int, int] = {}
    for v in variables:
        counts[v] = counts.get(v, 0) + 1
    kept = tuple(sorted(v for v, c in counts.items() if c % 2 == 1))
    return XorConstraint(kept, parity & 1)


EMPTY_CLAUSE = XorConstraint((), 1)
TAUTOLOGY = XorConstraint((), 0)


@dataclass(frozen=True, order=True)
class OrClause:
    """Disjunction of signed DIMACS literals, sorted by variable, duplicate-free.

    The empty clause (k = 0) is the always-false SAT clause.
    """

    lits: Tuple[int, ...]

    def __post_init__(self):
        if any(l == 0 for l in self.lits):
            raise InvalidClauseError("literal 0 is not allowed")
        seen = set()
        for l in self.lits:
            if abs(l) in seen:
                raise InvalidClauseError(
                    f"duplicate or complementary literals on variable {abs(l)}: {self.lits}"
                )
            seen.add(abs(l))
        if list(self.lits) != sorted(self.lits, key=abs):
            raise InvalidClauseError(f"literals must be sorted by variable id: {self.lits}")

    @property
    def k(self) -> int:
        return len(self.lits)

    def variables(self) -> Tuple[int, ...]:
        return tuple(abs(l) for l in self.lits)

    def satisfied_by(self, assignment: Assignment) -> bool:
        for l in self.lits:
            v = abs(l)
            if v not in assignment:
                raise IncompleteAssignmentError(f"assignment misses variable {v}")
            if (assignment[v] & 1) == (1 if l > 0 else 0):
                return True
        return False


def clause(*lits: int) -> OrClause:
    return OrClause(tuple(sorted(lits, key=abs)))


class EvalResult(NamedTuple):
    satisfied: Fraction
    unsatisfied: Fraction


@dataclass
class X2XProblem:
    """Normalized multiset of weighted parity constraints plus a cost floor.

    Invariants (established by :func:`normalize`):
      * every stored weight is positive,
      * each variable subset carries at most one parity,
      * the empty-set constraints are never stored: the tautology is dropped
        and the weight of the always-false constraint lives in ``floor``.

    For every assignment I, the unsatisfied weight of the problem is
    ``floor`` plus the unsatisfied weight of the stored entries, so the floor
    is a guaranteed lower bound on the cost.
    """

    entries: Dict[XorConstraint, Fraction]
    floor: Fraction = ZERO
    var_count: int = 0

    def weight(self) -> Fraction:
        """Total stored weight (the floor is not an entry)."""
        return sum(self.entries.values(), ZERO)

    def variables(self) -> Tuple[int, ...]:
        seen = set()
        for c in self.entries:
            seen.update(c.vars)
        return tuple(sorted(seen))

    def sorted_entries(self) -> Tuple[Tuple[XorConstraint, Fraction], ...]:
        return tuple(sorted(self.entries.items()))


def normalize(
    raw: Iterable[Tuple[XorConstraint, Fraction]],
    var_count: Optional[int] = None,
    floor: Fraction = ZERO,
) -> X2XProblem:
    """Merge equal constraints, cancel opposite parities into the floor.

    A pair ``<w> C=0, <w> C=1`` always falsifies exactly weight w, so it is
    replaced by adding w to the floor; this keeps the unsatisfied weight of
    the problem identical for every assignment.
    """
    merged: Dict[XorConstraint, Fraction] = {}
    max_var = 0
    for constraint, weight in raw:
        weight = check_weight(weight)
        merged[constraint] = merged.get(constraint, ZERO) + weight
        if constraint.vars:
            max_var = max(max_var, constraint.vars[-1])

    floor = Fraction(floor)
    entries: Dict[XorConstraint, Fraction] = {}
    for constraint in sorted(merged):
        if constraint.parity == 1:
            continue  # handled together with its opposite below
        opposite = XorConstraint(constraint.vars, 1)
        w0 = merged.get(constraint, ZERO)
        w1 = merged.get(opposite, ZERO)
        cancel = min(w0, w1)
        floor += cancel
        w0 -= cancel
        w1 -= cancel
        if w0 > 0:
            entries[constraint] = w0
        if w1 > 0:
            entries[opposite] = w1
    for constraint in sorted(merged):
        if constraint.parity == 1 and XorConstraint(constraint.vars, 0) not in merged:
            entries[constraint] = merged[constraint]

    # Empty-set constraints never stay stored.
    entries.pop(TAUTOLOGY, None)
    empty = entries.pop(EMPTY_CLAUSE, None)
    if empty is not None:
        floor += empty

    entries = dict(sorted(entries.items()))
    count = max(max_var, var_count or 0)
    return X2XProblem(entries=entries, floor=floor, var_count=count)


def evaluate(problem: X2XProblem, assignment: Assignment) -> EvalResult:
    """Exact satisfied / unsatisfied weights; the floor counts as unsatisfied."""
    satisfied = ZERO
    unsatisfied = problem.floor
    for constraint, weight in problem.entries.items():
        if constraint.satisfied_by(assignment):
            satisfied += weight
        else:
            unsatisfied += weight
    return EvalResult(satisfied, unsatisfied)


def substitute_constant(problem: X2XProblem, var: int, value: int) -> X2XProblem:
    """Fix ``var`` to a constant bit and renormalize.

    Every constraint containing the variable drops it and folds the value
    into its parity; unsatisfied weight is preserved for all assignments
    that agree with the substitution.
    """
    value &= 1
    raw = []
    for constraint, weight in problem.entries.items():
        if var in constraint.vars:
            rest = tuple(v for v in constraint.vars if v != var)
            raw.append((XorConstraint(rest, constraint.parity ^ value), weight))
        else:
            raw.append((constraint, weight))
    return normalize(raw, var_count=problem.var_count, floor=problem.floor)


def flip_variable(problem: X2XProblem, var: int) -> X2XProblem:
    """Replace a variable by its negation: constraints containing it toggle parity.

    An involution; no merging can occur because the affected keys map onto
    each other bijectively.
    """
    entries: Dict[XorConstraint, Fraction] = {}
    for constraint, weight in problem.entries.items():
        if var in constraint.vars:
            constraint = XorConstraint(constraint.vars, constraint.parity ^ 1)
        entries[constraint] = weight
    return X2XProblem(
        entries=dict(sorted(entries.items())),
        floor=problem.floor,
        var_count=problem.var_count,
    )


def format_rational(value: Fraction) -> str:
    """Serialize a rational as ``num/den``, always with an explicit denominator."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def parse_rational(token: str) -> Fraction:
    try:
        if "/" in token:
            num, den = token.split("/", 1)
            return Fraction(int(num), int(den))
        return Fraction(int(token))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational {token!r}") from exc
