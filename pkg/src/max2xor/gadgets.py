"""Clause-to-parity translations and the MaxSAT compiler.

Each translation maps one weighted OR clause to a weighted constraint
multiset whose best auxiliary extension scores ``alpha`` when the clause is
satisfied and ``alpha - 1`` otherwise, with total weight ``beta``.  The
compiler applies a translation per clause, normalizes the union, and records
the cost shift ``sum w * (beta_k - alpha_k)`` that links the compiled
problem's cost back to the source instance.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from .core import (
    ArityError,
    HALF,
    Max2XorError,
    OrClause,
    ShapeError,
    SizeGuardError,
    X2XProblem,
    XorConstraint,
    ZERO,
    check_weight,
    clause,
    normalize,
    xor,
)
from .textio import CutGraph, WcnfInstance, emit_x2x

XorItems = List[Tuple[XorConstraint, Fraction]]


@dataclass(frozen=True, order=True)
class ParityConstraint:
    """XOR constraint of arbitrary arity; only the full parity expansion emits these."""

    vars: Tuple[int, ...]
    parity: int

    def __post_init__(self):
        if list(self.vars) != sorted(set(self.vars)):
            raise Max2XorError(f"variables must be sorted and distinct: {self.vars}")

    def satisfied_by(self, assignment) -> bool:
        acc = 0
        for v in self.vars:
            acc ^= assignment[v] & 1
        return acc == self.parity


@dataclass(frozen=True)
class GadgetParams:
    """Claimed translation parameters; ``beta`` equals the emitted total weight."""

    alpha: Fraction
    beta: Fraction
    aux_vars: Optional[int] = None

    @property
    def gap(self) -> Fraction:
        """Cost shift per unit of source weight; proof bounds pay this much."""
        return self.beta - self.alpha


def compose_params(first: GadgetParams, second: GadgetParams) -> GadgetParams:
    """Parameters of applying ``second`` to every constraint ``first`` emits."""
    return GadgetParams(
        alpha=first.beta * (second.alpha - 1) + first.alpha,
        beta=first.beta * second.beta,
    )


def clause_params(k: int) -> GadgetParams:
    """Shipped per-arity parameters of the direct clause translation."""
    if k < 1:
        raise ArityError(f"no translation parameters for arity {k}")
    if k == 1:
        return GadgetParams(Fraction(1), Fraction(1), 0)
    return GadgetParams(Fraction(k - 1), Fraction(3 * (k - 1), 2), k - 2)


class VarAllocator:
    """Serial fresh-variable source; ids strictly increase."""

    def __init__(self, first_id: int):
        self.next_id = first_id

    def fresh(self) -> int:
        v = self.next_id
        self.next_id += 1
        return v


# ---------------------------------------------------------------------------
# Tree shapes


ShapeNode = Union[int, tuple]


@dataclass(frozen=True)
class TreeShape:
    """Binary tree over clause positions 1..k, leaves in left-to-right order.

    The degenerate left comb reproduces the sequential translation; any other
    shape groups literals in parallel.
    """

    root: ShapeNode

    def __post_init__(self):
        leaves = _leaves(self.root)
        if leaves != list(range(1, len(leaves) + 1)):
            raise ShapeError(f"leaves must be 1..k in order, got {leaves}")
        if len(leaves) < 2:
            raise ShapeError("a shape needs at least two leaves")

    @property
    def k(self) -> int:
        return len(_leaves(self.root))

    def format(self) -> str:
        return _format_node(self.root)

    @staticmethod
    def parse(text: str) -> "TreeShape":
        root, rest = _parse_node(text.strip())
        if rest.strip():
            raise ShapeError(f"trailing input after shape: {rest!r}")
        return TreeShape(root)

    @staticmethod
    def left_comb(k: int) -> "TreeShape":
        if k < 2:
            raise ShapeError("a shape needs at least two leaves")
        node: ShapeNode = 1
        for i in range(2, k + 1):
            node = (node, i)
        return TreeShape(node)

    @staticmethod
    def balanced(k: int) -> "TreeShape":
        def build(lo: int, hi: int) -> ShapeNode:
            if lo == hi:
                return lo
            mid = (lo + hi) // 2
            return (build(lo, mid), build(mid + 1, hi))

        if k < 2:
            raise ShapeError("a shape needs at least two leaves")
        return TreeShape(build(1, k))

    @staticmethod
    def random(k: int, rng) -> "TreeShape":
        def build(lo: int, hi: int) -> ShapeNode:
            if lo == hi:
                return lo
            split = rng.randint(lo, hi - 1)
            return (build(lo, split), build(split + 1, hi))

        if k < 2:
            raise ShapeError("a shape needs at least two leaves")
        return TreeShape(build(1, k))

    @staticmethod
    def enumerate_all(k: int):
        """All binary trees with k ordered leaves (Catalan(k-1) shapes)."""

        def build(lo: int, hi: int):
            if lo == hi:
                yield lo
                return
            for split in range(lo, hi):
                for left in build(lo, split):
                    for right in build(split + 1, hi):
                        yield (left, right)

        for root in build(1, k):
            yield TreeShape(root)


def _leaves(node: ShapeNode) -> List[int]:
    if isinstance(node, int):
        return [node]
    left, right = node
    return _leaves(left) + _leaves(right)


def _format_node(node: ShapeNode) -> str:
    if isinstance(node, int):
        return str(node)
    left, right = node
    return f"({_format_node(left)} {_format_node(right)})"


def _parse_node(text: str) -> Tuple[ShapeNode, str]:
    text = text.lstrip()
    if not text:
        raise ShapeError("unexpected end of shape")
    if text[0] == "(":
        left, rest = _parse_node(text[1:])
        right, rest = _parse_node(rest)
        rest = rest.lstrip()
        if not rest.startswith(")"):
            raise ShapeError("expected ')' in shape")
        return (left, right), rest[1:]
    digits = ""
    while text and text[0].isdigit():
        digits, text = digits + text[0], text[1:]
    if not digits:
        raise ShapeError(f"expected leaf index in shape near {text[:10]!r}")
    return int(digits), text


# ---------------------------------------------------------------------------
# Translations

# A term is (variable id or None for the constant one, negation bit).
Term = Tuple[Optional[int], int]

ANCHORED = None  # pass as anchor to substitute the constant one for it


def _literal_term(lit: int) -> Term:
    return abs(lit), 1 if lit < 0 else 0


def _pair_constraint(t1: Term, t2: Term, target: int) -> XorConstraint:
    parity = target
    variables = []
    for var, neg in (t1, t2):
        parity ^= neg
        if var is None:
            parity ^= 1  # the constant one
        else:
            variables.append(var)
    return xor(variables, parity)


def _triangle(out: XorItems, left: Term, right: Term, parent: Term) -> None:
    out.append((_pair_constraint(left, right, 1), HALF))
    out.append((_pair_constraint(left, parent, 0), HALF))
    out.append((_pair_constraint(right, parent, 0), HALF))


def expand_full_parity(cl: OrClause, max_arity: int = 12) -> List[Tuple[ParityConstraint, Fraction]]:
    """Aux-free parity expansion: one constraint per nonempty literal subset.

    Exponential in the clause width, hence the guard; used as a cross-check
    oracle, never by the compiler for wide clauses.
    """
    k = cl.k
    if k < 1:
        raise ArityError("cannot expand the empty clause")
    if k > max_arity:
        raise SizeGuardError(f"full expansion of width {k} exceeds the guard of {max_arity}")
    weight = Fraction(1, 2 ** (k - 1))
    out = []
    for mask in range(1, 1 << k):
        variables = []
        parity = 1
        for pos in range(k):
            if mask >> pos & 1:
                lit = cl.lits[pos]
                variables.append(abs(lit))
                if lit < 0:
                    parity ^= 1
        out.append((ParityConstraint(tuple(sorted(variables)), parity), weight))
    return out


def binary_gadget(weight: Fraction, cl: OrClause) -> XorItems:
    """Direct translation of a unit or binary clause; no auxiliary variables.

    Units map to a single parity constraint of full weight; binary clauses to
    the three half-weight constraints over their variables.
    """
    weight = check_weight(weight)
    if cl.k == 1:
        (lit,) = cl.lits
        return [(xor([abs(lit)], 1 if lit > 0 else 0), weight)]
    if cl.k == 2:
        (v1, n1), (v2, n2) = map(_literal_term, cl.lits)
        half = weight / 2
        return [
            (xor([v1], 1 ^ n1), half),
            (xor([v2], 1 ^ n2), half),
            (xor([v1, v2], 1 ^ n1 ^ n2), half),
        ]
    raise ArityError(f"binary translation needs width 1 or 2, got {cl.k}")


def chain_to_3sat(cl: OrClause, alloc: VarAllocator) -> List[Tuple[OrClause, Fraction]]:
    """Split a wide clause into a chain of ternary clauses with linking variables."""
    k = cl.k
    if k < 4:
        raise ArityError(f"chain splitting needs width >= 4, got {k}")
    links = [alloc.fresh() for _ in range(k - 3)]
    lits = cl.lits
    out = [(clause(lits[0], lits[1], links[0]), Fraction(1))]
    for i in range(k - 4):
        out.append((clause(-links[i], lits[i + 2], links[i + 1]), Fraction(1)))
    out.append((clause(-links[-1], lits[k - 2], lits[k - 1]), Fraction(1)))
    return out


def trevisan_3to2(cl: OrClause, alloc: VarAllocator) -> List[Tuple[OrClause, Fraction]]:
    """Trevisan-style ternary-to-binary clause translation with one fresh variable."""
    if cl.k != 3:
        raise ArityError(f"this translation needs width 3, got {cl.k}")
    l1, l2, l3 = cl.lits
    b = alloc.fresh()
    return [
        (clause(l1, l3), HALF),
        (clause(-l1, -l3), HALF),
        (clause(l1, -b), HALF),
        (clause(-l1, b), HALF),
        (clause(l3, -b), HALF),
        (clause(-l3, b), HALF),
        (clause(l2, b), Fraction(1)),
    ]


def sequential_gadget(
    cl: OrClause, anchor: Optional[int], alloc: VarAllocator
) -> XorItems:
    """Left-to-right clause translation: one half-weight triangle per position.

    ``anchor`` is the collector variable of the last triangle; pass ``None``
    to substitute the constant one for it (the form the compiler uses).
    Emits 3(k-1) constraints over k-2 fresh variables.
    """
    k = cl.k
    if k < 2:
        raise ArityError(f"sequential translation needs width >= 2, got {k}")
    anchor_term: Term = (anchor, 0) if anchor is not None else (None, 0)
    out: XorItems = []
    prev = _literal_term(cl.lits[0])
    for i in range(1, k):
        parent = anchor_term if i == k - 1 else (alloc.fresh(), 0)
        _triangle(out, prev, _literal_term(cl.lits[i]), parent)
        prev = parent
    return out


def tree_gadget(
    cl: OrClause, shape: TreeShape, anchor: Optional[int], alloc: VarAllocator
) -> XorItems:
    """Tree-structured clause translation; the left comb equals the sequential one.

    Each internal node contributes one half-weight triangle between its two
    children and its own collector variable; the root's collector is the
    anchor (or the constant one when ``anchor`` is ``None``).
    """
    if shape.k != cl.k:
        raise ShapeError(f"shape has {shape.k} leaves but the clause has width {cl.k}")
    out: XorItems = []

    def walk(node: ShapeNode, root: bool) -> Term:
        if isinstance(node, int):
            return _literal_term(cl.lits[node - 1])
        left, right = node
        left_term = walk(left, False)
        right_term = walk(right, False)
        parent: Term = ((anchor, 0) if anchor is not None else (None, 0)) if root \
            else (alloc.fresh(), 0)
        _triangle(out, left_term, right_term, parent)
        return parent

    walk(shape.root, True)
    return out


def substitute_anchor(items: XorItems, anchor: int) -> XorItems:
    """Fix a translation's anchor variable to the constant one."""
    out: XorItems = []
    for constraint, weight in items:
        if anchor in constraint.vars:
            rest = tuple(v for v in constraint.vars if v != anchor)
            constraint = XorConstraint(rest, constraint.parity ^ 1)
        out.append((constraint, weight))
    return out


# ---------------------------------------------------------------------------
# Whole-instance compilation


@dataclass
class CompileReport:
    """Compiled problem plus the bookkeeping that ties it to the source.

    ``shift`` is the exact amount by which the compiled cost exceeds the
    source cost; a derived empty-clause weight of at least ``shift + 1``
    proves the (decision) source unsatisfiable.
    """

    problem: X2XProblem
    shift: Fraction
    aux_map: Dict[int, int] = field(default_factory=dict)
    params_per_arity: Dict[int, GadgetParams] = field(default_factory=dict)
    provenance: str = ""

    @property
    def threshold(self) -> Fraction:
        return self.shift + 1


STRATEGIES = ("sequential", "tree", "full")


def problem_digest(problem: X2XProblem) -> str:
    return hashlib.sha256(emit_x2x(problem).encode()).hexdigest()[:16]


def compile_maxsat(
    instance: WcnfInstance,
    strategy: str = "sequential",
    shapes: Optional[Dict[int, TreeShape]] = None,
) -> CompileReport:
    """Translate every clause, normalize the union, and report the cost shift.

    Unit and binary clauses always use the direct translation (shift 0 and
    w/2).  Wider clauses use the sequential or tree translation with the
    anchor substituted by the constant one (shift w*(k-1)/2).  The ``full``
    strategy is the aux-free expansion, which coincides with the direct
    translation and is therefore only accepted up to width 2.  Empty clauses
    credit their weight straight to the floor.
    """
    if strategy not in STRATEGIES:
        raise Max2XorError(f"unknown strategy {strategy!r}; pick one of {STRATEGIES}")
    shapes = shapes or {}
    alloc = VarAllocator(instance.var_count + 1)
    raw: XorItems = []
    floor = ZERO
    shift = ZERO
    aux_map: Dict[int, int] = {}
    params: Dict[int, GadgetParams] = {}

    for index, (cl, weight) in enumerate(instance.clauses):
        k = cl.k
        if k == 0:
            floor += check_weight(weight)
            continue
        if k <= 2:
            raw.extend(binary_gadget(weight, cl))
        else:
            if strategy == "full":
                raise ArityError(
                    f"the full-expansion strategy only covers widths up to 2, "
                    f"clause {index} has width {k}"
                )
            first_fresh = alloc.next_id
            if strategy == "sequential":
                items = sequential_gadget(cl, ANCHORED, alloc)
            else:
                shape = shapes.get(index) or TreeShape.balanced(k)
                items = tree_gadget(cl, shape, ANCHORED, alloc)
            raw.extend((constraint, weight * w) for constraint, w in items)
            for fresh in range(first_fresh, alloc.next_id):
                aux_map[fresh] = index
        shift += weight * Fraction(k - 1, 2) if k >= 2 else ZERO
        params.setdefault(k, clause_params(k))

    problem = normalize(raw, var_count=alloc.next_id - 1, floor=floor)
    return CompileReport(
        problem=problem,
        shift=shift,
        aux_map=aux_map,
        params_per_arity=params,
        provenance=problem_digest(problem),
    )


# ---------------------------------------------------------------------------
# MaxCUT export


def to_maxcut(problem: X2XProblem, variant: str = "single") -> CutGraph:
    """Rewrite a parity problem as a weighted cut instance.

    Every 2-variable parity-1 constraint is an edge as is; parity-0
    constraints route through a fresh midpoint; unit constraints attach to
    the zero anchor (``single``) or to the pair of anchors bridged by one
    balancing edge of weight min(total x=0 weight, total x=1 weight)
    (``double``).  The problem's floor is metadata and not represented.
    """
    if variant not in ("single", "double"):
        raise Max2XorError(f"unknown cut variant {variant!r}")
    alloc = VarAllocator(problem.var_count + 1)
    anchor_zero = alloc.fresh()
    anchor_one = alloc.fresh() if variant == "double" else None
    graph = CutGraph(node_count=0, anchor_zero=anchor_zero, anchor_one=anchor_one)

    zero_total = ZERO
    one_total = ZERO
    for constraint, weight in problem.sorted_entries():
        if constraint.arity == 1:
            (v,) = constraint.vars
            if constraint.parity == 1:
                graph.add_edge(v, anchor_zero, weight)
                one_total += weight
            elif variant == "single":
                midpoint = alloc.fresh()
                graph.add_edge(v, midpoint, weight)
                graph.add_edge(midpoint, anchor_zero, weight)
                zero_total += weight
            else:
                graph.add_edge(v, anchor_one, weight)
                zero_total += weight
        else:
            u, v = constraint.vars
            if constraint.parity == 1:
                graph.add_edge(u, v, weight)
            else:
                midpoint = alloc.fresh()
                graph.add_edge(u, midpoint, weight)
                graph.add_edge(midpoint, v, weight)

    if variant == "double":
        balance = min(zero_total, one_total)
        if balance > 0:
            graph.add_edge(anchor_zero, anchor_one, balance)
    graph.node_count = alloc.next_id - 1
    return graph
