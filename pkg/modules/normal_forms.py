"""Canonical conjunctive queries and their lift into counting logic."""

import logging
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from modules.covers import ForestCover, PebbleForestCover, validate_pebble_cover
from modules.exceptions import InvalidCoverError, PreconditionError, UnboundVariableError
from modules.formulas import (
    FALSE,
    TRUE,
    And,
    Atom,
    CountExistsAtLeast,
    CountExistsAtMost,
    Equal,
    Formula,
    Not,
    Or,
    exists,
    free_variables,
)
from modules.homcount import hom_count
from modules.structures import RelStructure

logger = logging.getLogger(__name__)


def _conjunction(parts: Sequence[Formula]) -> Formula:
    return parts[0] if len(parts) == 1 else And(tuple(parts))


def canonical_conjunctive_query(A: RelStructure,
                                layout: Union[ForestCover, PebbleForestCover, None] = None) -> Formula:
    """Primitive positive sentence satisfied exactly by the structures A maps into.

    Without a layout every element gets its own variable under a single chain
    of quantifiers. A forest cover nests the quantifiers along the forest; a
    pebble cover additionally names each element's variable after its pebble.
    """
    if A.size == 0:
        raise PreconditionError("The canonical query needs a non-empty structure")
    if layout is None:
        names = [f"x{a + 1}" for a in A.universe]
        body = _conjunction([Atom(sym, tuple(names[x] for x in t)) for sym, t in A.all_tuples()] or [TRUE])
        for name in reversed(names):
            body = exists(name, body)
        return body

    if isinstance(layout, PebbleForestCover):
        if layout.base != A or not validate_pebble_cover(A, layout, layout.k, max(layout.height, 1)):
            raise InvalidCoverError(f"Pebble cover does not validate for {A.name}")
        forest = layout.cover
        names = [f"x{layout.pebbles[a]}" for a in A.universe]
    else:
        if layout.base != A or not layout.is_compatible():
            raise InvalidCoverError(f"Forest cover is not compatible with {A.name}")
        forest = layout
        names = [f"x{a + 1}" for a in A.universe]

    attached: List[List[Formula]] = [[] for _ in A.universe]
    for sym, t in A.all_tuples():
        deepest = max(t, key=forest.depth)
        attached[deepest].append(Atom(sym, tuple(names[x] for x in t)))

    def node(a: int) -> Formula:
        parts = attached[a] + [node(c) for c in forest.children(a)]
        return exists(names[a], _conjunction(parts) if parts else TRUE)

    return _conjunction([node(r) for r in forest.roots()])


def is_primitive_positive(phi: Formula) -> bool:
    if isinstance(phi, Atom):
        return True
    if isinstance(phi, And):
        return all(is_primitive_positive(p) for p in phi.parts)
    if isinstance(phi, CountExistsAtLeast):
        return phi.threshold == 1 and is_primitive_positive(phi.body)
    return False


def count_witnesses(B: RelStructure, gamma: Formula, env: Optional[Mapping[str, int]] = None) -> int:
    """Number of ways to pick a witness for every existential quantifier of gamma."""
    if not is_primitive_positive(gamma):
        raise PreconditionError("Witness counting needs a primitive positive formula")
    env = dict(env or {})
    frees: Dict[int, frozenset] = {}
    missing = free_variables(gamma, frees) - set(env)
    if missing:
        raise UnboundVariableError(f"Free variables without a value: {sorted(missing)}")
    memo: Dict[Tuple, int] = {}

    def count(node: Formula, assignment: Dict[str, int]) -> int:
        key = (id(node), tuple(sorted((v, assignment[v]) for v in frees[id(node)])))
        if key in memo:
            return memo[key]
        if isinstance(node, Atom):
            result = int(B.holds(node.symbol, [assignment[v] for v in node.variables]))
        elif isinstance(node, And):
            result = 1
            for part in node.parts:
                result *= count(part, assignment)
                if result == 0:
                    break
        else:
            inner = dict(assignment)
            result = 0
            for b in B.universe:
                inner[node.variable] = b
                result += count(node.body, inner)
        memo[key] = result
        return result

    return count(gamma, env)


def integer_partitions(t: int, largest: Optional[int] = None) -> List[Tuple[int, ...]]:
    """Non-increasing tuples of positive integers summing to t."""
    largest = t if largest is None else largest
    if t == 0:
        return [()]
    result = []
    for first in range(min(t, largest), 0, -1):
        result.extend((first,) + rest for rest in integer_partitions(t - first, first))
    return result


class _Lifter:
    """Builds lifts of one primitive positive formula, sharing equal sub-lifts."""

    def __init__(self):
        self._memo: Dict[Tuple[int, int], Formula] = {}
        self._quantified: Dict[Tuple[int, int, int], Formula] = {}
        self._rests: Dict[int, Formula] = {}
        self._keep: List[Formula] = []

    def lift(self, node: Formula, t: int) -> Formula:
        key = (id(node), t)
        if key in self._memo:
            return self._memo[key]
        if isinstance(node, Atom):
            result = node if t == 1 else FALSE
        elif isinstance(node, And):
            result = self._lift_conjunction(node, t)
        elif isinstance(node, CountExistsAtLeast) and node.threshold == 1:
            result = self._lift_existential(node, t)
        else:
            raise PreconditionError(f"{type(node).__name__} cannot occur in a primitive positive formula")
        self._keep.append(node)
        self._memo[key] = result
        return result

    def _lift_conjunction(self, node: And, t: int) -> Formula:
        if not node.parts:
            return TRUE if t == 1 else FALSE
        if len(node.parts) == 1:
            return self.lift(node.parts[0], t)
        if id(node) not in self._rests:
            self._rests[id(node)] = _conjunction(node.parts[1:])
        first, rest = node.parts[0], self._rests[id(node)]
        disjuncts = []
        previous = None
        for t1 in range(1, t + 1):
            t2 = -(-t // t1)
            if t2 == previous:
                continue
            previous = t2
            disjuncts.append(And((self.lift(first, t1), self.lift(rest, t2))))
        return disjuncts[0] if len(disjuncts) == 1 else Or(tuple(disjuncts))

    def _lift_existential(self, node: CountExistsAtLeast, t: int) -> Formula:
        # a partition l of t asks for distinct witnesses with at least l_j
        # continuations each; with nested level sets that is one counting
        # quantifier per distinct part size
        disjuncts = []
        for levels in integer_partitions(t):
            conjuncts = []
            for s in sorted(set(levels), reverse=True):
                needed = sum(1 for level in levels if level >= s)
                key = (id(node), s, needed)
                if key not in self._quantified:
                    self._quantified[key] = CountExistsAtLeast(needed, node.variable, self.lift(node.body, s))
                conjuncts.append(self._quantified[key])
            disjuncts.append(_conjunction(conjuncts))
        return disjuncts[0] if len(disjuncts) == 1 else Or(tuple(disjuncts))


def threshold_lift(gamma: Formula, t: int) -> Formula:
    """Counting formula true exactly when gamma has at least t witness functions.

    The result keeps the quantifier depth and the variables of gamma and uses
    no negation or equality.
    """
    if t < 1:
        raise PreconditionError(f"Lift threshold must be >= 1, got {t}")
    if not is_primitive_positive(gamma):
        raise PreconditionError("Only primitive positive formulas can be lifted")
    return _Lifter().lift(gamma, t)


def edge_query(symbol: str = "E") -> Formula:
    return exists("x", exists("y", Atom(symbol, ("x", "y"))))


def distinct_edge_reference(symbol: str = "E") -> Formula:
    """The sentence with equality: some edge joins two distinct elements."""
    return exists("x", exists("y", And((Not(Equal("x", "y")), Atom(symbol, ("x", "y"))))))


def distinct_edge_sentence(bound: int, symbol: str = "E") -> Formula:
    """Equality-free rendering of distinct_edge_reference, exact on structures
    with at most `bound` ordered pairs."""
    if bound < 1:
        raise PreconditionError("Bound must be >= 1")
    lifter = _Lifter()
    pairs = edge_query(symbol)
    loop = Atom(symbol, ("x", "x"))
    disjuncts = [And((lifter.lift(pairs, i), CountExistsAtMost(i - 1, "x", loop))) for i in range(1, bound + 1)]
    return _conjunction(disjuncts) if len(disjuncts) == 1 else Or(tuple(disjuncts))


def hom_profile_sentence(B: RelStructure, sources: Sequence[RelStructure]) -> Formula:
    """Counting sentence satisfied by A iff hom(C, A) = hom(C, B) for every source C."""
    parts = []
    for C in sources:
        h = hom_count(C, B)
        lifter = _Lifter()
        query = canonical_conjunctive_query(C)
        at_least = lifter.lift(query, h) if h >= 1 else TRUE
        parts.append(And((at_least, Not(lifter.lift(query, h + 1)))))
        logger.debug(f"Profile of {B.name}: hom({C.name}) = {h}")
    return And(tuple(parts))
