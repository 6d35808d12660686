"""Counting logic and graded modal logic: syntax, metrics, evaluation and the
S-expression text format."""

import logging
import re
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Mapping, Optional, Tuple, Union

from modules.exceptions import FormulaSyntaxError, MalformedInputError, UnboundVariableError
from modules.structures import PointedStructure, RelStructure

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Atom:
    symbol: str
    variables: Tuple[str, ...]


@dataclass(frozen=True)
class Equal:
    left: str
    right: str


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    parts: Tuple["Formula", ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))


@dataclass(frozen=True)
class Or:
    parts: Tuple["Formula", ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))


@dataclass(frozen=True)
class CountExistsAtLeast:
    """Holds when at least `threshold` distinct elements satisfy the body."""

    threshold: int
    variable: str
    body: "Formula"

    def __post_init__(self):
        if not isinstance(self.threshold, int) or self.threshold < 0:
            raise MalformedInputError(f"Counting threshold must be >= 0, got {self.threshold}")


@dataclass(frozen=True)
class CountExistsAtMost:
    """Holds when at most `threshold` distinct elements satisfy the body."""

    threshold: int
    variable: str
    body: "Formula"

    def __post_init__(self):
        if not isinstance(self.threshold, int) or self.threshold < 0:
            raise MalformedInputError(f"Counting threshold must be >= 0, got {self.threshold}")


@dataclass(frozen=True)
class Prop:
    name: str


@dataclass(frozen=True)
class GradedDiamond:
    """At least `grade` distinct successors along `label` satisfy the body."""

    label: str
    grade: int
    body: "Formula"

    def __post_init__(self):
        if not isinstance(self.grade, int) or self.grade < 1:
            raise MalformedInputError(f"Modal grade must be >= 1, got {self.grade}")


@dataclass(frozen=True)
class GradedBox:
    label: str
    grade: int
    body: "Formula"

    def __post_init__(self):
        if not isinstance(self.grade, int) or self.grade < 1:
            raise MalformedInputError(f"Modal grade must be >= 1, got {self.grade}")


Formula = Union[Atom, Equal, Not, And, Or, CountExistsAtLeast, CountExistsAtMost, Prop, GradedDiamond, GradedBox]
Quantifier = (CountExistsAtLeast, CountExistsAtMost)

TRUE = And(())
FALSE = Or(())


def exists(variable: str, body: Formula) -> CountExistsAtLeast:
    return CountExistsAtLeast(1, variable, body)


def children(node: Formula) -> Tuple[Formula, ...]:
    if isinstance(node, (And, Or)):
        return node.parts
    if isinstance(node, (Not, CountExistsAtLeast, CountExistsAtMost, GradedDiamond, GradedBox)):
        return (node.body,)
    return ()


def _fold(node: Formula, combine, memo: Dict[int, object]):
    """Bottom-up fold over a formula DAG, each shared node visited once."""
    key = id(node)
    if key not in memo:
        memo[key] = combine(node, [_fold(c, combine, memo) for c in children(node)])
    return memo[key]


def free_variables(node: Formula, memo: Optional[Dict[int, FrozenSet[str]]] = None) -> FrozenSet[str]:
    def combine(n, below):
        if isinstance(n, Atom):
            return frozenset(n.variables)
        if isinstance(n, Equal):
            return frozenset((n.left, n.right))
        merged = frozenset().union(*below) if below else frozenset()
        if isinstance(n, Quantifier):
            return merged - {n.variable}
        return merged

    return _fold(node, combine, {} if memo is None else memo)


def quantifier_depth(node: Formula) -> int:
    def combine(n, below):
        deepest = max(below, default=0)
        return deepest + 1 if isinstance(n, Quantifier) else deepest

    return _fold(node, combine, {})


def modal_depth(node: Formula) -> int:
    def combine(n, below):
        deepest = max(below, default=0)
        return deepest + 1 if isinstance(n, (GradedDiamond, GradedBox)) else deepest

    return _fold(node, combine, {})


def variables(node: Formula) -> FrozenSet[str]:
    """Every variable name occurring in the formula, bound or free."""

    def combine(n, below):
        merged = frozenset().union(*below) if below else frozenset()
        if isinstance(n, Atom):
            return merged | set(n.variables)
        if isinstance(n, Equal):
            return merged | {n.left, n.right}
        if isinstance(n, Quantifier):
            return merged | {n.variable}
        return merged

    return _fold(node, combine, {})


def width(node: Formula) -> int:
    return len(variables(node))


def is_equality_free(node: Formula) -> bool:
    return _fold(node, lambda n, below: not isinstance(n, Equal) and all(below), {})


def node_count(node: Formula) -> int:
    """Number of distinct nodes in the formula DAG."""
    memo: Dict[int, object] = {}
    _fold(node, lambda n, below: None, memo)
    return len(memo)


def _check_symbols(A: RelStructure, node: Formula):
    def combine(n, below):
        if isinstance(n, Atom):
            if n.symbol not in A.signature or A.signature.arity(n.symbol) != len(n.variables):
                raise MalformedInputError(f"Atom {n.symbol}{n.variables} does not match the signature of {A.name}")
        return None

    _fold(node, combine, {})


def eval_formula(A: RelStructure, phi: Formula, env: Optional[Mapping[str, int]] = None) -> bool:
    """Evaluate a counting formula in A under a partial assignment."""
    env = dict(env or {})
    frees: Dict[int, FrozenSet[str]] = {}
    missing = free_variables(phi, frees) - set(env)
    if missing:
        raise UnboundVariableError(f"Free variables without a value: {sorted(missing)}")
    for value in env.values():
        if not isinstance(value, int) or not 0 <= value < A.size:
            raise MalformedInputError(f"Assigned element {value} is outside the universe of {A.name}")
    _check_symbols(A, phi)
    memo: Dict[Tuple, bool] = {}

    def evaluate(node: Formula, assignment: Dict[str, int]) -> bool:
        key = (id(node), tuple(sorted((v, assignment[v]) for v in frees[id(node)])))
        if key in memo:
            return memo[key]
        if isinstance(node, Atom):
            result = A.holds(node.symbol, [assignment[v] for v in node.variables])
        elif isinstance(node, Equal):
            result = assignment[node.left] == assignment[node.right]
        elif isinstance(node, Not):
            result = not evaluate(node.body, assignment)
        elif isinstance(node, And):
            result = all(evaluate(p, assignment) for p in node.parts)
        elif isinstance(node, Or):
            result = any(evaluate(p, assignment) for p in node.parts)
        elif isinstance(node, CountExistsAtLeast):
            result = _count_at_least(node, assignment)
        elif isinstance(node, CountExistsAtMost):
            result = not _count_at_least(CountExistsAtLeast(node.threshold + 1, node.variable, node.body),
                                         assignment)
        else:
            raise MalformedInputError(f"{type(node).__name__} is not a counting-logic node")
        memo[key] = result
        return result

    def _count_at_least(node: CountExistsAtLeast, assignment: Dict[str, int]) -> bool:
        if node.threshold == 0:
            return True
        if node.threshold > A.size:
            return False
        found = 0
        inner = dict(assignment)
        for a in A.universe:
            inner[node.variable] = a
            if evaluate(node.body, inner):
                found += 1
                if found >= node.threshold:
                    return True
            if found + (A.size - a - 1) < node.threshold:
                return False
        return False

    return evaluate(phi, env)


def eval_modal(P: PointedStructure, phi: Formula) -> bool:
    """Kripke semantics with graded modalities at the point of P."""
    A = P.structure
    memo: Dict[Tuple[int, int], bool] = {}
    successors: Dict[str, List[List[int]]] = {}
    for label in P.binary_symbols():
        succ: List[List[int]] = [[] for _ in A.universe]
        for a, b in A.tuples(label):
            succ[a].append(b)
        successors[label] = succ

    def diamond(label: str, grade: int, body: Formula, a: int, negate: bool) -> bool:
        if label not in successors:
            raise MalformedInputError(f"{label} is not a binary symbol of {P.name}")
        found = 0
        for b in successors[label][a]:
            if holds(body, b) != negate:
                found += 1
                if found >= grade:
                    return True
        return False

    def holds(node: Formula, a: int) -> bool:
        key = (id(node), a)
        if key in memo:
            return memo[key]
        if isinstance(node, Prop):
            if node.name not in P.unary_symbols():
                raise MalformedInputError(f"{node.name} is not a unary symbol of {P.name}")
            result = A.holds(node.name, (a,))
        elif isinstance(node, Not):
            result = not holds(node.body, a)
        elif isinstance(node, And):
            result = all(holds(p, a) for p in node.parts)
        elif isinstance(node, Or):
            result = any(holds(p, a) for p in node.parts)
        elif isinstance(node, GradedDiamond):
            result = diamond(node.label, node.grade, node.body, a, negate=False)
        elif isinstance(node, GradedBox):
            result = not diamond(node.label, node.grade, node.body, a, negate=True)
        else:
            raise MalformedInputError(f"{type(node).__name__} is not a modal node")
        memo[key] = result
        return result

    return holds(phi, P.point)


def standard_translation(phi: Formula, variable: str = "x", other: str = "y") -> Formula:
    """Counting formula in one free variable equivalent to a modal formula.

    Successive modalities alternate between the two variable names, so the
    translation never uses more than two.
    """
    memo: Dict[Tuple[int, str], Formula] = {}

    def tr(node: Formula, x: str, y: str) -> Formula:
        key = (id(node), x)
        if key in memo:
            return memo[key]
        if isinstance(node, Prop):
            result = Atom(node.name, (x,))
        elif isinstance(node, Not):
            result = Not(tr(node.body, x, y))
        elif isinstance(node, And):
            result = And(tuple(tr(p, x, y) for p in node.parts))
        elif isinstance(node, Or):
            result = Or(tuple(tr(p, x, y) for p in node.parts))
        elif isinstance(node, GradedDiamond):
            result = CountExistsAtLeast(node.grade, y, And((Atom(node.label, (x, y)), tr(node.body, y, x))))
        elif isinstance(node, GradedBox):
            inner = And((Atom(node.label, (x, y)), Not(tr(node.body, y, x))))
            result = Not(CountExistsAtLeast(node.grade, y, inner))
        else:
            raise MalformedInputError(f"{type(node).__name__} is not a modal node")
        memo[key] = result
        return result

    return tr(phi, variable, other)


_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def _tokenize(text: str) -> List[str]:
    return _TOKEN.findall(text)


def parse_formula(text: str) -> Formula:
    """Parse the prefix S-expression syntax, e.g. (geq 3 x (geq 2 y (E x y)))."""
    tokens = _tokenize(text)
    if not tokens:
        raise FormulaSyntaxError("Empty formula text")
    position = 0

    def take() -> str:
        nonlocal position
        if position >= len(tokens):
            raise FormulaSyntaxError("Unexpected end of formula text")
        token = tokens[position]
        position += 1
        return token

    def word() -> str:
        token = take()
        if token in "()":
            raise FormulaSyntaxError(f"Expected a name, got {token!r}")
        return token

    def number() -> int:
        token = word()
        if not token.isdigit():
            raise FormulaSyntaxError(f"Expected a natural number, got {token!r}")
        return int(token)

    def expression() -> Formula:
        token = take()
        if token == "true":
            return TRUE
        if token == "false":
            return FALSE
        if token != "(":
            raise FormulaSyntaxError(f"Expected '(' or a constant, got {token!r}")
        head = word()
        if head in ("geq", "leq"):
            threshold, variable, body = number(), word(), expression()
            node = (CountExistsAtLeast if head == "geq" else CountExistsAtMost)(threshold, variable, body)
        elif head == "exists":
            variable, body = word(), expression()
            node = exists(variable, body)
        elif head in ("and", "or"):
            parts = []
            while position < len(tokens) and tokens[position] != ")":
                parts.append(expression())
            node = (And if head == "and" else Or)(tuple(parts))
        elif head == "not":
            node = Not(expression())
        elif head == "=":
            node = Equal(word(), word())
        elif head == "prop":
            node = Prop(word())
        elif head in ("diamond", "box"):
            label, grade, body = word(), number(), expression()
            node = (GradedDiamond if head == "diamond" else GradedBox)(label, grade, body)
        else:
            names = []
            while position < len(tokens) and tokens[position] != ")":
                names.append(word())
            if not names:
                raise FormulaSyntaxError(f"Atom {head} has no arguments")
            node = Atom(head, tuple(names))
        if take() != ")":
            raise FormulaSyntaxError(f"Expected ')' after {head} form")
        return node

    try:
        result = expression()
    except MalformedInputError as e:
        raise FormulaSyntaxError(str(e)) from e
    if position != len(tokens):
        raise FormulaSyntaxError(f"Trailing input after position {position}")
    return result


def format_formula(node: Formula) -> str:
    if isinstance(node, Atom):
        return f"({node.symbol} {' '.join(node.variables)})"
    if isinstance(node, Equal):
        return f"(= {node.left} {node.right})"
    if isinstance(node, Not):
        return f"(not {format_formula(node.body)})"
    if isinstance(node, (And, Or)):
        if not node.parts:
            return "true" if isinstance(node, And) else "false"
        head = "and" if isinstance(node, And) else "or"
        return f"({head} {' '.join(format_formula(p) for p in node.parts)})"
    if isinstance(node, CountExistsAtLeast):
        if node.threshold == 1:
            return f"(exists {node.variable} {format_formula(node.body)})"
        return f"(geq {node.threshold} {node.variable} {format_formula(node.body)})"
    if isinstance(node, CountExistsAtMost):
        return f"(leq {node.threshold} {node.variable} {format_formula(node.body)})"
    if isinstance(node, Prop):
        return f"(prop {node.name})"
    if isinstance(node, GradedDiamond):
        return f"(diamond {node.label} {node.grade} {format_formula(node.body)})"
    if isinstance(node, GradedBox):
        return f"(box {node.label} {node.grade} {format_formula(node.body)})"
    raise MalformedInputError(f"Unknown formula node {node!r}")
