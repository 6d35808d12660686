"""Deciders for counting-logic and graded-modal equivalence, k-WL refinement and
extraction of distinguishing formulas."""

import logging
from dataclasses import dataclass
from itertools import product
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

from config.settings import CARRIER_BOUND, EQUIV_SIZE_CAP
from modules.exceptions import PreconditionError, SizeCapExceededError
from modules.formulas import (
    TRUE,
    And,
    Atom,
    CountExistsAtLeast,
    Equal,
    Formula,
    GradedDiamond,
    Not,
    Prop,
)
from modules.structures import PointedStructure, RelStructure, require_same_signature

logger = logging.getLogger(__name__)

EMPTY = -1


class _Canon:
    """Shared dictionary turning hashable type descriptions into small integers."""

    def __init__(self):
        self._ids: Dict[Hashable, int] = {}

    def __call__(self, key: Hashable) -> int:
        return self._ids.setdefault(key, len(self._ids))


def _atomic_type(A: RelStructure, slots: Sequence[int]) -> Tuple:
    """Emptiness pattern, equality pattern and relation pattern of a slot tuple."""
    k = len(slots)
    occupied = [i for i in range(k) if slots[i] != EMPTY]
    equalities = tuple((i, j) for i in occupied for j in occupied if i < j and slots[i] == slots[j])
    facts = []
    for sym in A.signature.symbols:
        for choice in product(occupied, repeat=sym.arity):
            if A.holds(sym.name, [slots[i] for i in choice]):
                facts.append((sym.name, choice))
    return tuple(i in occupied for i in range(k)), equalities, tuple(facts)


class _CountingGame:
    """Type refinement over positions of k slots on two structures.

    Two positions share their level-r type exactly when Duplicator wins the
    r-round bijective k-pebble game from them.
    """

    def __init__(self, A: RelStructure, B: RelStructure, k: int):
        self.structures = (A, B)
        self.k = k
        self.canon = _Canon()
        self.positions: List[List[Tuple[int, ...]]] = []
        self.weights: List[List[int]] = []
        self.atomic: List[List[Tuple]] = []
        base = []
        for S in self.structures:
            slots = list(product(range(EMPTY, S.size), repeat=k))
            self.positions.append(slots)
            self.weights.append([(S.size + 1) ** (k - 1 - i) for i in range(k)])
            atomic = [_atomic_type(S, p) for p in slots]
            self.atomic.append(atomic)
            base.append([self.canon(("atomic", t)) for t in atomic])
        self.levels: List[List[List[int]]] = [base]
        self.stable = False

    def _class_count(self, level: List[List[int]]) -> int:
        return len(set(level[0]) | set(level[1]))

    def extension(self, s: int, index: int, slot: int, element: int) -> int:
        old = self.positions[s][index][slot]
        return index + (element - old) * self.weights[s][slot]

    def extension_multiset(self, level: int, s: int, index: int, slot: int) -> Tuple[int, ...]:
        types = self.levels[level][s]
        return tuple(sorted(types[self.extension(s, index, slot, a)] for a in self.structures[s].universe))

    def refine(self) -> bool:
        """Compute one more level; returns False once the partition is stable."""
        r = len(self.levels) - 1
        previous = self.levels[r]
        nxt = []
        for s in range(2):
            types = previous[s]
            nxt.append([self.canon((types[i], tuple(self.extension_multiset(r, s, i, slot)
                                                     for slot in range(self.k))))
                        for i in range(len(types))])
        grew = self._class_count(nxt) > self._class_count(previous)
        self.levels.append(nxt)
        if not grew:
            self.stable = True
        logger.debug(f"Counting game level {r + 1}: {self._class_count(nxt)} classes")
        return grew

    def run(self, rounds: Optional[int]) -> int:
        """Refine to `rounds` levels, or to the stable partition; returns the level used."""
        if rounds is None:
            while not self.stable:
                self.refine()
            return len(self.levels) - 1
        while len(self.levels) - 1 < rounds and not self.stable:
            self.refine()
        return min(rounds, len(self.levels) - 1)

    def type_of(self, level: int, s: int, index: int) -> int:
        return self.levels[min(level, len(self.levels) - 1)][s][index]


def _check_counting_inputs(A: RelStructure, B: RelStructure, depth: Optional[int], width: Optional[int],
                           cap: int) -> int:
    require_same_signature(A, B)
    if depth is None and width is None:
        raise PreconditionError("Give a quantifier depth, a variable width, or both")
    if depth is not None and depth < 0:
        raise PreconditionError("Depth must be >= 0")
    if width is not None and width < 1:
        raise PreconditionError("Width must be >= 1")
    if max(A.size, B.size) > cap:
        raise SizeCapExceededError(f"Structures of size {max(A.size, B.size)} exceed the equivalence cap {cap}")
    k = width if width is not None else max(depth, 1)
    positions = (max(A.size, B.size) + 1) ** k
    if positions > CARRIER_BOUND:
        raise SizeCapExceededError(f"{positions} game positions exceed the bound {CARRIER_BOUND}")
    return k


def equiv_counting(A: RelStructure, B: RelStructure, depth: Optional[int] = None, width: Optional[int] = None,
                   cap: int = EQUIV_SIZE_CAP) -> bool:
    """Equivalence in counting logic bounded by quantifier depth, variable width, or both.

    With only `width`, depth is unbounded and the refinement runs to its
    fixpoint.
    """
    k = _check_counting_inputs(A, B, depth, width, cap)
    if depth == 0:
        return True
    if A.size != B.size:
        return False
    game = _CountingGame(A, B, k)
    level = game.run(depth)
    return game.type_of(level, 0, 0) == game.type_of(level, 1, 0)


def distinguishing_formula(A: RelStructure, B: RelStructure, depth: Optional[int] = None,
                           width: Optional[int] = None, cap: int = EQUIV_SIZE_CAP) -> Optional[Formula]:
    """A sentence within the depth and width bounds true in A and false in B, or
    None when the two are equivalent."""
    k = _check_counting_inputs(A, B, depth, width, cap)
    if depth == 0:
        return None
    if A.size != B.size:
        bigger = max(A.size, B.size)
        sentence = CountExistsAtLeast(bigger, "x1", TRUE)
        return sentence if A.size > B.size else Not(sentence)
    game = _CountingGame(A, B, k)
    level = game.run(depth)
    if game.type_of(level, 0, 0) == game.type_of(level, 1, 0):
        return None
    memo: Dict[Tuple[int, int, int], Formula] = {}

    def first_split(p: Tuple[int, int], q: Tuple[int, int], bound: int) -> int:
        for r in range(bound + 1):
            if game.type_of(r, *p) != game.type_of(r, *q):
                return r
        raise PreconditionError("Positions are not separated within the bound")

    def separate(p: Tuple[int, int], q: Tuple[int, int], bound: int) -> Formula:
        r = first_split(p, q, bound)
        key = (r, game.type_of(r, *p), game.type_of(r, *q))
        if key in memo:
            return memo[key]
        if r == 0:
            formula = _separate_atomic(game, p, q)
        else:
            formula = _separate_by_counting(game, p, q, r, separate)
        memo[key] = formula
        return formula

    return separate((0, 0), (1, 0), level)


def _slot_variable(i: int) -> str:
    return f"x{i + 1}"


def _separate_atomic(game: _CountingGame, p: Tuple[int, int], q: Tuple[int, int]) -> Formula:
    tp, tq = game.atomic[p[0]][p[1]], game.atomic[q[0]][q[1]]
    if tp[0] != tq[0]:
        raise PreconditionError("Positions with different occupied slots cannot be separated")
    for pair in sorted(set(tp[1]) ^ set(tq[1])):
        atom = Equal(_slot_variable(pair[0]), _slot_variable(pair[1]))
        return atom if pair in tp[1] else Not(atom)
    for name, choice in sorted(set(tp[2]) ^ set(tq[2])):
        atom = Atom(name, tuple(_slot_variable(i) for i in choice))
        return atom if (name, choice) in tp[2] else Not(atom)
    raise PreconditionError("Atomic types do not differ")


def _separate_by_counting(game: _CountingGame, p, q, r: int, separate) -> Formula:
    for slot in range(game.k):
        counts_p = _extension_counts(game, r - 1, p, slot)
        counts_q = _extension_counts(game, r - 1, q, slot)
        if _tallies(counts_p) == _tallies(counts_q):
            continue
        tau = min(t for t in set(counts_p) | set(counts_q) if counts_p.get(t, (0,))[0] != counts_q.get(t, (0,))[0])
        representative = (counts_p.get(tau) or counts_q.get(tau))[1]
        others = sorted((set(counts_p) | set(counts_q)) - {tau})
        parts = []
        for other in others:
            rival = (counts_p.get(other) or counts_q.get(other))[1]
            parts.append(separate(representative, rival, r - 1))
        witness = And(tuple(parts)) if parts else TRUE
        cp, cq = counts_p.get(tau, (0,))[0], counts_q.get(tau, (0,))[0]
        variable = _slot_variable(slot)
        if cp > cq:
            return CountExistsAtLeast(cp, variable, witness)
        return Not(CountExistsAtLeast(cq, variable, witness))
    raise PreconditionError(f"Level {r} types differ but no slot separates them")


def _tallies(counts: Dict[int, Tuple]) -> Dict[int, int]:
    """Extension type to count, without representatives."""
    return {t: count for t, (count, _) in counts.items()}


def _extension_counts(game: _CountingGame, level: int, p: Tuple[int, int], slot: int) -> Dict[int, Tuple]:
    """Map extension type to (count, some position carrying it)."""
    s, index = p
    counts: Dict[int, Tuple] = {}
    for a in game.structures[s].universe:
        child = game.extension(s, index, slot, a)
        t = game.type_of(level, s, child)
        count, rep = counts.get(t, (0, (s, child)))
        counts[t] = (count + 1, rep)
    return counts


@dataclass(frozen=True)
class WLColoring:
    """Stable k-WL colouring of the k-tuples of one structure."""

    dimension: int
    structure: str
    colors: Dict[Tuple[int, ...], int]
    rounds: int

    def histogram(self) -> Dict[int, int]:
        result: Dict[int, int] = {}
        for color in self.colors.values():
            result[color] = result.get(color, 0) + 1
        return dict(sorted(result.items()))


def kWL_refine(G1: RelStructure, G2: RelStructure, k: int) -> Tuple[WLColoring, WLColoring, bool]:
    """k-dimensional Weisfeiler-Leman refinement on both structures with shared colours."""
    require_same_signature(G1, G2)
    if k < 1:
        raise PreconditionError("WL dimension must be >= 1")
    if G1.signature.max_arity > 2:
        raise PreconditionError("k-WL needs a signature of arity at most 2")
    canon = _Canon()
    structures = (G1, G2)
    tuples = [list(product(S.universe, repeat=k)) for S in structures]
    colors = [{t: canon(("atomic", _atomic_type(S, t))) for t in ts} for S, ts in zip(structures, tuples)]
    extended = [{(t, w): canon(("atomic", _atomic_type(S, t + (w,)))) for t in ts for w in S.universe}
                for S, ts in zip(structures, tuples)]
    classes = len(set(colors[0].values()) | set(colors[1].values()))
    rounds = 0
    while True:
        refined = []
        for S, ts, c, atp in zip(structures, tuples, colors, extended):
            refined.append({
                t: canon((c[t], tuple(sorted(
                    (atp[t, w], tuple(c[t[:i] + (w,) + t[i + 1:]] for i in range(k)))
                    for w in S.universe))))
                for t in ts
            })
        count = len(set(refined[0].values()) | set(refined[1].values()))
        rounds += 1
        colors = refined
        if count == classes:
            break
        classes = count
    logger.debug(f"{k}-WL on {G1.name} / {G2.name} stable after {rounds} rounds with {classes} colours")
    first = WLColoring(k, G1.name, colors[0], rounds)
    second = WLColoring(k, G2.name, colors[1], rounds)
    return first, second, first.histogram() == second.histogram()


class _GradedTypes:
    """Graded modal types of every element of several pointed structures."""

    def __init__(self, structures: Sequence[PointedStructure], k: int):
        self.structures = structures
        self.canon = _Canon()
        self.labels = structures[0].binary_symbols()
        self.props = structures[0].unary_symbols()
        self.successors = []
        for P in structures:
            succ = {label: [[] for _ in P.structure.universe] for label in self.labels}
            for label in self.labels:
                for a, b in P.structure.tuples(label):
                    succ[label][a].append(b)
            self.successors.append(succ)
        self.base = [[tuple(p for p in self.props if P.structure.holds(p, (a,))) for a in P.structure.universe]
                     for P in structures]
        self.levels = [[[self.canon(("props", t)) for t in base] for base in self.base]]
        for _ in range(k):
            previous = self.levels[-1]
            self.levels.append([
                [self.canon((previous_base, tuple(
                    tuple(sorted(previous[s][b] for b in self.successors[s][label][a])) for label in self.labels)))
                 for a, previous_base in enumerate(self.levels[0][s])]
                for s in range(len(structures))
            ])

    def type_of(self, level: int, s: int, a: int) -> int:
        return self.levels[level][s][a]


def _check_modal_inputs(P: PointedStructure, Q: PointedStructure, k: int):
    require_same_signature(P.structure, Q.structure)
    if k < 0:
        raise PreconditionError("Modal depth must be >= 0")


def modal_equiv(P: PointedStructure, Q: PointedStructure, k: int) -> bool:
    """Agreement on all graded modal formulas of depth at most k."""
    _check_modal_inputs(P, Q, k)
    types = _GradedTypes((P, Q), k)
    return types.type_of(k, 0, P.point) == types.type_of(k, 1, Q.point)


def distinguishing_modal_formula(P: PointedStructure, Q: PointedStructure, k: int) -> Optional[Formula]:
    """A graded modal formula of depth <= k true at P and false at Q, or None."""
    _check_modal_inputs(P, Q, k)
    types = _GradedTypes((P, Q), k)
    if types.type_of(k, 0, P.point) == types.type_of(k, 1, Q.point):
        return None
    memo: Dict[Tuple[int, int, int], Formula] = {}

    def separate(x: Tuple[int, int], y: Tuple[int, int], bound: int) -> Formula:
        r = next(r for r in range(bound + 1) if types.type_of(r, *x) != types.type_of(r, *y))
        key = (r, types.type_of(r, *x), types.type_of(r, *y))
        if key in memo:
            return memo[key]
        if r == 0:
            px, py = types.base[x[0]][x[1]], types.base[y[0]][y[1]]
            name = sorted(set(px) ^ set(py))[0]
            formula = Prop(name) if name in px else Not(Prop(name))
        else:
            formula = _separate_by_grade(types, x, y, r, separate)
        memo[key] = formula
        return formula

    return separate((0, P.point), (1, Q.point), k)


def _separate_by_grade(types: _GradedTypes, x, y, r: int, separate) -> Formula:
    for label in types.labels:
        counts_x = _successor_counts(types, r - 1, x, label)
        counts_y = _successor_counts(types, r - 1, y, label)
        if _tallies(counts_x) == _tallies(counts_y):
            continue
        tau = min(t for t in set(counts_x) | set(counts_y) if counts_x.get(t, (0,))[0] != counts_y.get(t, (0,))[0])
        representative = (counts_x.get(tau) or counts_y.get(tau))[1]
        parts = [separate(representative, (counts_x.get(other) or counts_y.get(other))[1], r - 1)
                 for other in sorted(set(counts_x) | set(counts_y)) if other != tau]
        body = And(tuple(parts)) if parts else TRUE
        cx, cy = counts_x.get(tau, (0,))[0], counts_y.get(tau, (0,))[0]
        if cx > cy:
            return GradedDiamond(label, cx, body)
        return Not(GradedDiamond(label, cy, body))
    raise PreconditionError(f"Level {r} types differ only in propositions already compared")


def _successor_counts(types: _GradedTypes, level: int, x: Tuple[int, int], label: str) -> Dict[int, Tuple]:
    s, a = x
    counts: Dict[int, Tuple] = {}
    for b in types.successors[s][label][a]:
        t = types.type_of(level, s, b)
        count, rep = counts.get(t, (0, (s, b)))
        counts[t] = (count + 1, rep)
    return counts
