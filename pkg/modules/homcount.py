import logging
from dataclasses import dataclass
from itertools import product
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple

from modules.covers import PebbleForestCover, active_elements, validate_pebble_cover
from modules.exceptions import InvalidCoverError
from modules.structures import (
    PointedStructure,
    RelStructure,
    gaifman_adjacency,
    gaifman_components,
    require_same_signature,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HomVector:
    sources: Tuple[str, ...]
    counts: Tuple[int, ...]
    target: str = ""

    def as_dict(self) -> Dict[str, int]:
        return dict(zip(self.sources, self.counts))


def _variable_order(C: RelStructure, component: List[int]) -> List[int]:
    """Highest degree first, then always the vertex most connected to those already placed."""
    adjacency = gaifman_adjacency(C)
    remaining = set(component)
    start = min(remaining, key=lambda x: (-len(adjacency[x]), x))
    order = [start]
    remaining.discard(start)
    placed = {start}
    while remaining:
        nxt = min(remaining, key=lambda x: (-len(adjacency[x] & placed), -len(adjacency[x]), x))
        order.append(nxt)
        placed.add(nxt)
        remaining.discard(nxt)
    return order


class _Backtracker:
    """Counts maps from C into A, optionally injective and relation-reflecting."""

    def __init__(self, C: RelStructure, A: RelStructure, fixed: Optional[Mapping[int, int]] = None,
                 strong: bool = False):
        self.C = C
        self.A = A
        self.fixed = dict(fixed or {})
        self.strong = strong
        self._successors: Dict[str, List[Set[int]]] = {}
        self._predecessors: Dict[str, List[Set[int]]] = {}
        for sym in A.signature.symbols:
            if sym.arity == 2:
                succ = [set() for _ in A.universe]
                pred = [set() for _ in A.universe]
                for u, v in A.tuples(sym.name):
                    succ[u].add(v)
                    pred[v].add(u)
                self._successors[sym.name] = succ
                self._predecessors[sym.name] = pred

    def count(self) -> int:
        total = 1
        if self.strong:
            return self._count_order(list(self.C.universe))
        for component in gaifman_components(self.C):
            total *= self._count_order(_variable_order(self.C, component))
            if total == 0:
                break
        return total

    def _count_order(self, order: List[int]) -> int:
        position = {x: i for i, x in enumerate(order)}
        checks: List[List[Tuple[str, Tuple[int, ...]]]] = [[] for _ in order]
        for sym, t in self.C.all_tuples():
            if all(x in position for x in t):
                checks[max(position[x] for x in t)].append((sym, t))
        assignment: Dict[int, int] = {}
        used: Set[int] = set()

        def candidates(x: int):
            if x in self.fixed:
                return [self.fixed[x]]
            pool: Optional[Set[int]] = None
            for sym, t in checks[position[x]]:
                if len(t) != 2 or t[0] == t[1]:
                    continue
                u, v = t
                if v == x and u in assignment:
                    allowed = self._successors[sym][assignment[u]]
                elif u == x and v in assignment:
                    allowed = self._predecessors[sym][assignment[v]]
                else:
                    continue
                pool = set(allowed) if pool is None else pool & allowed
            return sorted(pool) if pool is not None else self.A.universe

        def reflects(x: int, b: int) -> bool:
            for sym, t in self.A.occurrences(b):
                if all(y in used for y in t):
                    preimage = tuple(inverse[y] for y in t)
                    if not self.C.holds(sym, preimage):
                        return False
            return True

        inverse: Dict[int, int] = {}

        def extend(i: int) -> int:
            if i == len(order):
                return 1
            x = order[i]
            total = 0
            for b in candidates(x):
                if self.strong and b in used:
                    continue
                assignment[x] = b
                if all(self.A.holds(sym, [assignment[y] for y in t]) for sym, t in checks[i]):
                    if self.strong:
                        used.add(b)
                        inverse[b] = x
                        if reflects(x, b):
                            total += extend(i + 1)
                        used.discard(b)
                        del inverse[b]
                    else:
                        total += extend(i + 1)
                del assignment[x]
            return total

        return extend(0)


def hom_count(C: RelStructure, A: RelStructure) -> int:
    """Number of homomorphisms from C to A."""
    require_same_signature(C, A)
    return _Backtracker(C, A).count()


def strong_emb_count(C: RelStructure, A: RelStructure) -> int:
    """Number of injective maps C -> A that preserve and reflect every relation."""
    require_same_signature(C, A)
    if C.size > A.size:
        return 0
    return _Backtracker(C, A, strong=True).count()


def pointed_hom_count(C: PointedStructure, A: PointedStructure) -> int:
    """Number of homomorphisms sending the point of C to the point of A."""
    require_same_signature(C.structure, A.structure)
    return _Backtracker(C.structure, A.structure, fixed={C.point: A.point}).count()


def hom_vector(sources: Sequence[RelStructure], target: RelStructure) -> HomVector:
    return HomVector(tuple(C.name for C in sources),
                     tuple(hom_count(C, target) for C in sources),
                     target.name)


def hom_count_treedec(C: RelStructure, cover: PebbleForestCover, A: RelStructure) -> int:
    """Homomorphism count by dynamic programming over a pebble forest cover of C.

    Each table is keyed by the images of the elements still holding a pebble
    at a node; every tuple of C is checked at its deepest element, where all
    of its elements are still pebbled.
    """
    require_same_signature(C, A)
    forest = cover.cover
    if forest.base != C or not validate_pebble_cover(C, cover, cover.k, max(forest.height, 1)):
        raise InvalidCoverError(f"Cover does not validate for {C.name}")

    active = [active_elements(cover, x) for x in C.universe]
    local_checks: List[List[Tuple[str, Tuple[int, ...]]]] = [[] for _ in C.universe]
    for sym, t in C.all_tuples():
        deepest = max(t, key=forest.depth)
        local_checks[deepest].append((sym, t))

    # marginal[x] maps images of active(x) minus x to the number of extensions of x's subtree
    marginal: Dict[int, Dict[Tuple[int, ...], int]] = {}
    for x in forest.postorder():
        keys = active[x]
        table: Dict[Tuple[int, ...], int] = {}
        for images in product(A.universe, repeat=len(keys)):
            assignment = dict(zip(keys, images))
            if not all(A.holds(sym, [assignment[y] for y in t]) for sym, t in local_checks[x]):
                continue
            ways = 1
            for child in forest.children(x):
                context = tuple(assignment[y] for y in active[child] if y != child)
                ways *= marginal[child].get(context, 0)
                if ways == 0:
                    break
            if ways:
                table[images] = ways
        summed: Dict[Tuple[int, ...], int] = {}
        position = keys.index(x)
        for images, ways in table.items():
            context = images[:position] + images[position + 1:]
            summed[context] = summed.get(context, 0) + ways
        marginal[x] = summed
        logger.debug(f"DP node {x}: {len(table)} table rows over {len(keys)} pebbled elements")

    total = 1
    for root in forest.roots():
        total *= marginal[root].get((), 0)
    return total
