import logging
from functools import lru_cache
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import networkx as nx

from config.settings import COVER_SEARCH_CAP, TREEDEPTH_CAP
from modules.exceptions import InvalidCoverError, PreconditionError, SizeCapExceededError
from modules.structures import (
    RelStructure,
    blocks_from_pairs,
    equality_symbol_of,
    functor_H,
    gaifman_adjacency,
    gaifman_nx,
    reduct,
)

logger = logging.getLogger(__name__)

ROOT = -1


class ForestCover:
    """Forest order on the universe of `base`, stored as a parent array (ROOT marks roots)."""

    def __init__(self, base: RelStructure, parent: Sequence[int]):
        parent = tuple(parent)
        if len(parent) != base.size:
            raise InvalidCoverError(f"Parent array has {len(parent)} entries for {base.size} elements")
        for x, p in enumerate(parent):
            if p != ROOT and not (isinstance(p, int) and 0 <= p < base.size and p != x):
                raise InvalidCoverError(f"Invalid parent {p} for element {x}")
        depth = [0] * base.size
        for x in range(base.size):
            trail, seen, y = [], set(), x
            while y != ROOT and depth[y] == 0:
                if y in seen:
                    raise InvalidCoverError("Parent links contain a cycle")
                seen.add(y)
                trail.append(y)
                y = parent[y]
            level = 0 if y == ROOT else depth[y]
            for z in reversed(trail):
                level += 1
                depth[z] = level
        self.base = base
        self.parent = parent
        self._depth = tuple(depth)
        self._children = tuple(tuple(y for y in range(base.size) if parent[y] == x) for x in range(base.size))

    @property
    def height(self) -> int:
        return max(self._depth, default=0)

    def depth(self, x: int) -> int:
        return self._depth[x]

    def children(self, x: int) -> Tuple[int, ...]:
        return self._children[x]

    def roots(self) -> Tuple[int, ...]:
        return tuple(x for x, p in enumerate(self.parent) if p == ROOT)

    def root_path(self, x: int) -> List[int]:
        path = [x]
        while self.parent[path[-1]] != ROOT:
            path.append(self.parent[path[-1]])
        return path[::-1]

    def is_ancestor(self, a: int, b: int) -> bool:
        """a <= b in the forest order."""
        while b != ROOT:
            if b == a:
                return True
            b = self.parent[b]
        return False

    def comparable(self, a: int, b: int) -> bool:
        return self.is_ancestor(a, b) or self.is_ancestor(b, a)

    def postorder(self) -> List[int]:
        order: List[int] = []

        def visit(x: int):
            for c in self._children[x]:
                visit(c)
            order.append(x)

        for r in self.roots():
            visit(r)
        return order

    def is_compatible(self) -> bool:
        """Gaifman-adjacent elements are comparable."""
        adjacency = gaifman_adjacency(self.base)
        return all(self.comparable(x, y) for x in self.base.universe for y in adjacency[x] if x < y)

    def rebased(self, base: RelStructure) -> "ForestCover":
        return ForestCover(base, self.parent)

    def __repr__(self) -> str:
        return f"ForestCover({self.base.name}, parent={list(self.parent)}, height={self.height})"


class PebbleForestCover:
    def __init__(self, cover: ForestCover, pebbles: Sequence[int], k: int):
        pebbles = tuple(pebbles)
        if len(pebbles) != cover.base.size:
            raise InvalidCoverError(f"Pebbling has {len(pebbles)} entries for {cover.base.size} elements")
        if not isinstance(k, int) or k < 1:
            raise InvalidCoverError(f"Pebble count must be positive, got {k!r}")
        self.cover = cover
        self.pebbles = pebbles
        self.k = k

    @property
    def base(self) -> RelStructure:
        return self.cover.base

    @property
    def height(self) -> int:
        return self.cover.height

    def rebased(self, base: RelStructure) -> "PebbleForestCover":
        return PebbleForestCover(self.cover.rebased(base), self.pebbles, self.k)

    def __repr__(self) -> str:
        return (f"PebbleForestCover({self.base.name}, parent={list(self.cover.parent)}, "
                f"pebbles={list(self.pebbles)}, k={self.k})")


def sees(cover: PebbleForestCover, a: int, b: int) -> bool:
    """a and b are comparable and no element strictly above the lower one, up to the
    higher one, reuses the lower one's pebble."""
    forest = cover.cover
    if forest.is_ancestor(a, b):
        low, high = a, b
    elif forest.is_ancestor(b, a):
        low, high = b, a
    else:
        return False
    z = high
    while z != low:
        if cover.pebbles[z] == cover.pebbles[low]:
            return False
        z = forest.parent[z]
    return True


def active_elements(cover: PebbleForestCover, x: int) -> Tuple[int, ...]:
    """Elements on the root path of x still holding their pebble at x, root first."""
    holder: Dict[int, int] = {}
    for z in cover.cover.root_path(x):
        holder[cover.pebbles[z]] = z
    return tuple(sorted(holder.values(), key=cover.cover.depth))


def validate_forest_cover(A: RelStructure, cover: ForestCover, n: int) -> bool:
    return cover.base == A and cover.height <= n and cover.is_compatible()


def validate_pebble_cover(A: RelStructure, cover: PebbleForestCover, k: int, n: int) -> bool:
    forest = cover.cover
    if forest.base != A or forest.height > n:
        return False
    if any(not isinstance(p, int) or not 1 <= p <= k for p in cover.pebbles):
        return False
    adjacency = gaifman_adjacency(A)
    return all(sees(cover, x, y) for x in A.universe for y in adjacency[x] if x < y)


def _components(G: nx.Graph, vertices: FrozenSet[int]) -> List[FrozenSet[int]]:
    comps = [frozenset(c) for c in nx.connected_components(G.subgraph(vertices))]
    return sorted(comps, key=min)


def compute_tree_depth(A: RelStructure, cap: int = TREEDEPTH_CAP) -> Tuple[int, ForestCover]:
    """Tree-depth of A with a forest cover realizing it."""
    if A.size > cap:
        raise SizeCapExceededError(f"Tree-depth computation is capped at {cap} elements, got {A.size}")
    G = gaifman_nx(A)

    @lru_cache(maxsize=None)
    def td(vertices: FrozenSet[int]) -> int:
        if not vertices:
            return 0
        comps = _components(G, vertices)
        if len(comps) > 1:
            return max(td(c) for c in comps)
        return 1 + min(td(vertices - {v}) for v in vertices)

    parent = [ROOT] * A.size

    def build(vertices: FrozenSet[int], above: int):
        for comp in _components(G, vertices):
            best = min(sorted(comp), key=lambda v: td(comp - {v}))
            parent[best] = above
            build(comp - {best}, best)

    build(frozenset(A.universe), ROOT)
    depth = td(frozenset(A.universe))
    logger.debug(f"{A.name}: tree-depth {depth}")
    return depth, ForestCover(A, parent)


def find_pebble_forest_cover(A: RelStructure, k: int, n: Optional[int] = None,
                             cap: int = COVER_SEARCH_CAP) -> Optional[PebbleForestCover]:
    """A k-pebble forest cover of A of height at most n, or None if there is none.

    The search places a top element for each connected piece of what remains;
    a piece is solvable only while its already placed neighbours, which must
    all keep their pebbles, leave a pebble free for the new top element.
    """
    if A.size > cap:
        raise SizeCapExceededError(f"Cover search is capped at {cap} elements, got {A.size}")
    if k < 1:
        raise PreconditionError("Pebble count must be positive")
    adjacency = gaifman_adjacency(A)
    G = gaifman_nx(A)
    budget = A.size if n is None else n

    def boundary(vertices: FrozenSet[int]) -> FrozenSet[int]:
        return frozenset().union(*(adjacency[x] for x in vertices)) - vertices

    @lru_cache(maxsize=None)
    def solve(vertices: FrozenSet[int], height: int) -> Optional[int]:
        if height < 1 or len(boundary(vertices)) > k - 1:
            return None
        for v in sorted(vertices):
            if all(solve(c, height - 1) is not None for c in _components(G, vertices - {v})):
                return v
        return None

    roots = _components(G, frozenset(A.universe))
    if any(solve(c, budget) is None for c in roots):
        logger.debug(f"{A.name}: no {k}-pebble cover of height <= {budget}")
        return None

    parent = [ROOT] * A.size
    pebbles = [0] * A.size

    def build(vertices: FrozenSet[int], above: int, height: int):
        v = solve(vertices, height)
        taken = {pebbles[u] for u in boundary(vertices)}
        parent[v] = above
        pebbles[v] = min(set(range(1, k + 1)) - taken)
        for c in _components(G, vertices - {v}):
            build(c, v, height - 1)

    for c in roots:
        build(c, ROOT, budget)
    return PebbleForestCover(ForestCover(A, parent), pebbles, k)


def compute_tree_width(A: RelStructure, cap: int = COVER_SEARCH_CAP) -> Tuple[int, PebbleForestCover]:
    """Tree-width as one less than the least pebble count admitting a cover."""
    k = 1
    while True:
        cover = find_pebble_forest_cover(A, k, cap=cap)
        if cover is not None:
            return k - 1, cover
        k += 1


def quotient_forest_cover(D: RelStructure, cover: ForestCover) -> ForestCover:
    """Forest cover of H(D) placing each class at its least element in the order of D."""
    if cover.base != D or not cover.is_compatible():
        raise InvalidCoverError(f"Cover is not a compatible forest cover of {D.name}")
    name = equality_symbol_of(D)
    blocks = blocks_from_pairs(D.size, D.tuples(name))
    H, quotient = functor_H(D, name)
    lowest: List[int] = []
    for block in blocks:
        least = min(block, key=cover.depth)
        if not all(cover.is_ancestor(least, d) for d in block):
            raise InvalidCoverError(f"Class {block} has no least element in the forest order")
        lowest.append(least)
    representative = {x: i for i, x in enumerate(lowest)}
    parent = []
    for x in lowest:
        up = cover.parent[x]
        while up != ROOT and up not in representative:
            up = cover.parent[up]
        parent.append(ROOT if up == ROOT else representative[up])
    result = ForestCover(H, parent)
    if not result.is_compatible():
        raise InvalidCoverError("Quotient cover lost compatibility")
    return result


def _lowest_same_pebble(cover: PebbleForestCover, v: int, w: int) -> int:
    """Least w' with v < w' <= w and the same pebble as w."""
    forest = cover.cover
    found = w
    z = w
    while z != v:
        if cover.pebbles[z] == cover.pebbles[w]:
            found = z
        z = forest.parent[z]
    return found


def one_step_quotient(A: RelStructure, cover: PebbleForestCover, u: int,
                      v: int) -> Tuple[RelStructure, PebbleForestCover]:
    """Identify v with u (an equality-symbol pair) and repair the pebbling.

    The pair is reoriented so that u lies below v in the forest order.
    Elements above v keep their relative order; element indices after v
    shift down by one.
    """
    name = equality_symbol_of(A)
    if u == v or not (A.holds(name, (u, v)) or A.holds(name, (v, u))):
        raise PreconditionError(f"({u}, {v}) is not a non-diagonal {name}-pair of {A.name}")
    forest = cover.cover
    if forest.base != A:
        raise PreconditionError("Cover does not belong to the structure")
    if not forest.comparable(u, v):
        raise PreconditionError(f"{name}-pair ({u}, {v}) is incomparable in the forest order")
    if forest.is_ancestor(v, u):
        u, v = v, u

    keep = [w for w in A.universe if w != v]
    index = {w: i for i, w in enumerate(keep)}
    relations = {
        sym: [tuple(index[u if x == v else x] for x in t) for t in A.tuples(sym)]
        for sym in A.signature.names
    }
    quotient = RelStructure(A.signature, len(keep), relations, name=f"{A.name}/{u}~{v}")

    parent = []
    for w in keep:
        up = forest.parent[w]
        if up == v:
            up = forest.parent[v]
        parent.append(ROOT if up == ROOT else index[up])

    p = cover.pebbles
    pebbles = []
    for w in keep:
        if forest.is_ancestor(v, w):
            lowest = _lowest_same_pebble(cover, v, w)
            if p[w] == p[v] and not sees(cover, u, lowest):
                pebbles.append(p[u])
                continue
            if p[w] == p[u] and sees(cover, v, lowest):
                pebbles.append(p[v])
                continue
        pebbles.append(p[w])

    new_cover = PebbleForestCover(ForestCover(quotient, parent), pebbles, cover.k)
    return quotient, new_cover


def next_equality_pair(A: RelStructure, cover: PebbleForestCover) -> Optional[Tuple[int, int]]:
    """Non-diagonal equality pair (u, v), u below v, with u shallowest, then smallest."""
    name = equality_symbol_of(A)
    forest = cover.cover
    pairs = []
    for x, y in A.tuples(name):
        if x == y:
            continue
        if not forest.comparable(x, y):
            raise PreconditionError(f"{name}-pair ({x}, {y}) is incomparable in the forest order")
        pairs.append((x, y) if forest.is_ancestor(x, y) else (y, x))
    if not pairs:
        return None
    return min(pairs, key=lambda uv: (forest.depth(uv[0]), uv[0], uv[1]))


def eliminate_equalities(A: RelStructure, cover: PebbleForestCover) -> Tuple[RelStructure, PebbleForestCover]:
    """Apply one-step quotients until the equality symbol is diagonal, then drop it."""
    name = equality_symbol_of(A)
    current, current_cover = A, cover
    steps = 0
    while True:
        pair = next_equality_pair(current, current_cover)
        if pair is None:
            break
        current, current_cover = one_step_quotient(current, current_cover, *pair)
        steps += 1
    result = reduct(current, A.signature.without(name)).renamed(f"H({A.name})")
    logger.debug(f"{A.name}: {steps} one-step quotients, {result.size} elements left")
    return result, current_cover.rebased(result)
