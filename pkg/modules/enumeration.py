"""Enumeration of small structures up to isomorphism, restricted to the classes
the theorems range over."""

import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from typing import Dict, Iterator, List, Optional, Tuple, Union

from config.settings import GRAPH_ENUM_CAP, STRUCTURE_ENUM_CAP
from modules.covers import compute_tree_depth, compute_tree_width, find_pebble_forest_cover
from modules.exceptions import MalformedInputError, SizeCapExceededError
from modules.structures import (
    GRAPH_SIGNATURE,
    PointedStructure,
    RelStructure,
    Signature,
    iso_check,
    structure_invariant,
)

logger = logging.getLogger(__name__)

ALL = "all"
TREEDEPTH = "treedepth"
TREEWIDTH = "treewidth"
PEBBLE_HEIGHT = "pebble_height"
SYNC_TREE = "sync_tree"
KINDS = (ALL, TREEDEPTH, TREEWIDTH, PEBBLE_HEIGHT, SYNC_TREE)

KRIPKE_SIGNATURE = Signature.of(("P", 1), ("R", 2))


@dataclass(frozen=True)
class ClassSpec:
    """A class of structures of bounded size.

    TREEDEPTH bounds tree-depth by `n`; TREEWIDTH bounds tree-width by
    `width`; PEBBLE_HEIGHT asks for a `k`-pebble forest cover of height `n`;
    SYNC_TREE yields pointed synchronization trees of height `k`. With
    `graphs` set and the graph signature, only loop-free symmetric graphs are
    produced.
    """

    kind: str = ALL
    max_size: int = 4
    signature: Signature = GRAPH_SIGNATURE
    n: Optional[int] = None
    k: Optional[int] = None
    width: Optional[int] = None
    min_size: int = 1
    graphs: bool = True
    pointed: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise MalformedInputError(f"Unknown class kind {self.kind}; expected one of {KINDS}")
        required = {TREEDEPTH: ("n",), TREEWIDTH: ("width",), PEBBLE_HEIGHT: ("k", "n"), SYNC_TREE: ("k",)}
        for name in required.get(self.kind, ()):
            value = getattr(self, name)
            if value is None or value < (0 if name == "width" else 1):
                raise MalformedInputError(f"{self.kind} needs a valid parameter {name}")
        if self.min_size < 1 or self.max_size < self.min_size - 1:
            raise MalformedInputError("Size range is empty or starts below 1")

    @property
    def simple_graphs(self) -> bool:
        return self.graphs and self.signature == GRAPH_SIGNATURE and not self.pointed

    @property
    def cap(self) -> int:
        return GRAPH_ENUM_CAP if self.simple_graphs or self.kind == SYNC_TREE else STRUCTURE_ENUM_CAP

    def label(self) -> str:
        params = ",".join(f"{k}={getattr(self, k)}" for k in ("n", "k", "width") if getattr(self, k) is not None)
        return f"{self.kind}({params})<= {self.max_size}"


class _IsoBuckets:
    """Keeps one representative per isomorphism class, in insertion order."""

    def __init__(self):
        self._buckets: Dict[Tuple, List[RelStructure]] = {}
        self.items: List[RelStructure] = []

    def add(self, A: RelStructure) -> bool:
        bucket = self._buckets.setdefault(structure_invariant(A), [])
        if any(iso_check(A, B) is not None for B in bucket):
            return False
        bucket.append(A)
        self.items.append(A)
        return True


def _new_tuples(signature: Signature, size: int, simple_graph: bool) -> List[Tuple[str, Tuple[int, ...]]]:
    """Candidate tuples involving the newest element size - 1."""
    new = size - 1
    if simple_graph:
        return [("E", (u, new)) for u in range(new)]
    return [(sym.name, t) for sym in signature.symbols
            for t in product(range(size), repeat=sym.arity) if new in t]


def _extend(A: RelStructure, chosen, simple_graph: bool) -> RelStructure:
    size = A.size + 1
    relations = {name: list(A.tuples(name)) for name in A.signature.names}
    for name, t in chosen:
        relations[name].append(t)
        if simple_graph:
            relations[name].append((t[1], t[0]))
    return RelStructure(A.signature, size, relations)


def structures_by_size(signature: Signature, max_size: int, simple_graph: bool) -> List[List[RelStructure]]:
    """Isomorphism class representatives of every size up to max_size.

    Size m classes come from adding one element to each size m - 1 class
    with every possible set of tuples through the new element.
    """
    levels = [[RelStructure(signature, 0)]]
    for size in range(1, max_size + 1):
        buckets = _IsoBuckets()
        candidates = _new_tuples(signature, size, simple_graph)
        for A in levels[-1]:
            for r in range(len(candidates) + 1):
                for chosen in combinations(candidates, r):
                    buckets.add(_extend(A, chosen, simple_graph))
        for i, A in enumerate(buckets.items):
            buckets.items[i] = A.renamed(f"{'G' if simple_graph else 'S'}{size}.{i}")
        levels.append(buckets.items)
        logger.debug(f"{len(buckets.items)} classes of size {size}")
    return levels


_cached_levels = lru_cache(maxsize=16)(structures_by_size)


def _pointed(structures: List[RelStructure]) -> Iterator[PointedStructure]:
    for A in structures:
        kept: List[int] = []
        for a in A.universe:
            if all(iso_check(A, A, fixed={a: b}) is None for b in kept):
                kept.append(a)
                yield PointedStructure(A, a)


def _member(spec: ClassSpec, A: RelStructure) -> bool:
    if spec.kind == TREEDEPTH:
        return compute_tree_depth(A)[0] <= spec.n
    if spec.kind == TREEWIDTH:
        return compute_tree_width(A)[0] <= spec.width
    if spec.kind == PEBBLE_HEIGHT:
        return find_pebble_forest_cover(A, spec.k, spec.n) is not None
    return True


def enumerate_structures(spec: ClassSpec) -> Iterator[Union[RelStructure, PointedStructure]]:
    """One representative per isomorphism class of the spec, by size and then
    in generation order."""
    if spec.max_size > spec.cap:
        raise SizeCapExceededError(f"Enumeration up to {spec.max_size} exceeds the cap {spec.cap}")
    if spec.kind == SYNC_TREE:
        yield from synchronization_trees(spec.signature, spec.k, spec.max_size, spec.min_size)
        return
    levels = _cached_levels(spec.signature, spec.max_size, spec.simple_graphs)
    for size in range(spec.min_size, spec.max_size + 1):
        members = [A for A in levels[size] if _member(spec, A)]
        if spec.pointed:
            yield from _pointed(members)
        else:
            yield from members


def _subsets(items: Tuple[str, ...]) -> List[Tuple[str, ...]]:
    return [c for r in range(len(items) + 1) for c in combinations(items, r)]


def synchronization_trees(signature: Signature, height: int, max_size: int,
                          min_size: int = 1) -> Iterator[PointedStructure]:
    """Pointed synchronization trees of height <= `height`, one per isomorphism class.

    A tree is coded as (propositions at the root, sorted (label, subtree)
    pairs); equal codes are exactly isomorphic trees.
    """
    if signature.max_arity > 2:
        raise MalformedInputError("Synchronization trees need arities at most 2")
    props = tuple(s.name for s in signature.symbols if s.arity == 1)
    labels = tuple(s.name for s in signature.symbols if s.arity == 2)

    @lru_cache(maxsize=None)
    def codes(size: int, depth: int) -> Tuple:
        if size < 1 or (depth == 0 and size > 1):
            return ()
        if size == 1:
            return tuple((p, ()) for p in _subsets(props))
        items = sorted((label, child, child_size)
                       for child_size in range(1, size)
                       for child in codes(child_size, depth - 1) for label in labels)
        forests = []

        def choose(start: int, remaining: int, chosen: List):
            if remaining == 0:
                forests.append(tuple((label, child) for label, child, _ in chosen))
                return
            for i in range(start, len(items)):
                if items[i][2] <= remaining:
                    chosen.append(items[i])
                    choose(i, remaining - items[i][2], chosen)
                    chosen.pop()

        choose(0, size - 1, [])
        return tuple(sorted((p, forest) for p in _subsets(props) for forest in forests))

    for size in range(min_size, max_size + 1):
        for i, code in enumerate(codes(size, height)):
            yield _tree_from_code(signature, code, f"T{size}.{i}")


def _tree_from_code(signature: Signature, code: Tuple, name: str) -> PointedStructure:
    relations: Dict[str, List[Tuple[int, ...]]] = {s.name: [] for s in signature.symbols}
    queue = [(code, 0)]
    size = 1
    while queue:
        (props, children), node = queue.pop(0)
        for p in props:
            relations[p].append((node,))
        for label, child in children:
            relations[label].append((node, size))
            queue.append((child, size))
            size += 1
    return PointedStructure(RelStructure(signature, size, relations, name=name), 0)
