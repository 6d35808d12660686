import logging
from dataclasses import dataclass, field
from itertools import combinations, product
from types import MappingProxyType
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from config.settings import EQUALITY_SYMBOL, QUOTIENT_CAP
from modules.exceptions import (
    InvalidMorphismError,
    MalformedInputError,
    PreconditionError,
    SignatureMismatchError,
    SizeCapExceededError,
)

logger = logging.getLogger(__name__)

Tup = Tuple[int, ...]


@dataclass(frozen=True)
class Symbol:
    name: str
    arity: int


@dataclass(frozen=True)
class Signature:
    """Ordered relational signature.

    `equality` names the binary symbol read as equality in extended
    signatures; it is bookkeeping only and does not take part in comparisons.
    """

    symbols: Tuple[Symbol, ...]
    equality: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        symbols = tuple(s if isinstance(s, Symbol) else Symbol(*s) for s in self.symbols)
        object.__setattr__(self, "symbols", symbols)
        names = [s.name for s in symbols]
        if len(set(names)) != len(names):
            raise MalformedInputError(f"Duplicate symbol names in signature: {names}")
        for s in symbols:
            if not isinstance(s.name, str) or not s.name.isidentifier():
                raise MalformedInputError(f"Invalid symbol name: {s.name!r}")
            if not isinstance(s.arity, int) or s.arity < 1:
                raise MalformedInputError(f"Symbol {s.name} must have positive arity")
        if self.equality is not None and (self.equality not in names or self.arity(self.equality) != 2):
            raise MalformedInputError(f"Equality symbol {self.equality} must be a binary symbol")

    @classmethod
    def of(cls, *pairs: Tuple[str, int], equality: Optional[str] = None) -> "Signature":
        return cls(tuple(Symbol(name, arity) for name, arity in pairs), equality)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(s.name for s in self.symbols)

    @property
    def max_arity(self) -> int:
        return max((s.arity for s in self.symbols), default=0)

    def __contains__(self, name: str) -> bool:
        return any(s.name == name for s in self.symbols)

    def arity(self, name: str) -> int:
        for s in self.symbols:
            if s.name == name:
                return s.arity
        raise MalformedInputError(f"Unknown symbol: {name}")

    def extended(self, name: str = EQUALITY_SYMBOL) -> "Signature":
        """Signature with an extra binary equality-witness symbol."""
        if name in self:
            raise PreconditionError(f"Signature already has a symbol named {name}")
        return Signature(self.symbols + (Symbol(name, 2),), equality=name)

    def without(self, name: str) -> "Signature":
        return Signature(tuple(s for s in self.symbols if s.name != name))


class RelStructure:
    """Finite relational structure with universe {0, ..., size-1}.

    Relations are stored duplicate-free in lexicographic order. Instances are
    treated as immutable.
    """

    def __init__(self, signature: Signature, size: int,
                 relations: Optional[Mapping[str, Iterable[Sequence[int]]]] = None,
                 name: str = ""):
        if not isinstance(size, int) or size < 0:
            raise MalformedInputError(f"Structure size must be a natural number, got {size!r}")
        relations = dict(relations or {})
        unknown = set(relations) - set(signature.names)
        if unknown:
            raise MalformedInputError(f"Relations for unknown symbols: {sorted(unknown)}")

        canonical: Dict[str, Tuple[Tup, ...]] = {}
        for sym in signature.symbols:
            tuples = set()
            for raw in relations.get(sym.name, ()):
                t = tuple(raw)
                if len(t) != sym.arity:
                    raise MalformedInputError(
                        f"Tuple {t} has length {len(t)}, symbol {sym.name} has arity {sym.arity}")
                if any(not isinstance(x, int) or x < 0 or x >= size for x in t):
                    raise MalformedInputError(f"Tuple {t} of {sym.name} leaves the universe 0..{size - 1}")
                tuples.add(t)
            canonical[sym.name] = tuple(sorted(tuples))

        self._signature = signature
        self._size = size
        self._relations = canonical
        self._sets = {n: frozenset(ts) for n, ts in canonical.items()}
        self._name = name
        self._occurrences: Optional[Tuple[Tuple[Tuple[str, Tup], ...], ...]] = None

    @property
    def signature(self) -> Signature:
        return self._signature

    @property
    def size(self) -> int:
        return self._size

    @property
    def name(self) -> str:
        return self._name or f"S{self._size}"

    @property
    def relations(self) -> Mapping[str, Tuple[Tup, ...]]:
        return MappingProxyType(self._relations)

    @property
    def universe(self) -> range:
        return range(self._size)

    def tuples(self, symbol: str) -> Tuple[Tup, ...]:
        return self._relations[symbol]

    def relation_set(self, symbol: str) -> FrozenSet[Tup]:
        return self._sets[symbol]

    def holds(self, symbol: str, t: Sequence[int]) -> bool:
        return tuple(t) in self._sets[symbol]

    def tuple_count(self) -> int:
        return sum(len(ts) for ts in self._relations.values())

    def all_tuples(self) -> Iterator[Tuple[str, Tup]]:
        for sym in self._signature.symbols:
            for t in self._relations[sym.name]:
                yield sym.name, t

    def occurrences(self, element: int) -> Tuple[Tuple[str, Tup], ...]:
        """All (symbol, tuple) pairs whose tuple mentions `element`."""
        if self._occurrences is None:
            occ: List[List[Tuple[str, Tup]]] = [[] for _ in range(self._size)]
            for sym, t in self.all_tuples():
                for x in sorted(set(t)):
                    occ[x].append((sym, t))
            self._occurrences = tuple(tuple(o) for o in occ)
        return self._occurrences[element]

    def renamed(self, name: str) -> "RelStructure":
        return RelStructure(self._signature, self._size, self._relations, name=name)

    def key(self) -> Tuple:
        return (self._signature.symbols, self._size,
                tuple(self._relations[n] for n in self._signature.names))

    def __eq__(self, other) -> bool:
        if not isinstance(other, RelStructure):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        rels = ", ".join(f"{n}={list(ts)}" for n, ts in self._relations.items())
        return f"RelStructure({self.name}: size={self._size}, {rels})"


@dataclass(frozen=True)
class PointedStructure:
    """Pointed Kripke structure: all symbols unary or binary, one distinguished element."""

    structure: RelStructure
    point: int

    def __post_init__(self):
        if not 0 <= self.point < self.structure.size:
            raise MalformedInputError(f"Point {self.point} outside universe of size {self.structure.size}")
        if self.structure.signature.max_arity > 2:
            raise MalformedInputError("Pointed structures only admit unary and binary symbols")

    @property
    def name(self) -> str:
        return f"{self.structure.name}@{self.point}"

    @property
    def signature(self) -> Signature:
        return self.structure.signature

    def unary_symbols(self) -> Tuple[str, ...]:
        return tuple(s.name for s in self.signature.symbols if s.arity == 1)

    def binary_symbols(self) -> Tuple[str, ...]:
        return tuple(s.name for s in self.signature.symbols if s.arity == 2)


@dataclass(frozen=True)
class Homomorphism:
    """A map between structures; validity is checked by validate_hom, not on construction."""

    source: RelStructure
    target: RelStructure
    mapping: Tup

    def __post_init__(self):
        object.__setattr__(self, "mapping", tuple(self.mapping))

    def __call__(self, element: int) -> int:
        return self.mapping[element]

    def apply(self, t: Sequence[int]) -> Tup:
        return tuple(self.mapping[x] for x in t)

    def is_surjective(self) -> bool:
        return set(self.mapping) == set(self.target.universe)

    def is_injective(self) -> bool:
        return len(set(self.mapping)) == len(self.mapping)


@dataclass(frozen=True)
class QuotientObject:
    base: RelStructure
    partition: Tuple[Tup, ...]
    codomain: RelStructure
    surjection: Homomorphism

    @property
    def strict(self) -> bool:
        """True when the surjection is not an isomorphism onto the base."""
        return len(self.partition) != self.base.size or self.codomain.key() != self.base.key()


def require_same_signature(A: RelStructure, B: RelStructure):
    if A.signature != B.signature:
        raise SignatureMismatchError(
            f"Signatures differ: {A.signature.names} vs {B.signature.names}")


def identity(A: RelStructure) -> Homomorphism:
    return Homomorphism(A, A, tuple(A.universe))


def compose(g: Homomorphism, f: Homomorphism) -> Homomorphism:
    """g after f."""
    if f.target.size != g.source.size:
        raise PreconditionError("Cannot compose: codomain of f is not the domain of g")
    return Homomorphism(f.source, g.target, tuple(g.mapping[x] for x in f.mapping))


def validate_hom(f: Homomorphism) -> bool:
    """True iff every relation tuple of the source is preserved."""
    if len(f.mapping) != f.source.size:
        raise MalformedInputError(
            f"Map has length {len(f.mapping)}, source has {f.source.size} elements")
    for x in f.mapping:
        if not isinstance(x, int) or not 0 <= x < f.target.size:
            raise MalformedInputError(f"Map entry {x} outside target universe of size {f.target.size}")
    require_same_signature(f.source, f.target)
    return all(f.target.holds(sym, f.apply(t)) for sym, t in f.source.all_tuples())


def induced_substructure(A: RelStructure, elements: Iterable[int],
                         name: str = "") -> Tuple[RelStructure, Homomorphism]:
    """Substructure induced on `elements`, relabelled in increasing order, with its inclusion."""
    kept = sorted(set(elements))
    index = {x: i for i, x in enumerate(kept)}
    relations = {
        sym: [tuple(index[x] for x in t) for t in A.tuples(sym) if all(x in index for x in t)]
        for sym in A.signature.names
    }
    S = RelStructure(A.signature, len(kept), relations, name=name or f"{A.name}[{len(kept)}]")
    return S, Homomorphism(S, A, tuple(kept))


def reduct(A: RelStructure, signature: Signature) -> RelStructure:
    """Forget every symbol of A outside `signature`."""
    for sym in signature.symbols:
        if sym.name not in A.signature or A.signature.arity(sym.name) != sym.arity:
            raise SignatureMismatchError(f"Symbol {sym.name}/{sym.arity} is not in {A.signature.names}")
    return RelStructure(signature, A.size, {n: A.tuples(n) for n in signature.names}, name=A.name)


GRAPH_SIGNATURE = Signature.of(("E", 2))


def gaifman_adjacency(A: RelStructure) -> Tuple[FrozenSet[int], ...]:
    adjacency: List[set] = [set() for _ in A.universe]
    for _, t in A.all_tuples():
        for x, y in combinations(set(t), 2):
            adjacency[x].add(y)
            adjacency[y].add(x)
    return tuple(frozenset(a) for a in adjacency)


def gaifman_nx(A: RelStructure) -> nx.Graph:
    G = nx.Graph()
    G.add_nodes_from(A.universe)
    for x, neighbours in enumerate(gaifman_adjacency(A)):
        G.add_edges_from((x, y) for y in neighbours if x < y)
    return G


def gaifman(A: RelStructure) -> RelStructure:
    """Gaifman graph of A as a symmetric loop-free graph structure."""
    edges = [(x, y) for x, ns in enumerate(gaifman_adjacency(A)) for y in ns]
    return RelStructure(GRAPH_SIGNATURE, A.size, {"E": edges}, name=f"G({A.name})")


def gaifman_components(A: RelStructure) -> List[List[int]]:
    """Connected components of the Gaifman graph, ordered by smallest element."""
    comps = [sorted(c) for c in nx.connected_components(gaifman_nx(A))]
    return sorted(comps, key=lambda c: c[0])


def disjoint_union(A: RelStructure, B: RelStructure) -> Tuple[RelStructure, Homomorphism, Homomorphism]:
    require_same_signature(A, B)
    shift = A.size
    relations = {
        sym: list(A.tuples(sym)) + [tuple(x + shift for x in t) for t in B.tuples(sym)]
        for sym in A.signature.names
    }
    U = RelStructure(A.signature, A.size + B.size, relations, name=f"{A.name}+{B.name}")
    return (U,
            Homomorphism(A, U, tuple(A.universe)),
            Homomorphism(B, U, tuple(x + shift for x in B.universe)))


def blocks_from_pairs(size: int, pairs: Iterable[Tuple[int, int]]) -> List[Tup]:
    """Blocks of the least equivalence containing `pairs`, ordered by smallest element."""
    uf = nx.utils.UnionFind(range(size))
    for x, y in pairs:
        uf.union(x, y)
    return sorted((tuple(sorted(b)) for b in uf.to_sets()), key=lambda b: b[0])


def quotient_by_blocks(A: RelStructure, blocks: Sequence[Sequence[int]],
                       signature: Optional[Signature] = None, name: str = "") -> QuotientObject:
    """Quotient of A (or of its reduct to `signature`) with pushforward relations."""
    signature = signature or A.signature
    block_of = [0] * A.size
    for i, block in enumerate(blocks):
        for x in block:
            block_of[x] = i
    relations = {sym: [tuple(block_of[x] for x in t) for t in A.tuples(sym)] for sym in signature.names}
    Q = RelStructure(signature, len(blocks), relations, name=name or f"{A.name}/~")
    base = A if signature == A.signature else reduct(A, signature)
    return QuotientObject(base, tuple(tuple(b) for b in blocks), Q, Homomorphism(base, Q, tuple(block_of)))


def pushout(f: Homomorphism, g: Homomorphism) -> Tuple[RelStructure, Homomorphism, Homomorphism]:
    """Pushout of B <-f- A -g-> C as a quotient of the disjoint sum B + C."""
    if f.source != g.source:
        raise PreconditionError("Pushout legs must share their source")
    require_same_signature(f.target, g.target)
    require_same_signature(f.source, f.target)
    if not validate_hom(f) or not validate_hom(g):
        raise InvalidMorphismError("Pushout legs must be homomorphisms")
    B, C = f.target, g.target
    S, inl, inr = disjoint_union(B, C)
    glue = [(inl(f(a)), inr(g(a))) for a in f.source.universe]
    q = quotient_by_blocks(S, blocks_from_pairs(S.size, glue), name=f"{B.name}+_{f.source.name}{C.name}")
    D = q.codomain
    iB = Homomorphism(B, D, tuple(q.surjection(inl(b)) for b in B.universe))
    iC = Homomorphism(C, D, tuple(q.surjection(inr(c)) for c in C.universe))
    logger.debug(f"Pushout of {B.name} and {C.name} over {f.source.name}: {D.size} elements")
    return D, iB, iC


def epi_mono_factorize(f: Homomorphism) -> Tuple[Homomorphism, Homomorphism]:
    """Factor f as a surjective homomorphism followed by an induced embedding."""
    if not validate_hom(f):
        raise InvalidMorphismError("Only homomorphisms can be factorized")
    image = sorted(set(f.mapping))
    M, m = induced_substructure(f.target, image, name=f"im({f.source.name})")
    index = {x: i for i, x in enumerate(image)}
    e = Homomorphism(f.source, M, tuple(index[x] for x in f.mapping))
    return e, m


def set_partitions(size: int) -> Iterator[List[Tup]]:
    """All set partitions of range(size), blocks ordered by smallest element."""
    def grow(prefix: List[int], blocks: int) -> Iterator[List[int]]:
        if len(prefix) == size:
            yield prefix
            return
        for b in range(blocks + 1):
            yield from grow(prefix + [b], max(blocks, b + 1))

    for rgs in grow([], 0):
        blocks: Dict[int, List[int]] = {}
        for x, b in enumerate(rgs):
            blocks.setdefault(b, []).append(x)
        yield [tuple(blocks[b]) for b in sorted(blocks)]


def enumerate_quotient_objects(C: RelStructure, cap: int = QUOTIENT_CAP) -> List[QuotientObject]:
    """All quotient objects of C, one per equivalence class.

    With blocks labelled by their smallest element, two surjections out of C
    are related by an isomorphism commuting with them exactly when they have
    the same partition and the same codomain, so no further dedup is needed.
    """
    if C.size > cap:
        raise SizeCapExceededError(f"Quotient enumeration is capped at {cap} elements, got {C.size}")
    result: List[QuotientObject] = []
    for blocks in set_partitions(C.size):
        forced = quotient_by_blocks(C, blocks)
        m = len(blocks)
        free = [(sym.name, t) for sym in C.signature.symbols
                for t in product(range(m), repeat=sym.arity)
                if t not in forced.codomain.relation_set(sym.name)]
        for r in range(len(free) + 1):
            for extra in combinations(free, r):
                relations = {sym: list(forced.codomain.tuples(sym)) for sym in C.signature.names}
                for sym, t in extra:
                    relations[sym].append(t)
                Q = RelStructure(C.signature, m, relations, name=f"{C.name}/q{len(result)}")
                result.append(QuotientObject(C, forced.partition, Q,
                                             Homomorphism(C, Q, forced.surjection.mapping)))
    logger.debug(f"{C.name}: {len(result)} quotient objects")
    return result


def functor_J(A: RelStructure, name: str = EQUALITY_SYMBOL) -> RelStructure:
    """Extend A with a symbol interpreted as the diagonal."""
    signature = A.signature.extended(name)
    relations = dict(A.relations)
    relations[name] = [(a, a) for a in A.universe]
    return RelStructure(signature, A.size, relations, name=f"J({A.name})")


def equality_symbol_of(D: RelStructure, name: Optional[str] = None) -> str:
    name = name or D.signature.equality or EQUALITY_SYMBOL
    if name not in D.signature or D.signature.arity(name) != 2:
        raise PreconditionError(f"Structure {D.name} has no binary equality symbol {name}")
    return name


def functor_H(D: RelStructure, name: Optional[str] = None) -> Tuple[RelStructure, Homomorphism]:
    """Quotient the reduct of D by the equivalence generated by the equality symbol."""
    name = equality_symbol_of(D, name)
    blocks = blocks_from_pairs(D.size, D.tuples(name))
    q = quotient_by_blocks(D, blocks, signature=D.signature.without(name), name=f"H({D.name})")
    return q.codomain, q.surjection


def _refinement(A: RelStructure) -> Tuple[List[int], Tuple]:
    """Stable relational colour refinement.

    Colours are ranks of sorted signatures, so both the colours and the
    returned history are invariant under renaming the elements.
    """
    index = {n: i for i, n in enumerate(A.signature.names)}
    occ = [[(index[sym], tuple(i for i, y in enumerate(t) if y == x), t) for sym, t in A.occurrences(x)]
           for x in A.universe]
    colors = [0] * A.size
    classes = 1 if A.size else 0
    history = []
    while True:
        sigs = [(colors[x], tuple(sorted((s, pos, tuple(colors[y] for y in t)) for s, pos, t in occ[x])))
                for x in A.universe]
        ranked = sorted(set(sigs))
        rank = {s: i for i, s in enumerate(ranked)}
        history.append(tuple(sorted(sigs)))
        colors = [rank[s] for s in sigs]
        if len(ranked) == classes:
            return colors, tuple(history)
        classes = len(ranked)


def structure_invariant(A: RelStructure) -> Tuple:
    """Isomorphism invariant used to bucket structures before exact checks."""
    return (A.signature.symbols, A.size,
            tuple(len(A.tuples(n)) for n in A.signature.names),
            _refinement(A)[1])


def iso_check(A: RelStructure, B: RelStructure,
              fixed: Optional[Mapping[int, int]] = None) -> Optional[Homomorphism]:
    """First isomorphism A -> B in lexicographic backtracking order, or None.

    `fixed` pins images of selected elements (used for pointed structures).
    """
    if A.signature != B.signature or A.size != B.size:
        return None
    if any(len(A.tuples(n)) != len(B.tuples(n)) for n in A.signature.names):
        return None
    colors_a, history_a = _refinement(A)
    colors_b, history_b = _refinement(B)
    if history_a != history_b:
        return None
    fixed = dict(fixed or {})
    n = A.size
    forward: List[Optional[int]] = [None] * n
    backward: List[Optional[int]] = [None] * n

    def consistent(a: int, b: int) -> bool:
        for sym, t in A.occurrences(a):
            if all(forward[x] is not None for x in t) and not B.holds(sym, [forward[x] for x in t]):
                return False
        for sym, t in B.occurrences(b):
            if all(backward[y] is not None for y in t) and not A.holds(sym, [backward[y] for y in t]):
                return False
        return True

    def extend(a: int) -> bool:
        if a == n:
            return True
        candidates = [fixed[a]] if a in fixed else range(n)
        for b in candidates:
            if backward[b] is not None or colors_b[b] != colors_a[a]:
                continue
            forward[a], backward[b] = b, a
            if consistent(a, b) and extend(a + 1):
                return True
            forward[a], backward[b] = None, None
        return False

    if extend(0):
        return Homomorphism(A, B, tuple(forward))
    return None
