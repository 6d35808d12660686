"""Game comonads on finite structures: plays of bounded length, pebbled plays and
pointed paths, with counit, coextension and coalgebra checks."""

import logging
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from config.settings import CARRIER_BOUND
from modules.covers import ROOT, ForestCover, PebbleForestCover, validate_forest_cover, validate_pebble_cover
from modules.exceptions import (
    InvalidCoverError,
    InvalidMorphismError,
    MalformedInputError,
    NotSynchronizationTreeError,
    SizeCapExceededError,
)
from modules.structures import Homomorphism, PointedStructure, RelStructure, compose, validate_hom

logger = logging.getLogger(__name__)

EF, PEBBLE, MODAL = "ef", "pebble", "modal"

Play = Tuple
Base = Union[RelStructure, PointedStructure]


@dataclass(frozen=True)
class ComonadKind:
    tag: str
    n: int = 0
    k: int = 0

    def __post_init__(self):
        if self.tag not in (EF, PEBBLE, MODAL):
            raise MalformedInputError(f"Unknown comonad kind: {self.tag}")
        if self.tag in (EF, PEBBLE) and self.n < 1:
            raise MalformedInputError("Play length bound must be positive")
        if self.tag in (PEBBLE, MODAL) and self.k < 1:
            raise MalformedInputError("Pebble count / path length must be positive")

    @classmethod
    def ef(cls, n: int) -> "ComonadKind":
        return cls(EF, n=n)

    @classmethod
    def pebble(cls, k: int, n: int) -> "ComonadKind":
        return cls(PEBBLE, n=n, k=k)

    @classmethod
    def modal(cls, k: int) -> "ComonadKind":
        return cls(MODAL, k=k)

    @property
    def label(self) -> str:
        if self.tag == EF:
            return f"EF({self.n})"
        if self.tag == PEBBLE:
            return f"PEBBLE({self.k},{self.n})"
        return f"MODAL({self.k})"


def _structure(base: Base) -> RelStructure:
    return base.structure if isinstance(base, PointedStructure) else base


def last_element(kind: ComonadKind, play: Play) -> int:
    return play[-1] if kind.tag == EF else play[-1][1]


def coextend_play(kind: ComonadKind, play: Play, fn: Callable[[Play], object]) -> Play:
    """Apply fn to every non-empty prefix, keeping pebble indices and path labels."""
    if kind.tag == EF:
        return tuple(fn(play[:i]) for i in range(1, len(play) + 1))
    return tuple((play[i - 1][0], fn(play[:i])) for i in range(1, len(play) + 1))


def _is_prefix(s: Play, t: Play) -> bool:
    return len(s) <= len(t) and t[:len(s)] == s


def valid_play(kind: ComonadKind, base: Base, play: Play) -> bool:
    A = _structure(base)
    if not isinstance(play, tuple) or not play:
        return False
    if kind.tag == EF:
        return len(play) <= kind.n and all(isinstance(a, int) and 0 <= a < A.size for a in play)
    if any(not isinstance(m, tuple) or len(m) != 2 for m in play):
        return False
    if kind.tag == PEBBLE:
        return len(play) <= kind.n and all(
            isinstance(p, int) and 1 <= p <= kind.k and isinstance(a, int) and 0 <= a < A.size for p, a in play)
    if len(play) - 1 > kind.k or play[0] != ("", base.point):
        return False
    for (_, a), (label, b) in zip(play, play[1:]):
        if label not in base.binary_symbols() or not A.holds(label, (a, b)):
            return False
    return True


def carrier_holds(kind: ComonadKind, base: Base, symbol: str, plays: Sequence[Play]) -> bool:
    """Whether `plays` is a tuple of the symbol's relation in the comonad carrier."""
    A = _structure(base)
    if not all(valid_play(kind, base, s) for s in plays):
        return False
    if kind.tag == MODAL:
        if len(plays) == 1:
            return A.holds(symbol, (last_element(kind, plays[0]),))
        s, t = plays
        return len(t) == len(s) + 1 and t[:-1] == s and t[-1][0] == symbol
    for i, s in enumerate(plays):
        for t in plays[i + 1:]:
            if not (_is_prefix(s, t) or _is_prefix(t, s)):
                return False
    if not A.holds(symbol, [last_element(kind, s) for s in plays]):
        return False
    if kind.tag == PEBBLE:
        for s in plays:
            for t in plays:
                if len(s) < len(t) and _is_prefix(s, t):
                    if any(p == s[-1][0] for p, _ in t[len(s):]):
                        return False
    return True


def carrier_size(kind: ComonadKind, base: Base) -> int:
    A = _structure(base)
    if kind.tag == EF:
        return sum(A.size ** i for i in range(1, kind.n + 1))
    if kind.tag == PEBBLE:
        return sum((kind.k * A.size) ** i for i in range(1, kind.n + 1))
    walks = [0] * A.size
    walks[base.point] = 1
    total = 1
    for _ in range(kind.k):
        step = [0] * A.size
        for label in base.binary_symbols():
            for a, b in A.tuples(label):
                step[b] += walks[a]
        walks = step
        total += sum(walks)
    return total


@dataclass(frozen=True)
class ComonadStructure:
    kind: ComonadKind
    base: Base
    carrier: RelStructure
    plays: Tuple[Play, ...]
    counit: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.plays)})

    def index_of(self, play: Play) -> int:
        try:
            return self._index[play]
        except KeyError:
            raise InvalidMorphismError(f"{play} is not an element of the {self.kind.label} carrier")

    def counit_hom(self) -> Homomorphism:
        return Homomorphism(self.carrier, _structure(self.base), self.counit)

    @property
    def pointed_carrier(self) -> PointedStructure:
        return PointedStructure(self.carrier, 0)


def _plays(kind: ComonadKind, base: Base) -> List[Play]:
    A = _structure(base)
    if kind.tag == EF:
        moves: List = list(A.universe)
    elif kind.tag == PEBBLE:
        moves = [(p, a) for p in range(1, kind.k + 1) for a in A.universe]
    else:
        paths = [(("", base.point),)]
        frontier = list(paths)
        for _ in range(kind.k):
            frontier = [s + ((label, b),) for s in frontier for label in base.binary_symbols()
                        for (a, b) in A.tuples(label) if a == s[-1][1]]
            paths.extend(frontier)
        return sorted(paths, key=lambda s: (len(s), s))
    return [s for length in range(1, kind.n + 1) for s in product(moves, repeat=length)]


def build_comonad(kind: ComonadKind, base: Base, bound: int = CARRIER_BOUND) -> ComonadStructure:
    """Materialize the comonad carrier on `base` with its counit."""
    if kind.tag == MODAL and not isinstance(base, PointedStructure):
        raise MalformedInputError("The modal comonad needs a pointed structure")
    A = _structure(base)
    size = carrier_size(kind, base)
    if size > bound:
        raise SizeCapExceededError(f"{kind.label} carrier on {A.name} has {size} elements, bound is {bound}")
    plays = _plays(kind, base)
    index = {s: i for i, s in enumerate(plays)}
    relations: Dict[str, List[Tuple[int, ...]]] = {}
    for sym in A.signature.symbols:
        tuples = []
        if kind.tag == MODAL:
            if sym.arity == 1:
                tuples = [(i,) for i, s in enumerate(plays) if A.holds(sym.name, (s[-1][1],))]
            else:
                tuples = [(index[s[:-1]], i) for i, s in enumerate(plays) if len(s) > 1 and s[-1][0] == sym.name]
        else:
            for s in plays:
                L = len(s)
                for lengths in product(range(1, L + 1), repeat=sym.arity):
                    if max(lengths) != L:
                        continue
                    candidate = [s[:l] for l in lengths]
                    if carrier_holds(kind, base, sym.name, candidate):
                        tuples.append(tuple(index[c] for c in candidate))
        relations[sym.name] = tuples
    carrier = RelStructure(A.signature, len(plays), relations, name=f"{kind.label}({A.name})")
    counit = tuple(last_element(kind, s) for s in plays)
    logger.debug(f"Built {carrier.name}: {carrier.size} plays, {carrier.tuple_count()} tuples")
    return ComonadStructure(kind, base, carrier, tuple(plays), counit)


def coextension(cs: ComonadStructure, f: Homomorphism,
                target: Optional[ComonadStructure] = None) -> Homomorphism:
    """f* sending a play to the sequence of f-values on its prefixes."""
    if f.source != cs.carrier or not validate_hom(f):
        raise InvalidMorphismError("Coextension needs a homomorphism out of the carrier")
    if target is None:
        base = PointedStructure(f.target, f(0)) if cs.kind.tag == MODAL else f.target
        target = build_comonad(cs.kind, base)
    if _structure(target.base) != f.target:
        raise InvalidMorphismError("Target comonad structure is not built on the codomain of f")
    mapping = tuple(target.index_of(coextend_play(cs.kind, s, lambda prefix: f(cs.index_of(prefix))))
                    for s in cs.plays)
    return Homomorphism(cs.carrier, target.carrier, mapping)


def comonad_map(cs: ComonadStructure, f: Homomorphism, target: ComonadStructure,
                coextend=coextension) -> Homomorphism:
    """Functor action on f: A -> B, namely (f after counit)*."""
    return coextend(cs, compose(f, cs.counit_hom()), target)


def check_comonad_laws(kind: ComonadKind, A: Base, B: Base, C: Base, f: Homomorphism, g: Homomorphism,
                       coextend=coextension) -> bool:
    """Counit, coextension-counit and associativity equations, checked pointwise."""
    cs_a, cs_b, cs_c = build_comonad(kind, A), build_comonad(kind, B), build_comonad(kind, C)
    identity_law = coextend(cs_a, cs_a.counit_hom(), cs_a).mapping == tuple(cs_a.carrier.universe)
    f_star = coextend(cs_a, f, cs_b)
    counit_law = compose(cs_b.counit_hom(), f_star).mapping == f.mapping
    left = coextend(cs_a, compose(g, f_star), cs_c)
    right = compose(coextend(cs_b, g, cs_c), f_star)
    associativity = left.mapping == right.mapping
    if not (identity_law and counit_law and associativity):
        logger.debug(f"{kind.label} laws: identity={identity_law} counit={counit_law} assoc={associativity}")
    return identity_law and counit_law and associativity


@dataclass(frozen=True)
class Coalgebra:
    """A map sending each element of the base to a play, alpha(a) = plays[a]."""

    base: Base
    kind: ComonadKind
    plays: Tuple[Play, ...]

    @cached_property
    def comonad(self) -> ComonadStructure:
        return build_comonad(self.kind, self.base)

    @property
    def alpha(self) -> Homomorphism:
        """The structure map from the base into the comonad carrier."""
        cs = self.comonad
        return Homomorphism(_structure(self.base), cs.carrier, tuple(cs.index_of(s) for s in self.plays))


def check_coalgebra(c: Coalgebra) -> bool:
    """alpha is a homomorphism, counit after alpha is the identity, and
    comultiplication after alpha equals the functor image of alpha after alpha."""
    A = _structure(c.base)
    kind = c.kind
    if len(c.plays) != A.size or not all(valid_play(kind, c.base, s) for s in c.plays):
        return False
    if kind.tag == MODAL and c.plays[c.base.point] != (("", c.base.point),):
        return False
    for sym, t in A.all_tuples():
        if not carrier_holds(kind, c.base, sym, [c.plays[x] for x in t]):
            return False
    if any(last_element(kind, s) != a for a, s in enumerate(c.plays)):
        return False
    for s in c.plays:
        comultiplied = coextend_play(kind, s, lambda prefix: prefix)
        mapped = coextend_play(kind, s, lambda prefix: c.plays[last_element(kind, prefix)])
        if comultiplied != mapped:
            return False
    return True


@dataclass(frozen=True)
class SyncTreeCertificate:
    base: PointedStructure
    parent: Tuple[int, ...]
    labels: Tuple[str, ...]
    height: int


def synchronization_paths(P: PointedStructure) -> Optional[List[Play]]:
    """The unique path from the point to every element, or None if some element
    is unreachable or reachable in two ways."""
    A = P.structure
    paths: Dict[int, Play] = {P.point: (("", P.point),)}
    frontier = [P.point]
    while frontier:
        nxt = []
        for a in frontier:
            for label in P.binary_symbols():
                for x, b in A.tuples(label):
                    if x != a:
                        continue
                    if b in paths:
                        return None
                    paths[b] = paths[a] + ((label, b),)
                    nxt.append(b)
        frontier = nxt
    if len(paths) != A.size:
        return None
    return [paths[a] for a in A.universe]


def is_synchronization_tree(P: PointedStructure, k: Optional[int] = None) -> bool:
    paths = synchronization_paths(P)
    return paths is not None and (k is None or max(len(s) for s in paths) - 1 <= k)


def cover_to_coalgebra(A: Base, kind: ComonadKind,
                       cover: Union[ForestCover, PebbleForestCover, None] = None) -> Coalgebra:
    """Coalgebra built from a cover: root paths, pebbled root paths, or unique point paths."""
    if kind.tag == EF:
        if not isinstance(cover, ForestCover) or not validate_forest_cover(A, cover, kind.n):
            raise InvalidCoverError(f"Need a compatible forest cover of height <= {kind.n}")
        plays = tuple(tuple(cover.root_path(a)) for a in A.universe)
    elif kind.tag == PEBBLE:
        if not isinstance(cover, PebbleForestCover) or not validate_pebble_cover(A, cover, kind.k, kind.n):
            raise InvalidCoverError(f"Need a {kind.k}-pebble forest cover of height <= {kind.n}")
        plays = tuple(tuple((cover.pebbles[z], z) for z in cover.cover.root_path(a)) for a in A.universe)
    else:
        if not isinstance(A, PointedStructure) or not is_synchronization_tree(A, kind.k):
            raise NotSynchronizationTreeError(f"Not a synchronization tree of height <= {kind.k}")
        plays = tuple(synchronization_paths(A))
    coalgebra = Coalgebra(A, kind, plays)
    if not check_coalgebra(coalgebra):
        raise InvalidCoverError(f"Constructed {kind.label} coalgebra fails the coalgebra laws")
    return coalgebra


def coalgebra_to_cover(c: Coalgebra) -> Union[ForestCover, PebbleForestCover, SyncTreeCertificate]:
    """Read the forest order off the prefix order of the plays."""
    if not check_coalgebra(c):
        raise InvalidMorphismError("Not a coalgebra")
    parent = tuple(last_element(c.kind, s[:-1]) if len(s) > 1 else ROOT for s in c.plays)
    if c.kind.tag == EF:
        return ForestCover(c.base, parent)
    if c.kind.tag == PEBBLE:
        return PebbleForestCover(ForestCover(c.base, parent), [s[-1][0] for s in c.plays], c.kind.k)
    return SyncTreeCertificate(c.base, parent, tuple(s[-1][0] for s in c.plays),
                               max(len(s) for s in c.plays) - 1)
