"""Seeded random instances for property checks."""

import logging
from itertools import product
from typing import Optional, Tuple

import numpy as np

from config.settings import EQUALITY_SYMBOL, RANDOM_SEED
from modules.covers import ROOT, ForestCover, PebbleForestCover, sees
from modules.structures import GRAPH_SIGNATURE, PointedStructure, RelStructure, Signature

logger = logging.getLogger(__name__)


def make_rng(seed: Optional[int] = None) -> np.random.Generator:
    return np.random.default_rng(RANDOM_SEED if seed is None else seed)


def random_structure(rng: np.random.Generator, signature: Signature, size: int, density: float = 0.4,
                     name: str = "") -> RelStructure:
    relations = {
        sym.name: [t for t in product(range(size), repeat=sym.arity) if rng.random() < density]
        for sym in signature.symbols
    }
    return RelStructure(signature, size, relations, name=name or f"R{size}")


def random_graph(rng: np.random.Generator, size: int, density: float = 0.5, name: str = "") -> RelStructure:
    """Loop-free symmetric graph."""
    edges = [(u, v) for u in range(size) for v in range(u + 1, size) if rng.random() < density]
    return RelStructure(GRAPH_SIGNATURE, size, {"E": edges + [(v, u) for u, v in edges]},
                        name=name or f"G{size}")


def random_pointed(rng: np.random.Generator, signature: Signature, size: int,
                   density: float = 0.4) -> PointedStructure:
    A = random_structure(rng, signature, size, density)
    return PointedStructure(A, int(rng.integers(size)))


def random_forest(rng: np.random.Generator, size: int, height: int) -> Tuple[int, ...]:
    """Parent vector where every element's parent has a smaller index."""
    parent, depth = [], []
    for x in range(size):
        choices = [ROOT] + [y for y in range(x) if depth[y] < height]
        up = choices[int(rng.integers(len(choices)))]
        parent.append(up)
        depth.append(1 if up == ROOT else depth[up] + 1)
    return tuple(parent)


def random_pebbled_instance(rng: np.random.Generator, size: int, k: int, height: int,
                            signature: Signature = GRAPH_SIGNATURE, density: float = 0.5,
                            equality_density: float = 0.3,
                            equality: str = EQUALITY_SYMBOL) -> Tuple[RelStructure, PebbleForestCover]:
    """A structure over the signature plus an equality symbol with a valid
    k-pebble cover of height <= `height`.

    Relation tuples and equality pairs are drawn only among elements that
    see each other, so the cover validates by construction.
    """
    parent = random_forest(rng, size, height)
    pebbles = [int(rng.integers(1, k + 1)) for _ in range(size)]
    extended = signature.extended(equality)
    skeleton = PebbleForestCover(ForestCover(RelStructure(extended, size), parent), pebbles, k)
    seeing = [(a, b) for a in range(size) for b in range(size) if a == b or sees(skeleton, a, b)]
    relations = {}
    for sym in signature.symbols:
        if sym.arity > 2:
            continue
        if sym.arity == 1:
            relations[sym.name] = [(a,) for a in range(size) if rng.random() < density]
        else:
            relations[sym.name] = [t for t in seeing if rng.random() < density]
    relations[equality] = [(a, a) for a in range(size)] + [
        (a, b) for a, b in seeing if a != b and rng.random() < equality_density]
    A = RelStructure(extended, size, relations, name=f"P{size}k{k}")
    return A, skeleton.rebased(A)
