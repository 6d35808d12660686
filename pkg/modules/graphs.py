"""Named graph structures over the single binary symbol E."""

from typing import Iterable, Tuple

from modules.structures import GRAPH_SIGNATURE, RelStructure, disjoint_union


def graph_from_edges(size: int, edges: Iterable[Tuple[int, int]], symmetric: bool = True,
                     name: str = "") -> RelStructure:
    tuples = []
    for u, v in edges:
        tuples.append((u, v))
        if symmetric:
            tuples.append((v, u))
    return RelStructure(GRAPH_SIGNATURE, size, {"E": tuples}, name=name)


def complete_graph(n: int) -> RelStructure:
    return graph_from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n)], name=f"K{n}")


def edgeless_graph(n: int) -> RelStructure:
    return graph_from_edges(n, [], name=f"{n}K1")


def path_graph(n: int) -> RelStructure:
    """Path on n vertices."""
    return graph_from_edges(n, [(i, i + 1) for i in range(n - 1)], name=f"P{n}")


def cycle_graph(n: int) -> RelStructure:
    return graph_from_edges(n, [(i, (i + 1) % n) for i in range(n)], name=f"C{n}")


def directed_path(n: int) -> RelStructure:
    return graph_from_edges(n, [(i, i + 1) for i in range(n - 1)], symmetric=False, name=f"DP{n}")


def copies(A: RelStructure, times: int) -> RelStructure:
    """Disjoint union of `times` copies of A."""
    result = A
    for _ in range(times - 1):
        result = disjoint_union(result, A)[0]
    return result.renamed(f"{times}{A.name}")


def is_simple_graph(A: RelStructure) -> bool:
    """Symmetric loop-free structure over the graph signature."""
    if A.signature != GRAPH_SIGNATURE:
        return False
    edges = A.relation_set("E")
    return all(u != v and (v, u) in edges for u, v in edges)
