import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

from modules.comonads import ComonadStructure
from modules.covers import ForestCover, PebbleForestCover
from modules.exceptions import MalformedInputError
from modules.graphs import graph_from_edges
from modules.structures import PointedStructure, RelStructure, Signature, Symbol

logger = logging.getLogger(__name__)

Loaded = Union[RelStructure, PointedStructure]


def structure_from_dict(data: Dict[str, Any], name: str = "") -> Loaded:
    """
    Build a structure from its JSON form.

    Args:
        data: {"signature": [{"name", "arity"}], "size", "relations", "point"?}
        name: display name used when the data carries none

    Returns:
        A RelStructure, or a PointedStructure when "point" is present
    """
    try:
        signature = Signature(tuple(Symbol(s["name"], s["arity"]) for s in data["signature"]))
        A = RelStructure(signature, data["size"], data.get("relations", {}), name=data.get("name", name))
    except (KeyError, TypeError) as e:
        raise MalformedInputError(f"Structure data is missing or has a bad field: {e}")
    if data.get("point") is not None:
        return PointedStructure(A, data["point"])
    return A


def structure_to_dict(S: Loaded) -> Dict[str, Any]:
    A = S.structure if isinstance(S, PointedStructure) else S
    data: Dict[str, Any] = {
        "name": A.name,
        "signature": [{"name": s.name, "arity": s.arity} for s in A.signature.symbols],
        "size": A.size,
        "relations": {n: [list(t) for t in A.tuples(n)] for n in A.signature.names},
    }
    if isinstance(S, PointedStructure):
        data["point"] = S.point
    return data


def parse_graph_text(text: str, name: str = "") -> RelStructure:
    """Plain graph shorthand: a line "n <size>" then "e u v" lines, edges made symmetric."""
    size = None
    edges = []
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "n" and len(parts) == 2:
                size = int(parts[1])
            elif parts[0] == "e" and len(parts) == 3:
                edges.append((int(parts[1]), int(parts[2])))
            else:
                raise MalformedInputError(f"Line {number}: expected 'n <size>' or 'e <u> <v>'")
        except ValueError as e:
            raise MalformedInputError(f"Line {number}: {e}")
    if size is None:
        raise MalformedInputError("Graph text has no 'n <size>' line")
    return graph_from_edges(size, edges, name=name)


def load_structure(path: Union[str, Path]) -> Loaded:
    """Load a JSON structure file, or the plain graph text format for other suffixes."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise MalformedInputError(f"{path}: invalid JSON ({e})")
        return structure_from_dict(data, name=path.stem)
    return parse_graph_text(text, name=path.stem)


def dump_structure(S: Loaded) -> str:
    return json.dumps(structure_to_dict(S), indent=2)


def cover_from_dict(A: RelStructure, data: Dict[str, Any]) -> Union[ForestCover, PebbleForestCover]:
    """{"parent": [...]} gives a forest cover; adding "pebbles" and "k" gives a pebble cover."""
    try:
        forest = ForestCover(A, data["parent"])
        if "pebbles" in data:
            return PebbleForestCover(forest, data["pebbles"], data.get("k", max(data["pebbles"], default=1)))
        return forest
    except (KeyError, TypeError) as e:
        raise MalformedInputError(f"Cover data is missing or has a bad field: {e}")


def cover_to_dict(cover: Union[ForestCover, PebbleForestCover]) -> Dict[str, Any]:
    if isinstance(cover, PebbleForestCover):
        return {"parent": list(cover.cover.parent), "pebbles": list(cover.pebbles), "k": cover.k}
    return {"parent": list(cover.parent)}


def load_cover(path: Union[str, Path], A: RelStructure) -> Union[ForestCover, PebbleForestCover]:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise MalformedInputError(f"{path}: invalid JSON ({e})")
    return cover_from_dict(A, data)


def comonad_sidecar(cs: ComonadStructure) -> Dict[str, Any]:
    """Decoding table for a carrier: the play behind each element and the counit."""
    return {
        "kind": cs.kind.label,
        "plays": [list(list(m) if isinstance(m, tuple) else m for m in s) for s in cs.plays],
        "counit": list(cs.counit),
    }
