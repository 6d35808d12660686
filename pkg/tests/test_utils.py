import json

import pytest

from modules.comonads import ComonadKind, build_comonad
from modules.covers import ForestCover, PebbleForestCover
from modules.exceptions import MalformedInputError
from modules.graphs import complete_graph, cycle_graph
from modules.structures import PointedStructure
from modules.utils import (
    comonad_sidecar,
    cover_from_dict,
    cover_to_dict,
    dump_structure,
    load_cover,
    load_structure,
    parse_graph_text,
    structure_from_dict,
)


class TestStructureFiles:
    """Tests for structure input and output."""

    def test_json_file(self, tmp_path):
        """Test a dumped structure loads back equal."""
        path = tmp_path / "tri.json"
        path.write_text(dump_structure(complete_graph(3)))
        loaded = load_structure(path)
        assert loaded == complete_graph(3)
        assert loaded.name == "K3"

    def test_name_from_file_stem(self, tmp_path):
        """Test unnamed data takes the file name."""
        path = tmp_path / "edge.json"
        path.write_text(json.dumps({"signature": [{"name": "E", "arity": 2}], "size": 2,
                                    "relations": {"E": [[0, 1]]}}))
        assert load_structure(path).name == "edge"

    def test_pointed(self):
        """Test a point turns the structure into a pointed one."""
        data = {"signature": [{"name": "R", "arity": 2}], "size": 2, "relations": {"R": [[0, 1]]}, "point": 1}
        S = structure_from_dict(data)
        assert isinstance(S, PointedStructure)
        assert S.point == 1

    def test_missing_field(self):
        """Test a missing size raises."""
        with pytest.raises(MalformedInputError):
            structure_from_dict({"signature": [{"name": "E", "arity": 2}]})

    def test_invalid_json(self, tmp_path):
        """Test broken JSON raises."""
        path = tmp_path / "broken.json"
        path.write_text("{")
        with pytest.raises(MalformedInputError):
            load_structure(path)

    def test_graph_text(self, tmp_path):
        """Test the plain edge-list format."""
        path = tmp_path / "C4.txt"
        path.write_text("# square\nn 4\ne 0 1\ne 1 2\ne 2 3\ne 3 0\n")
        G = load_structure(path)
        assert G == cycle_graph(4)
        assert G.name == "C4"

    def test_graph_text_errors(self):
        """Test bad lines and missing size."""
        with pytest.raises(MalformedInputError):
            parse_graph_text("e 0 1\n")
        with pytest.raises(MalformedInputError):
            parse_graph_text("n 2\nx 0 1\n")
        with pytest.raises(MalformedInputError):
            parse_graph_text("n two\n")


class TestCoverFiles:
    """Tests for cover input and output."""

    def test_forest_cover(self):
        """Test a parent array alone gives a forest cover."""
        cover = cover_from_dict(complete_graph(2), {"parent": [-1, 0]})
        assert isinstance(cover, ForestCover)
        assert cover_to_dict(cover) == {"parent": [-1, 0]}

    def test_pebble_cover(self, tmp_path):
        """Test pebbles make a pebble cover."""
        path = tmp_path / "cover.json"
        path.write_text(json.dumps({"parent": [-1, 0], "pebbles": [1, 2], "k": 2}))
        cover = load_cover(path, complete_graph(2))
        assert isinstance(cover, PebbleForestCover)
        assert cover.pebbles == (1, 2)

    def test_missing_parent(self):
        """Test the parent array is required."""
        with pytest.raises(MalformedInputError):
            cover_from_dict(complete_graph(2), {"pebbles": [1, 2]})

    def test_comonad_sidecar(self):
        """Test the decoding table lists every play."""
        cs = build_comonad(ComonadKind.pebble(1, 1), complete_graph(2))
        sidecar = comonad_sidecar(cs)
        assert sidecar["kind"] == "PEBBLE(1,1)"
        assert sidecar["plays"] == [[[1, 0]], [[1, 1]]]
        assert sidecar["counit"] == [0, 1]
