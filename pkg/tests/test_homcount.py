from itertools import combinations_with_replacement

import pytest

from modules.covers import ForestCover, PebbleForestCover, find_pebble_forest_cover
from modules.enumeration import ALL, ClassSpec, enumerate_structures
from modules.exceptions import InvalidCoverError, SignatureMismatchError
from modules.graphs import complete_graph, copies, cycle_graph, directed_path, edgeless_graph, path_graph
from modules.homcount import hom_count, hom_count_treedec, hom_vector, pointed_hom_count, strong_emb_count
from modules.sampling import make_rng, random_graph
from modules.structures import PointedStructure, RelStructure, Signature, disjoint_union, gaifman_components


class TestHomCount:
    """Tests for backtracking homomorphism counts."""

    def setup_method(self):
        self.K2 = complete_graph(2)
        self.K3 = complete_graph(3)

    def test_edge_into_triangle(self):
        """Test hom(K2, K3) is 6."""
        assert hom_count(self.K2, self.K3) == 6

    def test_triangle_into_two_triangles(self):
        """Test hom(K3, 2K3) is 12."""
        assert hom_count(self.K3, copies(self.K3, 2)) == 12

    def test_triangle_into_hexagon(self):
        """Test the bipartite C6 has no triangles."""
        assert hom_count(self.K3, cycle_graph(6)) == 0

    def test_empty_source(self):
        """Test the empty structure has exactly one map."""
        assert hom_count(edgeless_graph(0), self.K3) == 1

    def test_isolated_points(self):
        """Test isolated points map anywhere."""
        assert hom_count(edgeless_graph(2), self.K3) == 9

    def test_cycle_into_triangle(self):
        """Test proper 3-colourings of C6."""
        assert hom_count(cycle_graph(6), self.K3) == 66

    def test_directed_path(self):
        """Test walks of length two in a directed path."""
        assert hom_count(directed_path(3), directed_path(4)) == 2

    def test_signature_mismatch(self):
        """Test counting across signatures raises."""
        other = RelStructure(Signature.of(("F", 2)), 1)
        with pytest.raises(SignatureMismatchError):
            hom_count(self.K2, other)

    def test_hom_vector(self):
        """Test a vector over several sources."""
        vector = hom_vector([self.K2, self.K3], cycle_graph(6))
        assert vector.counts == (12, 0)
        assert vector.as_dict() == {"K2": 12, "K3": 0}


class TestStrongAndPointed:
    """Tests for strong embeddings and pointed counts."""

    def test_edge_embeddings(self):
        """Test ordered edges of P3."""
        assert strong_emb_count(complete_graph(2), path_graph(3)) == 4

    def test_non_edge_must_be_reflected(self):
        """Test P3 is not induced in K3."""
        assert strong_emb_count(path_graph(3), complete_graph(3)) == 0

    def test_larger_source(self):
        """Test no injection into a smaller target."""
        assert strong_emb_count(complete_graph(3), complete_graph(2)) == 0

    def test_pointed_edge(self):
        """Test an edge pinned at its first end."""
        C = PointedStructure(complete_graph(2), 0)
        A = PointedStructure(complete_graph(3), 0)
        assert pointed_hom_count(C, A) == 2


class TestTreeDecompositionCount:
    """Tests for the cover-driven dynamic program."""

    def test_cycle_with_three_pebbles(self):
        """Test C6 into K3 through a 3-pebble cover."""
        C6 = cycle_graph(6)
        cover = find_pebble_forest_cover(C6, 3)
        assert hom_count_treedec(C6, cover, complete_graph(3)) == 66

    def test_path_cover(self):
        """Test a hand-written 2-pebble cover of P4."""
        P4 = path_graph(4)
        cover = PebbleForestCover(ForestCover(P4, [-1, 0, 1, 2]), [1, 2, 1, 2], 2)
        assert hom_count_treedec(P4, cover, complete_graph(3)) == hom_count(P4, complete_graph(3))

    def test_invalid_cover(self):
        """Test a cover that loses an edge is rejected."""
        P3 = path_graph(3)
        cover = PebbleForestCover(ForestCover(P3, [-1, 0, 1]), [1, 1, 1], 1)
        with pytest.raises(InvalidCoverError):
            hom_count_treedec(P3, cover, complete_graph(3))

    def test_matches_backtracking_on_random_graphs(self):
        """Test both counters agree on seeded random graphs."""
        rng = make_rng(7)
        for _ in range(5):
            C = random_graph(rng, 5)
            A = random_graph(rng, 4, density=0.6)
            cover = find_pebble_forest_cover(C, 5)
            assert hom_count_treedec(C, cover, A) == hom_count(C, A)


class TestCountingIdentities:
    """Tests for how hom counts behave under disjoint union."""

    def setup_method(self):
        self.graphs = list(enumerate_structures(ClassSpec(ALL, 4)))

    def test_additive_in_target_for_connected_sources(self):
        """Test hom(C, A + B) = hom(C, A) + hom(C, B) for connected C."""
        connected = [C for C in self.graphs if len(gaifman_components(C)) == 1]
        assert len(connected) == 10
        for A, B in combinations_with_replacement(self.graphs, 2):
            union = disjoint_union(A, B)[0]
            for C in connected:
                assert hom_count(C, union) == hom_count(C, A) + hom_count(C, B), f"{C.name} -> {A.name}+{B.name}"

    def test_disconnected_source_is_not_additive(self):
        """Test two isolated points count pairs across both parts."""
        two_points = edgeless_graph(2)
        assert hom_count(two_points, copies(complete_graph(1), 2)) == 4

    def test_multiplicative_in_source(self):
        """Test hom(C1 + C2, A) = hom(C1, A) * hom(C2, A) on graphs and digraphs."""
        graphs = [G for G in self.graphs if G.size <= 3]
        digraphs = list(enumerate_structures(ClassSpec(ALL, 2, graphs=False)))
        for family in (graphs, digraphs):
            for C1, C2 in combinations_with_replacement(family, 2):
                union = disjoint_union(C1, C2)[0]
                for A in family:
                    assert hom_count(union, A) == hom_count(C1, A) * hom_count(C2, A)
