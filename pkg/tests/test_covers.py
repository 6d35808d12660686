import pytest

from modules.covers import (
    ROOT,
    ForestCover,
    PebbleForestCover,
    active_elements,
    compute_tree_depth,
    compute_tree_width,
    eliminate_equalities,
    find_pebble_forest_cover,
    next_equality_pair,
    one_step_quotient,
    quotient_forest_cover,
    sees,
    validate_forest_cover,
    validate_pebble_cover,
)
from modules.exceptions import InvalidCoverError, PreconditionError, SizeCapExceededError
from modules.graphs import complete_graph, cycle_graph, edgeless_graph, path_graph
from modules.homcount import hom_count
from modules.sampling import make_rng, random_pebbled_instance
from modules.structures import GRAPH_SIGNATURE, RelStructure, functor_H, functor_J, iso_check


def _chain_instance(pebbles):
    """Chain 0 < 1 < 2 with I(0, 1) and an edge between 0 and 2."""
    sig = GRAPH_SIGNATURE.extended()
    A = RelStructure(sig, 3, {"E": [(0, 2), (2, 0)], "I": [(0, 0), (1, 1), (2, 2), (0, 1)]}, name="chain")
    return A, PebbleForestCover(ForestCover(A, [ROOT, 0, 1]), pebbles, 2)


class TestForestCover:
    """Tests for forest orders and their validation."""

    def test_depth_and_height(self):
        """Test depths along a chain."""
        cover = ForestCover(path_graph(3), [ROOT, 0, 1])
        assert [cover.depth(x) for x in range(3)] == [1, 2, 3]
        assert cover.height == 3
        assert cover.roots() == (0,)

    def test_cycle_rejected(self):
        """Test parent links may not loop."""
        with pytest.raises(InvalidCoverError):
            ForestCover(path_graph(2), [1, 0])

    def test_wrong_length(self):
        """Test the parent array must cover the universe."""
        with pytest.raises(InvalidCoverError):
            ForestCover(path_graph(3), [ROOT, 0])

    def test_compatibility(self):
        """Test a star rooted at the centre fits P3 but a flat forest does not."""
        P3 = path_graph(3)
        assert validate_forest_cover(P3, ForestCover(P3, [1, ROOT, 1]), 2)
        assert not validate_forest_cover(P3, ForestCover(P3, [ROOT, ROOT, ROOT]), 3)
        assert not validate_forest_cover(P3, ForestCover(P3, [1, ROOT, 1]), 1)


class TestPebbleCover:
    """Tests for pebble visibility."""

    def test_sees_blocked_by_reuse(self):
        """Test a reused pebble hides the element below it."""
        P3 = path_graph(3)
        cover = PebbleForestCover(ForestCover(P3, [ROOT, 0, 1]), [1, 2, 1], 2)
        assert sees(cover, 0, 1)
        assert sees(cover, 1, 2)
        assert not sees(cover, 0, 2)
        assert validate_pebble_cover(P3, cover, 2, 3)

    def test_active_elements(self):
        """Test holders of pebbles at the bottom of a chain."""
        cover = PebbleForestCover(ForestCover(path_graph(3), [ROOT, 0, 1]), [1, 2, 1], 2)
        assert active_elements(cover, 2) == (1, 2)

    def test_triangle_needs_three_pebbles(self):
        """Test K3 has no 2-pebble cover."""
        assert find_pebble_forest_cover(complete_graph(3), 2) is None
        cover = find_pebble_forest_cover(complete_graph(3), 3)
        assert validate_pebble_cover(complete_graph(3), cover, 3, 3)

    def test_bad_pebble_number(self):
        """Test pebbles outside 1..k fail validation."""
        P2 = path_graph(2)
        cover = PebbleForestCover(ForestCover(P2, [ROOT, 0]), [1, 3], 2)
        assert not validate_pebble_cover(P2, cover, 2, 2)


class TestWidthMeasures:
    """Tests for tree-depth and tree-width."""

    def test_tree_depth_of_path(self):
        """Test td(P4) is 3."""
        depth, cover = compute_tree_depth(path_graph(4))
        assert depth == 3
        assert validate_forest_cover(path_graph(4), cover, 3)

    def test_tree_depth_of_cliques(self):
        """Test td(K_n) is n."""
        for n in range(1, 5):
            assert compute_tree_depth(complete_graph(n))[0] == n

    def test_tree_depth_of_isolated_points(self):
        """Test td of an edgeless graph is 1."""
        assert compute_tree_depth(edgeless_graph(3))[0] == 1

    def test_tree_depth_cap(self):
        """Test the size guard."""
        with pytest.raises(SizeCapExceededError):
            compute_tree_depth(path_graph(5), cap=4)

    def test_tree_width(self):
        """Test tw of a path, cycles and cliques."""
        assert compute_tree_width(path_graph(5))[0] == 1
        assert compute_tree_width(cycle_graph(5))[0] == 2
        assert compute_tree_width(complete_graph(4))[0] == 3

    def test_tree_width_cover_validates(self):
        """Test the returned cover uses tw + 1 pebbles."""
        C5 = cycle_graph(5)
        width, cover = compute_tree_width(C5)
        assert validate_pebble_cover(C5, cover, width + 1, cover.height)


class TestOneStepQuotient:
    """Tests for equality elimination on pebbled covers."""

    def test_reused_upper_pebble(self):
        """Test pebbling (1, 2, 2) becomes (1, 2)."""
        A, cover = _chain_instance([1, 2, 2])
        quotient, new_cover = one_step_quotient(A, cover, 0, 1)
        assert quotient.size == 2
        assert new_cover.pebbles == (1, 2)
        assert new_cover.cover.parent == (ROOT, 0)

    def test_reused_lower_pebble(self):
        """Test pebbling (1, 2, 1) becomes (1, 2)."""
        A, cover = _chain_instance([1, 2, 1])
        _, new_cover = one_step_quotient(A, cover, 0, 1)
        assert new_cover.pebbles == (1, 2)

    def test_pair_must_be_equality(self):
        """Test non-equality pairs are refused."""
        A, cover = _chain_instance([1, 2, 2])
        with pytest.raises(PreconditionError):
            one_step_quotient(A, cover, 1, 2)

    def test_next_pair_orientation(self):
        """Test the next pair lists the lower element first."""
        A, cover = _chain_instance([1, 2, 2])
        assert next_equality_pair(A, cover) == (0, 1)

    def test_eliminate_matches_functor_H(self):
        """Test elimination gives H of the input."""
        A, cover = _chain_instance([1, 2, 2])
        H, new_cover = eliminate_equalities(A, cover)
        assert H == functor_H(A)[0]
        assert H.signature == GRAPH_SIGNATURE
        assert validate_pebble_cover(H, new_cover, 2, 2)

    def test_no_equalities(self):
        """Test J(A) needs no quotient steps."""
        P3 = path_graph(3)
        D = functor_J(P3)
        cover = PebbleForestCover(ForestCover(D, [ROOT, 0, 1]), [1, 2, 1], 2)
        H, _ = eliminate_equalities(D, cover)
        assert H == P3


class TestSeesPreservation:
    """Tests for one-step quotients on seeded random pebbled instances."""

    def test_thousand_random_quotients(self):
        """Test both sees clauses, validity, height and elimination on each instance."""
        rng = make_rng(11)
        checked = 0
        while checked < 1000:
            size, k = int(rng.integers(3, 7)), int(rng.integers(2, 4))
            height = int(rng.integers(2, size + 1))
            A, cover = random_pebbled_instance(rng, size=size, k=k, height=height)
            assert validate_pebble_cover(A, cover, k, height)
            pairs = sorted((a, b) for a, b in A.tuples("I") if a != b)
            if not pairs:
                continue
            u, v = pairs[int(rng.integers(len(pairs)))]
            if cover.cover.is_ancestor(v, u):
                u, v = v, u
            quotient, new_cover = one_step_quotient(A, cover, u, v)
            index = {w: w if w < v else w - 1 for w in A.universe if w != v}
            for w in index:
                if sees(cover, v, w):
                    assert sees(new_cover, index[u], index[w]), f"instance {checked}: {v} sees {w}"
                for w2 in index:
                    if sees(cover, w, w2):
                        assert sees(new_cover, index[w], index[w2]), f"instance {checked}: {w} sees {w2}"
            assert validate_pebble_cover(quotient, new_cover, k, height)
            assert new_cover.height <= cover.height
            H, final_cover = eliminate_equalities(A, cover)
            assert iso_check(H, functor_H(A)[0]) is not None
            assert validate_pebble_cover(H, final_cover, k, height)
            checked += 1


class TestQuotientForestCover:
    """Tests for pushing a compatible cover through H."""

    def test_class_collapses_to_least(self):
        """Test the chain collapses to an edge."""
        A, cover = _chain_instance([1, 2, 2])
        result = quotient_forest_cover(A, cover.cover)
        assert result.parent == (ROOT, 0)
        assert hom_count(result.base, complete_graph(2)) == 2
