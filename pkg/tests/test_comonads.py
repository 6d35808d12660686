import pytest

from modules.comonads import (
    Coalgebra,
    ComonadKind,
    build_comonad,
    carrier_size,
    check_coalgebra,
    check_comonad_laws,
    coalgebra_to_cover,
    coextension,
    comonad_map,
    cover_to_coalgebra,
    is_synchronization_tree,
)
from modules.covers import ROOT, ForestCover, PebbleForestCover
from modules.exceptions import (
    InvalidCoverError,
    InvalidMorphismError,
    MalformedInputError,
    NotSynchronizationTreeError,
    SizeCapExceededError,
)
from modules.graphs import complete_graph, cycle_graph, directed_path, graph_from_edges, path_graph
from modules.structures import Homomorphism, PointedStructure, compose, validate_hom


def _broken_coextension(cs, f, target=None):
    """Coextension that sends every play to the first carrier element."""
    h = coextension(cs, f, target)
    return Homomorphism(h.source, h.target, tuple(0 for _ in h.mapping))


class TestCarriers:
    """Tests for carrier construction."""

    def test_ef_carrier_size(self):
        """Test EF(2) on two elements has six plays."""
        cs = build_comonad(ComonadKind.ef(2), complete_graph(2))
        assert cs.carrier.size == 6
        assert carrier_size(ComonadKind.ef(2), complete_graph(2)) == 6

    def test_ef_edges_follow_prefixes(self):
        """Test comparable plays with adjacent last moves are related."""
        cs = build_comonad(ComonadKind.ef(2), complete_graph(2))
        a, ab, aa = cs.index_of((0,)), cs.index_of((0, 1)), cs.index_of((0, 0))
        assert cs.carrier.holds("E", (a, ab))
        assert not cs.carrier.holds("E", (a, aa))
        assert not cs.carrier.holds("E", (cs.index_of((1,)), cs.index_of((0, 0))))

    def test_pebble_reuse_breaks_tuple(self):
        """Test a prefix whose pebble is moved later loses its edges."""
        cs = build_comonad(ComonadKind.pebble(1, 2), complete_graph(2))
        first, second = cs.index_of(((1, 0),)), cs.index_of(((1, 0), (1, 1)))
        assert not cs.carrier.holds("E", (first, second))
        two = build_comonad(ComonadKind.pebble(2, 2), complete_graph(2))
        assert two.carrier.holds("E", (two.index_of(((1, 0),)), two.index_of(((1, 0), (2, 1)))))

    def test_modal_paths_on_chain(self):
        """Test MODAL(2) on a three-element chain has three paths."""
        P = PointedStructure(directed_path(3), 0)
        cs = build_comonad(ComonadKind.modal(2), P)
        assert cs.carrier.size == 3
        assert cs.counit == (0, 1, 2)
        assert cs.carrier.holds("E", (0, 1))

    def test_modal_needs_point(self):
        """Test MODAL on an unpointed structure is refused."""
        with pytest.raises(MalformedInputError):
            build_comonad(ComonadKind.modal(1), directed_path(2))

    def test_counit_is_homomorphism(self):
        """Test the counit on EF and pebble carriers."""
        for kind in (ComonadKind.ef(2), ComonadKind.pebble(2, 2)):
            cs = build_comonad(kind, path_graph(3))
            assert validate_hom(cs.counit_hom())

    def test_bound(self):
        """Test the carrier size guard."""
        with pytest.raises(SizeCapExceededError):
            build_comonad(ComonadKind.ef(3), complete_graph(3), bound=10)

    def test_bad_kind(self):
        """Test kinds need positive parameters."""
        with pytest.raises(MalformedInputError):
            ComonadKind.pebble(0, 2)


class TestComonadLaws:
    """Tests for counit, coextension and the comonad equations."""

    def setup_method(self):
        self.K2 = complete_graph(2)
        self.K3 = complete_graph(3)

    def _kleisli(self, kind, A, B, mapping):
        cs = build_comonad(kind, A)
        return compose(Homomorphism(A, B, mapping), cs.counit_hom())

    def test_ef_laws(self):
        """Test the equations for EF(2)."""
        kind = ComonadKind.ef(2)
        f = self._kleisli(kind, self.K2, self.K3, (0, 1))
        g = self._kleisli(kind, self.K3, self.K3, (1, 2, 0))
        assert check_comonad_laws(kind, self.K2, self.K3, self.K3, f, g)

    def test_pebble_laws(self):
        """Test the equations for PEBBLE(2, 2)."""
        kind = ComonadKind.pebble(2, 2)
        f = self._kleisli(kind, self.K2, self.K3, (2, 0))
        g = self._kleisli(kind, self.K3, self.K3, (0, 2, 1))
        assert check_comonad_laws(kind, self.K2, self.K3, self.K3, f, g)

    def test_modal_laws(self):
        """Test the equations for MODAL(2) along pointed homomorphisms."""
        kind = ComonadKind.modal(2)
        A = PointedStructure(directed_path(3), 0)
        B = PointedStructure(graph_from_edges(4, [(0, 1), (1, 2), (1, 3)], symmetric=False, name="fork"), 0)
        C = PointedStructure(graph_from_edges(2, [(0, 1), (1, 1)], symmetric=False, name="lasso"), 0)
        cs_a, cs_b = build_comonad(kind, A), build_comonad(kind, B)
        f = compose(Homomorphism(A.structure, B.structure, (0, 1, 2)), cs_a.counit_hom())
        g = compose(Homomorphism(B.structure, C.structure, (0, 1, 1, 1)), cs_b.counit_hom())
        assert validate_hom(f) and validate_hom(g)
        assert check_comonad_laws(kind, A, B, C, f, g)
        assert not check_comonad_laws(kind, A, B, C, f, g, coextend=_broken_coextension)

    def test_broken_coextension_detected(self):
        """Test a constant coextension violates the equations."""
        kind = ComonadKind.ef(2)
        f = self._kleisli(kind, self.K2, self.K3, (0, 1))
        g = self._kleisli(kind, self.K3, self.K3, (1, 2, 0))
        assert not check_comonad_laws(kind, self.K2, self.K3, self.K3, f, g, coextend=_broken_coextension)

    def test_coextension_rejects_non_homomorphism(self):
        """Test coextension of a map that breaks an edge."""
        cs = build_comonad(ComonadKind.ef(2), self.K2)
        with pytest.raises(InvalidMorphismError):
            coextension(cs, Homomorphism(cs.carrier, self.K3, (0,) * cs.carrier.size))

    def test_functor_action_commutes_with_counit(self):
        """Test counit after F(h) equals h after counit."""
        kind = ComonadKind.ef(2)
        cs_a, cs_b = build_comonad(kind, self.K2), build_comonad(kind, self.K3)
        h = Homomorphism(self.K2, self.K3, (1, 2))
        Fh = comonad_map(cs_a, h, cs_b)
        assert validate_hom(Fh)
        assert compose(cs_b.counit_hom(), Fh).mapping == compose(h, cs_a.counit_hom()).mapping


class TestCoalgebras:
    """Tests for the coalgebra and cover correspondence."""

    def test_forest_cover_round_trip(self):
        """Test P3 rooted at its centre as an EF(2) coalgebra."""
        P3 = path_graph(3)
        cover = ForestCover(P3, [1, ROOT, 1])
        coalgebra = cover_to_coalgebra(P3, ComonadKind.ef(2), cover)
        assert coalgebra.plays == ((1, 0), (1,), (1, 2))
        assert check_coalgebra(coalgebra)
        alpha = coalgebra.alpha
        assert alpha.target == coalgebra.comonad.carrier
        assert validate_hom(alpha)
        assert compose(coalgebra.comonad.counit_hom(), alpha).mapping == (0, 1, 2)
        assert coalgebra_to_cover(coalgebra).parent == cover.parent

    def test_pebble_cover_round_trip(self):
        """Test a 2-pebble chain on P3."""
        P3 = path_graph(3)
        cover = PebbleForestCover(ForestCover(P3, [ROOT, 0, 1]), [1, 2, 1], 2)
        coalgebra = cover_to_coalgebra(P3, ComonadKind.pebble(2, 3), cover)
        back = coalgebra_to_cover(coalgebra)
        assert back.pebbles == (1, 2, 1)
        assert back.cover.parent == (ROOT, 0, 1)

    def test_cover_too_tall(self):
        """Test a height-3 chain is not an EF(2) coalgebra."""
        P3 = path_graph(3)
        with pytest.raises(InvalidCoverError):
            cover_to_coalgebra(P3, ComonadKind.ef(2), ForestCover(P3, [ROOT, 0, 1]))

    def test_incompatible_plays(self):
        """Test plays on incomparable branches for adjacent elements fail."""
        coalgebra = Coalgebra(path_graph(2), ComonadKind.ef(2), ((0,), (1,)))
        assert not check_coalgebra(coalgebra)

    def test_wrong_counit(self):
        """Test plays must end at their own element."""
        coalgebra = Coalgebra(path_graph(2), ComonadKind.ef(2), ((0, 1), (0,)))
        assert not check_coalgebra(coalgebra)

    def test_synchronization_tree(self):
        """Test a pointed directed chain is a tree of height 2."""
        P = PointedStructure(directed_path(3), 0)
        assert is_synchronization_tree(P)
        assert is_synchronization_tree(P, 2)
        assert not is_synchronization_tree(P, 1)
        coalgebra = cover_to_coalgebra(P, ComonadKind.modal(2))
        certificate = coalgebra_to_cover(coalgebra)
        assert certificate.parent == (ROOT, 0, 1)
        assert certificate.height == 2

    def test_cycle_is_not_a_tree(self):
        """Test a symmetric cycle has no unique paths."""
        P = PointedStructure(cycle_graph(3), 0)
        assert not is_synchronization_tree(P)
        with pytest.raises(NotSynchronizationTreeError):
            cover_to_coalgebra(P, ComonadKind.modal(3))
