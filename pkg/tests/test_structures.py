from collections import Counter
from itertools import product

import pytest

from modules.enumeration import ALL, ClassSpec, enumerate_structures
from modules.exceptions import MalformedInputError, PreconditionError, SignatureMismatchError
from modules.graphs import complete_graph, copies, cycle_graph, directed_path, edgeless_graph, path_graph
from modules.structures import (
    GRAPH_SIGNATURE,
    Homomorphism,
    RelStructure,
    Signature,
    compose,
    disjoint_union,
    enumerate_quotient_objects,
    epi_mono_factorize,
    functor_H,
    functor_J,
    gaifman,
    gaifman_components,
    identity,
    induced_substructure,
    iso_check,
    pushout,
    reduct,
    set_partitions,
    structure_invariant,
    validate_hom,
)


class TestRelStructure:
    """Tests for signatures and structures."""

    def test_duplicate_symbols_rejected(self):
        """Test a signature cannot repeat a name."""
        with pytest.raises(MalformedInputError):
            Signature.of(("E", 2), ("E", 1))

    def test_tuples_are_canonical(self):
        """Test relations are deduplicated and sorted."""
        A = RelStructure(GRAPH_SIGNATURE, 2, {"E": [(1, 0), (0, 1), (0, 1)]})
        assert A.tuples("E") == ((0, 1), (1, 0))

    def test_tuple_outside_universe(self):
        """Test out-of-range tuples are rejected."""
        with pytest.raises(MalformedInputError):
            RelStructure(GRAPH_SIGNATURE, 2, {"E": [(0, 2)]})

    def test_wrong_arity(self):
        """Test tuples must match the symbol arity."""
        with pytest.raises(MalformedInputError):
            RelStructure(GRAPH_SIGNATURE, 2, {"E": [(0,)]})

    def test_equality_ignores_name(self):
        """Test structures compare by content."""
        assert complete_graph(3) == cycle_graph(3)
        assert complete_graph(3).name != cycle_graph(3).name

    def test_extended_signature_clash(self):
        """Test extending with an existing name fails."""
        with pytest.raises(PreconditionError):
            GRAPH_SIGNATURE.extended("E")


class TestMorphisms:
    """Tests for homomorphism helpers."""

    def test_validate_hom(self):
        """Test preservation of the edge relation."""
        K2, K3 = complete_graph(2), complete_graph(3)
        assert validate_hom(Homomorphism(K2, K3, (0, 1)))
        assert not validate_hom(Homomorphism(K2, K3, (2, 2)))

    def test_validate_hom_malformed(self):
        """Test maps of the wrong length raise."""
        with pytest.raises(MalformedInputError):
            validate_hom(Homomorphism(complete_graph(2), complete_graph(3), (0,)))

    def test_signature_mismatch(self):
        """Test maps between different signatures raise."""
        other = RelStructure(Signature.of(("F", 2)), 2)
        with pytest.raises(SignatureMismatchError):
            validate_hom(Homomorphism(complete_graph(2), other, (0, 1)))

    def test_compose_with_identity(self):
        """Test identity is neutral for composition."""
        K2, K3 = complete_graph(2), complete_graph(3)
        f = Homomorphism(K2, K3, (2, 0))
        assert compose(identity(K3), f).mapping == f.mapping
        assert compose(f, identity(K2)).mapping == f.mapping

    def test_epi_mono_factorization(self):
        """Test f = m after e with e onto and m injective."""
        P3, K3 = path_graph(3), complete_graph(3)
        f = Homomorphism(P3, K3, (0, 1, 0))
        e, m = epi_mono_factorize(f)
        assert e.is_surjective() and m.is_injective()
        assert compose(m, e).mapping == f.mapping
        assert e.target.size == 2

    def test_pushout_glues_shared_vertex(self):
        """Test two edges glued along a point give P3."""
        K1, K2 = edgeless_graph(1), complete_graph(2)
        D, iB, iC = pushout(Homomorphism(K1, K2, (1,)), Homomorphism(K1, K2, (0,)))
        assert D.size == 3
        assert iso_check(D, path_graph(3)) is not None
        assert validate_hom(iB) and validate_hom(iC)

    def test_induced_substructure(self):
        """Test inducing on two adjacent cycle vertices."""
        S, inclusion = induced_substructure(cycle_graph(4), [1, 2])
        assert S == complete_graph(2)
        assert inclusion.mapping == (1, 2)

    def test_reduct_drops_symbol(self):
        """Test reduct of J(A) back to the graph signature."""
        A = complete_graph(2)
        assert reduct(functor_J(A), GRAPH_SIGNATURE) == A


class TestConstructions:
    """Tests for unions, Gaifman graphs and quotients."""

    def test_disjoint_union(self):
        """Test sizes and injections of a disjoint union."""
        U, inl, inr = disjoint_union(complete_graph(3), complete_graph(2))
        assert U.size == 5
        assert validate_hom(inl) and validate_hom(inr)
        assert len(U.tuples("E")) == 8

    def test_copies_name(self):
        """Test copies of K3."""
        G = copies(complete_graph(3), 2)
        assert G.name == "2K3"
        assert G.size == 6

    def test_gaifman_of_directed_path(self):
        """Test the Gaifman graph is symmetric."""
        G = gaifman(directed_path(3))
        assert G.holds("E", (1, 0)) and G.holds("E", (0, 1))
        assert gaifman_components(copies(complete_graph(2), 2)) == [[0, 1], [2, 3]]

    def test_set_partitions_bell_numbers(self):
        """Test partition counts 1, 1, 2, 5, 15."""
        assert [len(list(set_partitions(n))) for n in range(5)] == [1, 1, 2, 5, 15]

    def test_quotient_objects_single_point(self):
        """Test K1 has two quotient objects, one strict."""
        quotients = enumerate_quotient_objects(edgeless_graph(1))
        assert len(quotients) == 2
        assert sum(q.strict for q in quotients) == 1

    def test_quotient_objects_directed_edge(self):
        """Test a directed edge has nine quotient objects, eight strict."""
        quotients = enumerate_quotient_objects(directed_path(2))
        assert len(quotients) == 9
        assert sum(q.strict for q in quotients) == 8

    def test_quotient_objects_empty(self):
        """Test the empty structure is its only quotient."""
        quotients = enumerate_quotient_objects(RelStructure(GRAPH_SIGNATURE, 0))
        assert len(quotients) == 1
        assert not quotients[0].strict

    def test_quotient_surjections_are_homs(self):
        """Test every listed surjection is a homomorphism."""
        for q in enumerate_quotient_objects(path_graph(3)):
            assert q.surjection.is_surjective()
            assert validate_hom(q.surjection)

    def test_functor_H_collapses_classes(self):
        """Test H on a chain with I = {(0, 2)} and E = {(1, 2)}."""
        sig = GRAPH_SIGNATURE.extended()
        D = RelStructure(sig, 3, {"E": [(1, 2)], "I": [(0, 0), (1, 1), (2, 2), (0, 2)]})
        H, q = functor_H(D)
        assert H.size == 2
        assert q.mapping == (0, 1, 0)
        assert H.tuples("E") == ((1, 0),)

    def test_functor_H_of_J_is_identity(self):
        """Test H(J(A)) is A."""
        A = cycle_graph(4)
        H, _ = functor_H(functor_J(A))
        assert H == A


class TestIsomorphism:
    """Tests for iso_check and invariants."""

    def test_cycle_vs_triangles(self):
        """Test C6 and 2K3 are not isomorphic."""
        assert iso_check(cycle_graph(6), copies(complete_graph(3), 2)) is None

    def test_relabelled_path(self):
        """Test a relabelled P3 is found isomorphic."""
        relabelled = RelStructure(GRAPH_SIGNATURE, 3, {"E": [(0, 2), (2, 0), (2, 1), (1, 2)]})
        iso = iso_check(path_graph(3), relabelled)
        assert iso is not None
        assert validate_hom(iso) and iso.is_injective()

    def test_fixed_point(self):
        """Test pinning an endpoint of P3 onto its centre fails."""
        P3 = path_graph(3)
        assert iso_check(P3, P3, fixed={0: 1}) is None
        assert iso_check(P3, P3, fixed={0: 2}) is not None

    def test_invariant_is_label_free(self):
        """Test isomorphic structures share the invariant."""
        relabelled = RelStructure(GRAPH_SIGNATURE, 3, {"E": [(0, 2), (2, 0), (2, 1), (1, 2)]})
        assert structure_invariant(path_graph(3)) == structure_invariant(relabelled)


def _homs(S, T):
    candidates = (Homomorphism(S, T, m) for m in product(T.universe, repeat=S.size))
    return [h for h in candidates if validate_hom(h)]


class TestPushoutUniversalProperty:
    """Tests for unique mediating maps out of pushouts, by brute force."""

    def setup_method(self):
        self.targets = list(enumerate_structures(ClassSpec(ALL, 3, graphs=False)))
        K1, K2, two_points = edgeless_graph(1), complete_graph(2), edgeless_graph(2)
        self.spans = [
            (Homomorphism(K1, K2, (1,)), Homomorphism(K1, K2, (0,))),
            (Homomorphism(two_points, K2, (0, 1)), Homomorphism(two_points, path_graph(3), (0, 2))),
            (Homomorphism(K1, directed_path(2), (0,)), Homomorphism(K1, directed_path(2), (1,))),
        ]

    def _check_span(self, f, g):
        D, iB, iC = pushout(f, g)
        cocones = 0
        for E in self.targets:
            mediated = Counter((compose(m, iB).mapping, compose(m, iC).mapping) for m in _homs(D, E))
            for h1 in _homs(f.target, E):
                for h2 in _homs(g.target, E):
                    if compose(h1, f).mapping != compose(h2, g).mapping:
                        continue
                    cocones += 1
                    assert mediated[h1.mapping, h2.mapping] == 1, f"{E.name}: {h1.mapping} {h2.mapping}"
            assert sum(mediated.values()) == len(set(mediated))
        return cocones

    def test_edges_glued_at_a_point(self):
        """Test the P3 pushout against every cocone into structures of size three."""
        assert self._check_span(*self.spans[0]) > 0

    def test_edge_glued_to_path_ends(self):
        """Test gluing both ends of an edge onto the ends of a path."""
        D, _, _ = pushout(*self.spans[1])
        assert iso_check(D, cycle_graph(3)) is not None
        assert self._check_span(*self.spans[1]) > 0

    def test_directed_edges_chained(self):
        """Test head of one directed edge glued to the tail of another."""
        D, _, _ = pushout(*self.spans[2])
        assert iso_check(D, directed_path(3)) is not None
        assert self._check_span(*self.spans[2]) > 0
