import itertools

import oracles
import pytest
from hypothesis import given, settings, strategies as st

from shelogic.dsm import (DSM, DSMError, CapExceeded, check_dsm, closure, dsm_inverse,
                          enumerate_dsms, export_dot, is_block_permutation_bounded,
                          is_permutation_subgroup, minimal_generators, set_partitions)
from shelogic.model import Relation, Structure, clique
from shelogic.shop import (Shop, compose, enumerate_shops, exists_shop, forall_exists_shop,
                           forall_shop, identity, inverse, she_monoid)

P = Shop.parse
shops3 = st.sampled_from(enumerate_shops(3))


@pytest.fixture(scope="module")
def lattice3():
    return enumerate_dsms(3)


class TestClosure:
    def test_boolean_node(self):
        assert closure([P("(0|01)")]).members == {P("(0|1)"), P("(0|01)")}

    def test_forall_exists_same_is_everything(self):
        assert closure([forall_exists_shop(2, 0, 0)]).members == set(enumerate_shops(2))

    def test_identity(self):
        assert closure([identity(3)]).members == {identity(3)}
        assert closure([], n=2).members == {identity(2)}

    def test_needs_n(self):
        with pytest.raises((DSMError, ValueError)):
            closure([])

    @settings(max_examples=15)
    @given(st.lists(shops3, max_size=2))
    def test_matches_oracle(self, F):
        got = {oracles.as_sets(f) for f in closure(F, n=3)}
        assert got == oracles.closure([oracles.as_sets(f) for f in F], 3)

    @given(st.lists(shops3, max_size=2), st.lists(shops3, max_size=2))
    def test_closure_operator_laws(self, F, G):
        cF = closure(F, n=3)
        assert set(F) <= cF.members
        assert closure(cF.members, n=3) == cF
        assert cF <= closure(F + G, n=3)

    def test_n4_small(self):
        f = P("(0|1|23|23)")
        D = closure([f])
        check_dsm(D)
        assert len(D) == 7

    def test_cap(self):
        with pytest.raises(CapExceeded):
            closure([identity(5)])


class TestCheck:
    def test_missing_identity(self):
        with pytest.raises(DSMError):
            check_dsm(DSM(2, frozenset({P("(0|01)")})))

    def test_not_down_closed(self):
        with pytest.raises(DSMError):
            check_dsm(DSM(2, frozenset({identity(2), P("(01|01)")})))

    def test_not_composition_closed_n4(self):
        f = P("(1|2|3|0)")
        with pytest.raises(DSMError):
            check_dsm(DSM(4, frozenset({identity(4), f})))

    def test_she_monoids_are_dsms(self):
        for B in (clique(3), Structure(3, {"E": Relation.of(2, [(0, 1), (1, 1)])})):
            check_dsm(she_monoid(B, verify=False))


class TestLattice:
    def test_boolean(self):
        L = enumerate_dsms(2)
        assert len(L.nodes) == 5 and len(L.edges) == 6
        assert L.bottom.members == {identity(2)}
        assert L.top.members == set(enumerate_shops(2))
        assert [D.label() for D in L.nodes] == ["<(0|1)>", "<(0|01)>", "<(1|0)>", "<(01|1)>", "<(01|01)>"]

    def test_trivial(self):
        L = enumerate_dsms(1)
        assert len(L.nodes) == 1 and L.edges == []

    def test_three_element_baseline(self, lattice3):
        # computed here, not taken from the literature: 115 DSMs, 276 covers
        assert (len(lattice3.nodes), len(lattice3.edges)) == (115, 276)

    def test_nodes_are_dsms(self, lattice3):
        for D in lattice3.nodes:
            check_dsm(D)
        assert len({D.members for D in lattice3.nodes}) == len(lattice3.nodes)

    def test_moore_family(self, lattice3):
        nodes = {D.members for D in lattice3.nodes}
        for a, b in itertools.combinations(nodes, 2):
            assert a & b in nodes

    def test_every_principal_closure_present(self, lattice3):
        nodes = {D.members for D in lattice3.nodes}
        for f in enumerate_shops(3):
            assert closure([f]).members in nodes

    @pytest.mark.parametrize("n", [2, 3])
    def test_hasse_edges(self, n):
        L = enumerate_dsms(n)
        sets = [D.members for D in L.nodes]
        expected = []
        for i, j in itertools.permutations(range(len(sets)), 2):
            if sets[i] < sets[j] and not any(sets[i] < sets[k] < sets[j] for k in range(len(sets))):
                expected.append((i, j))
        assert sorted(expected) == L.edges

    @pytest.mark.parametrize("n, groups", [(2, 2), (3, 6)])
    def test_permutation_subgroups(self, n, groups):
        L = enumerate_dsms(n)
        perms = [D.members for D in L.nodes if is_permutation_subgroup(D)]
        assert len(perms) == groups == _count_subgroups(n)
        for a, b in itertools.combinations(perms, 2):
            assert a & b in perms

    def test_cap(self):
        with pytest.raises(CapExceeded):
            enumerate_dsms(4)
        with pytest.raises(CapExceeded):
            enumerate_dsms(4, allow_large=True)


def _count_subgroups(n):
    group = list(itertools.permutations(range(n)))

    def mul(p, q):
        return tuple(p[q[i]] for i in range(n))

    count = 0
    for k in range(1, len(group) + 1):
        for subset in itertools.combinations(group, k):
            s = set(subset)
            if tuple(range(n)) in s and all(mul(p, q) in s for p in s for q in s):
                count += 1
    return count


class TestRemarkInclusions:
    @pytest.mark.parametrize("n", [2, 3])
    def test_forall_exists_inclusions(self, n):
        for b, c in itertools.permutations(range(n), 2):
            a = closure([forall_exists_shop(n, b, c)])
            both = closure([forall_shop(n, b), exists_shop(n, c)])
            assert a <= both
            assert both == closure([compose(forall_shop(n, b), exists_shop(n, c))])
            assert both == closure([compose(exists_shop(n, c), forall_shop(n, b))])


class TestPredicates:
    def test_permutation_subgroup(self):
        assert is_permutation_subgroup(she_monoid(clique(3)))
        assert not is_permutation_subgroup(she_monoid(Structure(2, {"U": Relation.of(1, [(1,)])})))
        assert is_permutation_subgroup(closure([identity(3)]))

    def test_block_bound_example(self):
        w = is_block_permutation_bounded(closure([P("(12|0|0)")]))
        assert w.blocks == ((0,), (1, 2))
        assert w.shop((1, 0)) == P("(12|0|0)")

    def test_block_bound_symmetric_group(self):
        # each permutation is bounded by its own singleton-block shop
        w = is_block_permutation_bounded(she_monoid(clique(3)))
        assert w is not None and w.blocks == ((0,), (1,), (2,))

    def test_block_bound_top(self):
        assert is_block_permutation_bounded(closure([P("(01|01)")])) is None

    def test_block_bound_members(self):
        for D in enumerate_dsms(3).nodes:
            w = is_block_permutation_bounded(D)
            if w is None:
                continue
            from shelogic.shop import is_subshop
            for f, p in zip(D.sorted(), w.perms):
                assert is_subshop(f, w.shop(p))

    def test_set_partitions(self):
        assert len(list(set_partitions(4))) == 15
        assert list(set_partitions(2)) == [((0, 1),), ((0,), (1,))]


class TestInverse:
    def test_boolean(self):
        assert dsm_inverse(closure([P("(0|01)")])) == closure([P("(01|1)")])

    def test_group(self):
        D = she_monoid(clique(3))
        assert dsm_inverse(D) == D
        assert dsm_inverse(closure([identity(2)])) == closure([identity(2)])

    def test_involution(self, lattice3):
        for D in lattice3.nodes:
            inv = dsm_inverse(D)
            assert inv.members == {inverse(f) for f in D}
            assert dsm_inverse(inv) == D


class TestGenerators:
    def test_generate(self, lattice3):
        for D in lattice3.nodes:
            gens = minimal_generators(D)
            assert closure(gens, n=3) == D

    def test_minimal_size(self):
        for D in enumerate_dsms(2).nodes:
            assert len(minimal_generators(D)) == 1
        assert len(minimal_generators(she_monoid(clique(3)))) == 2


class TestDot:
    def test_boolean(self):
        L = enumerate_dsms(2)
        dot = export_dot(L, {0: "PSPACE-complete"})
        assert dot.count("->") == 6
        assert dot.count("[label=") == 5
        assert "PSPACE-complete" in dot
        assert dot == export_dot(enumerate_dsms(2), {0: "PSPACE-complete"})

    def test_trivial(self):
        dot = export_dot(enumerate_dsms(1))
        assert dot.count("[label=") == 1 and "->" not in dot

    def test_listing(self):
        assert closure([P("(0|01)")]).listing() == "(0|1)\n(0|01)\n"
