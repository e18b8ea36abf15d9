import pytest

from subgrouplab.finite import FiniteGroup, GroupTableError


@pytest.mark.parametrize("G,order", [
    (FiniteGroup.trivial(), 1), (FiniteGroup.cyclic(6), 6), (FiniteGroup.dihedral(4), 8),
    (FiniteGroup.symmetric(3), 6),
    (FiniteGroup.direct_product(FiniteGroup.cyclic(2), FiniteGroup.cyclic(3)), 6),
])
def test_group_axioms(G, order):
    assert len(G) == order
    e = G.identity
    for a in G.elements:
        assert G.mul(a, e) == a == G.mul(e, a)
        assert G.mul(a, G.inv(a)) == e
        for b in G.elements:
            for c in G.elements:
                assert G.mul(G.mul(a, b), c) == G.mul(a, G.mul(b, c))


def test_closure_and_generators():
    D = FiniteGroup.dihedral(5)
    assert set(D.closure(D.generators)) == set(D.elements)
    assert len(D.closure(["r1"])) == 5
    assert not D.is_abelian()
    assert FiniteGroup.cyclic(7).is_abelian()


def test_isomorphisms_identity_first():
    C = FiniteGroup.cyclic(4)
    isos = C.isomorphisms(C)
    assert len(isos) == 2
    assert all(isos[0][g] == g for g in C.elements)
    assert not FiniteGroup.cyclic(4).isomorphisms(
        FiniteGroup.direct_product(FiniteGroup.cyclic(2), FiniteGroup.cyclic(2)))


def test_json_round_trip():
    S = FiniteGroup.symmetric(3)
    T = FiniteGroup.from_json(S.to_json())
    assert T.table() == S.table()


def test_bad_table_rejected():
    with pytest.raises(GroupTableError):
        FiniteGroup(["e", "a"], [["e", "a"], ["a", "a"]])
