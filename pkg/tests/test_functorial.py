from fractions import Fraction

import numpy as np
import pytest

from subgrouplab import functorial as fn, groups as gr, rotations as rot
from subgrouplab.hyperspace import Region, VietorisNbhd, hausdorff_distance
from subgrouplab.intrep import RationalLattice

h = Fraction(1, 2)


def _fr(*xs):
    return tuple(Fraction(x) for x in xs)


def test_projection_pushforward_grid():
    f = fn.torus_projection(2, [0])
    K = gr.FiniteSubgroup(f.domain, tuple((Fraction(i, 4), Fraction(j, 2)) for i in range(4) for j in range(2)))
    img = fn.pushforward(f, K)
    assert sorted(img.elements) == [(Fraction(i, 4),) for i in range(4)]


def test_identity_pushforward_is_same_handle():
    G = gr.group_alpha()
    K = gr.CyclicGridSubgroup(G, 3)
    assert fn.pushforward(fn.identity_hom(G), K) is K


def test_covering_binary_dihedral():
    f = fn.su2_to_so3()
    K = gr.FiniteSubgroup(f.domain, tuple(rot.binary_lift(np.asarray(rot.dihedral_rotations(2)))))
    img = fn.pushforward(f, K)
    assert len(K.elements) == 8 and len(img.elements) == 4
    D2 = gr.SampleSet(f.codomain, tuple(rot.dihedral_rotations(2)))
    assert hausdorff_distance(img.sample(), D2).estimate < 1e-12


def test_lift_projection_fibers():
    f = fn.torus_projection(2, [0])
    L = gr.FiniteSubgroup(f.codomain, (_fr(0), _fr(h)))
    P = fn.lift_preimage(f, L)
    S = P.sample(0.05)
    assert {x[0] for x in S.elements} == {Fraction(0), h}
    assert S.mesh <= 0.05
    est, err = fn.round_trip(f, L, eps=0.05)
    assert est <= err


def test_lift_trivial_is_kernel():
    f = fn.torus_lattice_quotient(2, RationalLattice([[h, h]]))
    P = fn.lift_preimage(f, gr.FiniteSubgroup(f.codomain, (f.codomain.identity(),)))
    assert set(P.elements) == {_fr(0, 0), _fr(h, h)}
    c = fn.su2_to_so3()
    K = fn.lift_preimage(c, gr.FiniteSubgroup(c.codomain, (np.eye(3),)))
    assert len(K.elements) == 2


def test_lift_cyclic_doubles():
    f = fn.su2_to_so3()
    P = fn.lift_preimage(f, gr.FiniteSubgroup(f.codomain, tuple(rot.cyclic_rotations(3))))
    assert len(P.elements) == 6 and P.check_closure()


@pytest.mark.parametrize("label,f,L", fn.round_trip_corpus(), ids=[c[0] for c in fn.round_trip_corpus()])
def test_round_trip_within_budget(label, f, L):
    est, err = fn.round_trip(f, L, eps=0.1)
    assert est <= err


def test_homomorphism_property_sampled(rng):
    cases = [fn.torus_projection(3, [1, 2]), fn.torus_lattice_quotient(2, RationalLattice([[h, h]])),
             fn.semidirect_quotient(gr.group_alpha(), RationalLattice([[h, h]])), fn.su2_to_so3()]
    for f in cases:
        assert f.check_identity()
        # exact grid points on exact groups, where the tolerance is zero
        X = f.domain.grid(6) if f.domain.exact else f.domain.eps_net(0.3).elements
        idx = rng.integers(len(X), size=(20, 2))
        for i, j in idx:
            a, b = X[i], X[j]
            lhs = f.apply(f.domain.multiply(a, b))
            rhs = f.codomain.multiply(f.apply(a), f.apply(b))
            assert f.codomain.distance(lhs, rhs) <= f.codomain.tau


def test_functoriality_exact():
    q = fn.torus_lattice_quotient(2, RationalLattice([[h, 0]]))
    p = fn.torus_projection(2, [0])
    g = fn.compose(q, p)
    for n in (2, 4, 6):
        K = gr.CyclicGridSubgroup(g.domain, n)
        a = fn.pushforward(g, K).elements
        b = fn.pushforward(p, fn.pushforward(q, K)).elements
        assert sorted(a) == sorted(b)


def test_functoriality_sampled():
    G = gr.su2()
    c = fn.su2_to_so3()
    idS = fn.identity_hom(c.codomain)
    K = gr.FiniteSubgroup(G, tuple(rot.binary_lift(np.asarray(rot.octahedral_rotations()))))
    a = fn.pushforward(fn.compose(c, idS), K).sample()
    b = fn.pushforward(idS, fn.pushforward(c, K)).sample()
    est, err = hausdorff_distance(a, b)
    assert est <= err + 2 * c.codomain.tau


def test_kernel_is_normal(rng):
    cases = [fn.semidirect_quotient(gr.group_alpha(), RationalLattice([[h, h]])),
             fn.torus_projection(2, [1]), fn.su2_to_so3()]
    for f in cases:
        G = f.domain
        ker, mesh = f.rule.kernel(0.1)
        kf = G.pack(ker)
        X = G.eps_net(0.4).elements
        for i in rng.integers(len(X), size=10):
            conj = G.pack([G.conjugate(X[i], k) for k in ker])
            assert G.pairwise(conj, kf).min(axis=1).max() <= mesh * G.conjugation_lipschitz(X[i]) + mesh + G.tau


def test_pushforward_closure():
    f = fn.semidirect_quotient(gr.group_beta(), RationalLattice([[h, 0]]))
    assert fn.pushforward(f, gr.CyclicGridSubgroup(f.domain, 4)).check_closure()
    img = fn.pushforward(fn.torus_projection(2, [0]), gr.Full(gr.Torus(2)))
    assert img.check_closure(0.1)


@pytest.mark.parametrize("case", list(fn.PROBE_CASES))
def test_openness_probe_cases(case):
    f, K, nbhd, battery = fn.PROBE_CASES[case]()
    rpt = fn.openness_probe(f, K, nbhd, battery)
    assert rpt.all_pass
    assert all(e.status == "pass" for e in rpt.entries)
    js = rpt.to_json()
    assert js["all_pass"] and len(js["candidates"]) == len(battery)


def test_openness_probe_image_of_K_passes():
    f = fn.torus_projection(2, [0])
    K = gr.CyclicGridSubgroup(f.domain, 2)
    nbhd = VietorisNbhd(Region.everything(), (Region.ball(_fr(h, 0), 0.1),))
    rpt = fn.openness_probe(f, K, nbhd, [fn.pushforward(f, K)])
    assert rpt.all_pass


def test_openness_probe_with_ball_hull():
    f = fn.torus_projection(2, [0])
    K = gr.CyclicGridSubgroup(f.domain, 2)
    nbhd = VietorisNbhd(Region(tuple(gr_ball for gr_ball in
                                     (Region.ball(x, 0.3).balls[0] for x in K.elements))), ())
    far = gr.FiniteSubgroup(f.codomain, tuple((Fraction(i, 4),) for i in range(4)), "C4")
    rpt = fn.openness_probe(f, K, nbhd, [fn.pushforward(f, K), far])
    assert [e.status for e in rpt.entries] == ["pass", "outside"]


def test_semidirect_quotient_checks_compatibility():
    G = gr.group_alpha()
    with pytest.raises(gr.GroupError):
        fn.semidirect_quotient(G, RationalLattice([[h, h]]), codomain=G)
