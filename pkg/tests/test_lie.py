import numpy as np
import pytest
import sympy

from subgrouplab import groups as gr, lie
from subgrouplab.isolation import isolation_verdict

from oracles import derived_dim_rank, sphere_ricci_min

CORPUS = {
    "so3": lie.so3(), "su2": lie.su2(), "su2+su2": lie.direct_sum(lie.su2(), lie.su2()),
    "R1": lie.abelian(1), "R2": lie.abelian(2), "R3": lie.abelian(3), "u2": lie.u2(),
    "so3+R": lie.direct_sum(lie.so3(), lie.abelian(1)),
}


@pytest.mark.parametrize("name", list(CORPUS))
def test_derived_dimension_matches_rank(name):
    L = CORPUS[name]
    assert lie.derived_subalgebra(L).dim == derived_dim_rank(L)
    assert lie.is_perfect(L) == (derived_dim_rank(L) == L.n)


def test_isolation_verdicts():
    expected = {"so3": True, "su2": True, "su2+su2": True, "R1": False, "R2": False, "R3": False,
                "u2": False, "so3+R": False}
    for name, iso in expected.items():
        v = isolation_verdict(CORPUS[name])
        assert v.isolated is iso
        if not iso:
            assert v.reason.codim == CORPUS[name].n - derived_dim_rank(CORPUS[name])


def test_jacobi_and_antisymmetry_checked():
    c = [[[0] * 3 for _ in range(3)] for _ in range(3)]
    c[0][1][2] = 1  # missing the antisymmetric partner
    with pytest.raises(lie.LieAlgebraError):
        lie.LieAlgebraData(c)
    with pytest.raises(lie.LieAlgebraError):
        lie.LieAlgebraData(lie.so3().c, gram=[[1, 0, 0], [0, -1, 0], [0, 0, 1]])


def test_from_matrices_recovers_so3():
    E = [np.zeros((3, 3)) for _ in range(3)]
    for k, (i, j) in enumerate([(1, 2), (2, 0), (0, 1)]):
        E[k][j, i], E[k][i, j] = 1, -1
    L = lie.from_matrices(E)
    assert L.c == lie.so3().c


def test_ricci_exact_values():
    assert lie.ricci_min(lie.so3(), exact=True) == sympy.Rational(1, 2)
    assert lie.ricci_min(lie.so3(gram_scale=4), exact=True) == sympy.Rational(1, 8)
    assert lie.ricci_min(lie.su2(), exact=True) == sympy.Rational(1, 2)
    assert lie.ricci_min(lie.su2("-1/2tr"), exact=True) == 2
    assert lie.myers_bound(lie.so3(), exact=True) == 2 * sympy.pi


@pytest.mark.parametrize("L", [lie.so3(), lie.so3(gram_scale=3), lie.su2("-1/2tr"),
                               lie.direct_sum(lie.so3(), lie.su2())])
def test_ricci_matches_sphere_sampling(L):
    exact = float(lie.ricci_min(L, exact=True))
    sampled = sphere_ricci_min(L, samples=20_000)
    assert sampled >= exact - 1e-9
    assert sampled - exact < 0.05 * max(exact, 1)


def test_ricci_rejects_abelian():
    with pytest.raises(lie.LieAlgebraError):
        lie.ricci_min(lie.u2())


def test_json_round_trip():
    L = lie.direct_sum(lie.so3(), lie.abelian(1))
    M = lie.LieAlgebraData.from_json(L.to_json())
    assert M.c == L.c and M.gram == L.gram


def test_su2_coverage_at_myers_radius():
    L = lie.su2()
    rep = lie.exp_coverage_check(gr.su2(), L, lie.myers_bound(L), 0.1)
    assert rep.covered
    assert rep.gap <= rep.threshold
