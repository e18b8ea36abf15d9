from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subgrouplab import groups as gr, rotations as rot
from subgrouplab.hyperspace import (Ball, Region, Verdict, VietorisNbhd, converging_sequence_report,
                                    hausdorff_distance, report_csv, vietoris_contains)

from oracles import brute_hausdorff

frac = st.fractions(min_value=0, max_value=Fraction(47, 48), max_denominator=48)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(frac, frac), min_size=1, max_size=8),
       st.lists(st.tuples(frac, frac), min_size=1, max_size=8))
def test_torus_hausdorff_bit_for_bit(A, B):
    T = gr.Torus(2)
    est, err = hausdorff_distance(gr.SampleSet(T, tuple(A)), gr.SampleSet(T, tuple(B)))
    assert est == brute_hausdorff(T, A, B)
    assert err == 0


def test_hausdorff_symmetric_and_zero(rng):
    T = gr.Torus(3)
    pts = tuple(tuple(Fraction(int(v), 10) for v in rng.integers(0, 10, 3)) for _ in range(20))
    S = gr.SampleSet(T, pts)
    assert hausdorff_distance(S, S).estimate == 0
    R = gr.SampleSet(T, pts[:5])
    assert hausdorff_distance(S, R).estimate == hausdorff_distance(R, S).estimate


def test_semidirect_and_rotation_bit_for_bit(rng):
    G = gr.group_alpha()
    for _ in range(10):
        A = tuple(G.element([Fraction(int(v), 16) for v in rng.integers(0, 16, 2)], str(rng.integers(2)))
                  for _ in range(5))
        B = tuple(G.element([Fraction(int(v), 16) for v in rng.integers(0, 16, 2)], str(rng.integers(2)))
                  for _ in range(4))
        assert hausdorff_distance(gr.SampleSet(G, A), gr.SampleSet(G, B)).estimate == brute_hausdorff(G, A, B)
    S = gr.so3()
    I = tuple(rot.icosahedral_rotations())
    O = tuple(rot.octahedral_rotations())
    assert hausdorff_distance(gr.SampleSet(S, I), gr.SampleSet(S, O)).estimate == brute_hausdorff(S, I, O)


def test_circle_grid_distance():
    T = gr.Torus(1)
    for n in (2, 3, 8):
        Cn = gr.CyclicGridSubgroup(T, n).sample()
        ref = T.eps_net(0.001)
        est, err = hausdorff_distance(Cn, ref)
        assert abs(est - 1 / (2 * n)) <= err


def test_vietoris_verdicts():
    T = gr.Torus(1)
    K = gr.SampleSet(T, ((Fraction(0),), (Fraction(1, 2),)))
    inside = VietorisNbhd(Region.everything(), (Region.ball((Fraction(1, 2),), 0.1),))
    assert vietoris_contains(K, inside).verdict is Verdict.TRUE
    missing = VietorisNbhd(Region.everything(), (Region.ball((Fraction(1, 4),), 0.1),))
    assert vietoris_contains(K, missing).verdict is Verdict.FALSE
    tight = VietorisNbhd(Region.ball((Fraction(0),), 0.2), ())
    assert vietoris_contains(K, tight).verdict is Verdict.FALSE
    # a coarse sample that sits inside U0 but not by more than its mesh
    coarse = gr.SampleSet(T, ((Fraction(0),),), mesh=0.3)
    assert vietoris_contains(coarse, tight).verdict is Verdict.UNDECIDABLE


def test_ball_radius_positive():
    with pytest.raises(ValueError):
        Ball((Fraction(0),), 0.0)


def test_report_csv_and_violation():
    T = gr.Torus(1)
    ref = T.eps_net(0.002)
    Ks = [gr.CyclicGridSubgroup(T, n).sample() for n in (2, 4, 8)]
    rows = converging_sequence_report(Ks, ref, labels=[2, 4, 8])
    assert not any(r.violation for r in rows)
    text = report_csv(rows, header=["demo"])
    assert text.splitlines()[0] == "# demo"
    assert text.splitlines()[1] == "index,n,estimate,error_bound"
    rows = converging_sequence_report(list(reversed(Ks)), ref)
    assert rows[-1].violation
