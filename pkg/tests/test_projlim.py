import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rbar.frequency import FrequencyContext, FrequencyTuple, IntegerRelationMatrix
from rbar.harmonic import BohrPoint, RealPoint
from rbar.projlim import (
    CirclePart,
    CircleWitness,
    Indistinguishable,
    LevelSpace,
    OrderingError,
    TorusPart,
    angle_distance,
    project,
    separate_points,
    transition,
    verify_pushforward_exact,
)

CTX = FrequencyContext.from_pairs([("one", 1.0), ("sqrt2", math.sqrt(2))])
B1, B2 = CTX.freq(1, 0), CTX.freq(0, 1)
HALF = CTX.freq("1/2", 0)


def _space(*fs):
    return LevelSpace(FrequencyTuple(fs))


def test_project_examples():
    assert project(RealPoint(2.5), _space(B1)) == CirclePart(2.5)
    assert project(BohrPoint(FrequencyTuple([B1]), (math.pi,)), _space(B1)).angles == pytest.approx((math.pi,))
    pt = BohrPoint(FrequencyTuple([HALF]), (math.pi / 2,))
    assert project(pt, _space(B1)).angles == pytest.approx((math.pi,))


def test_project_needs_refinement():
    pt = BohrPoint(FrequencyTuple([B1]), (0.2,))
    with pytest.raises(OrderingError):
        project(pt, _space(HALF))


def test_transition_examples():
    fine, coarse = _space(B1, B2), _space(B1 * 5)
    out = transition(fine, coarse, TorusPart((math.pi / 5, 0.3)))
    assert out.angles == pytest.approx((math.pi,))
    assert transition(fine, fine, TorusPart((0.1, 0.2))).angles == pytest.approx((0.1, 0.2))
    assert transition(fine, coarse, CirclePart(-7.0)) == CirclePart(-7.0)
    with pytest.raises(OrderingError):
        transition(coarse, fine, TorusPart((0.1,)))
    with pytest.raises(ValueError):
        transition(fine, coarse, TorusPart((0.1,)))


def test_pushforward_examples():
    rep = verify_pushforward_exact(FrequencyTuple([B1 * 5]), FrequencyTuple([B1, B2]), 3)
    assert rep["status"] == "pass" and rep["monomials_tested"] == 7
    L = FrequencyTuple([B1, B2])
    assert verify_pushforward_exact(L, L, 4)["status"] == "pass"
    bad = IntegerRelationMatrix(((1, 0), (0, 0)))
    rep = verify_pushforward_exact(L, L, 2, relation=bad)
    assert rep["status"] == "fail"
    k = rep["counterexample"]["monomial"]
    assert any(k) and not any(rep["counterexample"]["composed"])


def test_separate_points_examples():
    assert isinstance(separate_points(RealPoint(1.0), RealPoint(2.0)), CircleWitness)
    assert isinstance(separate_points(RealPoint(0.0), BohrPoint(FrequencyTuple([B1]), (0.0,))), CircleWitness)
    p = BohrPoint(FrequencyTuple([B1]), (0.0,))
    q = BohrPoint(FrequencyTuple([HALF]), (math.pi / 2,))
    K = separate_points(p, q)
    assert isinstance(K, FrequencyTuple)
    X = LevelSpace(K)
    assert angle_distance(project(p, X).angles[0], project(q, X).angles[0]) > 1e-6


def test_separate_points_indistinguishable_cases():
    p = BohrPoint(FrequencyTuple([B1]), (0.0,))
    q = BohrPoint(FrequencyTuple([HALF]), (math.pi,))  # chi_b1 = e^{2 i pi} = 1 as well
    assert isinstance(separate_points(p, q), Indistinguishable)
    r = BohrPoint(FrequencyTuple([B2]), (1.0,))
    assert isinstance(separate_points(p, r), Indistinguishable)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0, 2 * math.pi, exclude_max=True), min_size=2, max_size=2))
def test_surjective_at_each_level(angles):
    L = FrequencyTuple([B1 + B2, B2 * 3])
    pt = BohrPoint(L, tuple(angles))
    got = project(pt, LevelSpace(L)).angles
    assert all(angle_distance(a, b) <= 1e-12 for a, b in zip(got, angles))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(-3, 3), min_size=2, max_size=2), min_size=1, max_size=2),
       st.lists(st.floats(0, 2 * math.pi, exclude_max=True), min_size=2, max_size=2))
def test_functoriality_with_fixed_fine_level(M, angles):
    L2 = FrequencyTuple([HALF, CTX.freq(0, "1/3")])
    L1 = [L2[0] * row[0] + L2[1] * row[1] for row in M]
    try:
        L1 = FrequencyTuple(L1)
    except ValueError:
        return
    L0 = FrequencyTuple([L1[0] * 2])
    X0, X1, X2 = LevelSpace(L0), LevelSpace(L1), LevelSpace(L2)
    th = TorusPart(tuple(angles))
    a = transition(X2, X0, th).angles
    b = transition(X1, X0, transition(X2, X1, th)).angles
    assert all(angle_distance(x, y) <= 1e-12 for x, y in zip(a, b))


def test_angles_wrap():
    assert TorusPart((-0.1, 7.0)).angles == pytest.approx((2 * math.pi - 0.1, 7.0 - 2 * math.pi))
    assert angle_distance(0.01, 2 * math.pi - 0.01) == pytest.approx(0.02)
