import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rbar.frequency import FrequencyContext, FrequencyTuple
from rbar.harmonic import BohrPoint
from rbar.su2 import (
    IDENTITY,
    TAU,
    CircleGrid,
    CircularCurveParams,
    Su2Element,
    axis_rotor,
    bohr_leg_holonomy,
    circle_A_entries,
    circle_A_exp,
    circle_lemma_report,
    covering,
    distance_to_torus,
    holonomy_circular,
    holonomy_csv_rows,
    holonomy_linear,
    invariance_check,
    mu_rs,
    reduced_holonomy,
    self_intersection_point,
    su2_exp,
)

quats = st.lists(st.floats(-1, 1), min_size=4, max_size=4).filter(lambda q: sum(x * x for x in q) > 1e-3) \
    .map(Su2Element.from_array)
unit3 = st.lists(st.floats(-1, 1), min_size=3, max_size=3).filter(lambda v: sum(x * x for x in v) > 1e-3) \
    .map(lambda v: list(np.asarray(v) / np.linalg.norm(v)))


def close(a: Su2Element, b: Su2Element, tol=1e-12):
    return np.abs(a.matrix() - b.matrix()).max() <= tol


def test_basis_relations():
    assert np.allclose(TAU[0] @ TAU[1], TAU[2])
    assert np.allclose(TAU[1] @ TAU[2], TAU[0])
    for t in TAU:
        assert np.allclose(t @ t, -np.eye(2))
    q = Su2Element.from_array([0.1, 0.2, -0.3, 0.4])
    assert np.allclose(q.matrix(), q.w * np.eye(2) + mu_rs([q.x, q.y, q.z]))


def test_exp_examples():
    assert close(su2_exp(0.0, [1, 0, 0]), IDENTITY)
    assert close(su2_exp(math.pi, [0, 0.6, 0.8]), -IDENTITY)
    m = 0.37 * TAU[1]
    series = np.eye(2, dtype=complex)
    term = np.eye(2, dtype=complex)
    for k in range(1, 12):
        term = term @ m / k
        series = series + term
    assert np.abs(su2_exp(0.37, [0, 1, 0]).matrix() - series).max() <= 1e-12
    with pytest.raises(ValueError):
        su2_exp(1.0, [1, 1, 0])


@settings(max_examples=50, deadline=None)
@given(quats, quats, quats)
def test_group_axioms(a, b, c):
    assert close((a * b) * c, a * (b * c), 1e-13)
    assert close(a * IDENTITY, a, 1e-13) and close(IDENTITY * a, a, 1e-13)
    assert close(a * a.inv(), IDENTITY, 1e-13)
    m = (a * b).matrix()
    assert np.abs(m @ m.conj().T - np.eye(2)).max() <= 1e-12
    assert abs(np.linalg.det(m) - 1) <= 1e-12
    assert np.abs((a * b).matrix() - a.matrix() @ b.matrix()).max() <= 1e-12


@settings(max_examples=50, deadline=None)
@given(quats, quats)
def test_covering_is_a_homomorphism_into_so3(a, b):
    R = covering(a)
    assert np.abs(R @ R.T - np.eye(3)).max() <= 1e-12
    assert abs(np.linalg.det(R) - 1) <= 1e-12
    assert np.abs(covering(a * b) - covering(a) @ covering(b)).max() <= 1e-11


def test_covering_examples():
    assert np.allclose(covering(IDENTITY), np.eye(3), atol=1e-15)
    assert np.allclose(covering(-IDENTITY), np.eye(3), atol=1e-15)
    R = covering(su2_exp(0.25, [0, 0, 1]))
    assert np.abs(R @ [0, 0, 1] - np.array([0, 0, 1])).max() <= 1e-12


@settings(max_examples=50, deadline=None)
@given(unit3)
def test_axis_rotor(n):
    assert np.abs(covering(axis_rotor(n)) @ [0, 0, 1] - np.array(n)).max() <= 1e-10


def test_axis_rotor_antipode():
    assert np.allclose(covering(axis_rotor([0, 0, -1])) @ [0, 0, 1], [0, 0, -1])


def test_holonomy_linear_examples():
    assert close(holonomy_linear(0.0, 3.0, [1, 0, 0]), IDENTITY)
    assert close(holonomy_linear(2.0, math.pi, [0, 1, 0]), IDENTITY)
    h = holonomy_linear(1.0, math.pi / 2, [1, 0, 0])
    assert np.abs(h.matrix() + TAU[0]).max() <= 1e-12
    assert close(holonomy_linear(0.7, 1.3, [0, 0.6, 0.8]), su2_exp(-0.91, [0, 0.6, 0.8]))


def test_holonomy_circular_examples():
    tau = 2.0
    p = CircularCurveParams(tau, 1.0)
    A0 = circle_A_entries(tau, 1.0, 0.0).matrix()
    assert np.allclose(A0, np.diag([np.exp(1j * tau / 2), np.exp(-1j * tau / 2)]), atol=1e-15)
    assert close(holonomy_circular(0.0, p), IDENTITY)
    assert close(circle_A_entries(1.0, 1.0, 0.7), circle_A_exp(1.0, 1.0, 0.7))
    p = CircularCurveParams(math.pi, 1.0)
    assert close(holonomy_circular(math.sqrt(3) / 2, p), -p.d, 1e-12)


def test_self_intersection_examples():
    assert self_intersection_point(1, math.pi, 1.0) == pytest.approx(0.8660254037844386)
    assert self_intersection_point(-3, 1.1, 2.0) == -self_intersection_point(3, 1.1, 2.0)
    a2 = self_intersection_point(2, math.pi, 1.0)
    assert a2 == pytest.approx(math.sqrt(15) / 2)
    p = CircularCurveParams(math.pi, 1.0)
    assert close(holonomy_circular(a2, p), p.d, 1e-12)
    for n in range(1, 30):
        c = self_intersection_point(n, 2.2, 0.7)
        assert abs(math.sin(math.sqrt((0.7 * c) ** 2 + 0.25) * 2.2)) <= 1e-10
    with pytest.raises(ValueError):
        self_intersection_point(0, 1.0, 1.0)


def test_invariance_examples():
    assert invariance_check(1.1, 2.0, [1, 0, 0], IDENTITY) == 0
    assert invariance_check(1.1, 2.0, [0, 1, 0], -IDENTITY) <= 1e-15


def test_params_validation():
    with pytest.raises(ValueError):
        CircularCurveParams(0.0, 1.0)
    with pytest.raises(ValueError):
        CircularCurveParams(1.0, -1.0)
    with pytest.raises(ValueError):
        CircularCurveParams(1.0, 1.0, (1.0, 1.0, 0.0))
    with pytest.raises(ValueError):
        CircularCurveParams(1.0, 1.0, (1.0, 0.0, 0.0), IDENTITY)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 6.0), st.floats(0.1, 3.0), unit3, st.floats(-10, 10))
def test_general_normal_is_conjugate_of_reduced(tau, r, n, c):
    p = CircularCurveParams(tau, r, tuple(n))
    h = holonomy_circular(c, p)
    reduced = circle_A_entries(tau, r, c)
    assert close(h, p.d * p.sigma.conjugate(reduced), 1e-12)
    # rotating the plane conjugates d as well
    d0 = su2_exp(tau / 2, [0, 0, 1])
    assert close(p.sigma.conjugate(d0), p.d, 1e-12)


def test_vectorized_holonomy_matches_scalar():
    cs = np.linspace(-15, 15, 301)
    q = reduced_holonomy(cs, 2.3, 0.8)
    p = CircularCurveParams(2.3, 0.8)
    for c, row in zip(cs, q):
        assert np.abs(holonomy_circular(c, p).array() - row).max() <= 1e-14


def test_distance_to_torus():
    assert distance_to_torus(su2_exp(0.8, [0, 1, 0])) <= 1e-15
    assert distance_to_torus(Su2Element(0.0, 0.0, 0.0, 1.0)) == pytest.approx(math.sqrt(2))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0, 2 * math.pi), min_size=2, max_size=2))
def test_bohr_leg_holonomy_in_coset(angles):
    tau, r = 2.0, 1.5
    ctx = FrequencyContext.from_pairs([("l", r * tau), ("other", math.sqrt(3))])
    omega = ctx.freq(1, 0)
    level = FrequencyTuple([ctx.freq("1/2", 0), ctx.freq(0, 1)])
    pt = BohrPoint(level, tuple(angles))
    p = CircularCurveParams(tau, r)
    h = bohr_leg_holonomy(pt, p, omega)
    assert distance_to_torus(p.d.inv() * h) <= 1e-10
    theta = 2 * angles[0]
    assert close(h, p.d * su2_exp(-theta, [0, 1, 0]), 1e-12)


def test_circle_report_other_parameters():
    rep = circle_lemma_report(1.3, 0.7, 0.05, seed=3)
    assert rep["passed"], {k: v["passed"] for k, v in rep["checks"].items()}
    assert rep["checks"]["coset_intersection"]["c0_is_intersection"] is False
    assert rep["checks"]["footnote_spacing"]["all_above_2pi"]


def test_circle_report_is_deterministic():
    a = circle_lemma_report(math.pi, 1.0, 0.1, seed=7)
    b = circle_lemma_report(math.pi, 1.0, 0.1, seed=7)
    assert a == b


def test_circle_report_rejects_degenerate_input():
    with pytest.raises(ValueError):
        CircleGrid(points=2)
    with pytest.raises(ValueError):
        CircleGrid(c_max=0.0)
    with pytest.raises(ValueError):
        CircleGrid(n_max=0)
    with pytest.raises(ValueError):
        circle_lemma_report(7.0, 1.0, 0.1)
    with pytest.raises(ValueError):
        circle_lemma_report(1.0, 1.0, 0.0)


def test_merging_fails_for_tiny_epsilon_with_few_bands():
    rep = circle_lemma_report(math.pi, 1.0, 1e-4, CircleGrid(merge_n_max=5))
    assert not rep["checks"]["merging"]["passed"]
    assert not rep["passed"]


def test_csv_rows(tmp_path):
    p = CircularCurveParams(1.0, 1.0)
    rows = holonomy_csv_rows([0.0, 0.5], p)
    assert len(rows) == 2 and len(rows[0]) == 9
    assert rows[0][1:] == pytest.approx([1, 0, 0, 0, 0, 0, 1, 0], abs=1e-15)
    path = tmp_path / "h.csv"
    with path.open("w", newline="") as fh:
        csv.writer(fh).writerows(rows)
    assert len(path.read_text().splitlines()) == 2
