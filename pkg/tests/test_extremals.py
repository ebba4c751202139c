import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cavitybounds.errors import DomainError
from cavitybounds.extremals import (
    B_LINEAR,
    B_MAX_HI,
    B_MIN_HI,
    B_MIN_LO,
    J_AT_Q_MAX,
    J_AT_Q_STAR,
    K1,
    Q_MAX,
    Q_STAR,
    Branch,
    ExtremalDescriptor,
    J_max_curve,
    J_min_curve,
    K,
    a_of_b,
    build_max_extremal,
    build_min_extremal,
    c_max_of_b,
    c_min_of_b,
    euler_integral_residual,
    euler_residual,
    invert_q_max,
    invert_q_min,
    j_max_of_b,
    j_min_of_b,
    q_max_branch,
    q_max_const,
    q_min_branch,
    q_star,
    transversality_residual,
)
from cavitybounds.functionals import VelocityDistribution, eval_I, eval_J, validate_brillouin

E = math.e
GRID = np.linspace(0.0, 1.0, 2001)


# --- parametrisation ------------------------------------------------------------


def test_min_branch_at_b_one():
    assert K(1.0) == pytest.approx(-0.31226, abs=1e-5)
    assert a_of_b(1.0) == pytest.approx(0.41803, abs=1e-5)
    assert q_min_branch(1.0) == pytest.approx(0.31786, abs=1e-5)
    assert j_min_of_b(1.0) == pytest.approx(0.58743, abs=1e-5)


def test_min_branch_right_end():
    b = math.sqrt(2.0)
    assert K(b) == pytest.approx(-b, abs=1e-14)
    assert a_of_b(b) == pytest.approx(b, abs=1e-14)
    assert q_min_branch(b) == pytest.approx(0.0, abs=1e-14)


def test_min_branch_left_limit():
    b = B_MIN_LO * (1 + 1e-10)
    assert abs(K(b)) < 1e-8 and abs(a_of_b(b)) < 1e-8
    assert q_min_branch(b) == pytest.approx(Q_MAX, abs=1e-9)
    assert j_min_of_b(b) == pytest.approx(J_AT_Q_MAX, abs=1e-6)


def test_max_branch_endpoints():
    assert K1(B_MAX_HI) == pytest.approx(0.0, abs=1e-14)
    assert q_max_branch(B_MAX_HI) == pytest.approx(Q_MAX, abs=1e-15)
    assert j_max_of_b(B_MAX_HI) == pytest.approx(J_AT_Q_MAX, abs=1e-14)
    assert q_max_branch(1e-8) < 1e-14 and j_max_of_b(1e-8) < 1e-6


@pytest.mark.parametrize("side", [-1, 1])
def test_linear_limit_from_both_sides(side):
    b = B_LINEAR * (1 + side * 1e-7)
    assert q_max_branch(b) == pytest.approx(Q_STAR, abs=1e-7)
    assert j_max_of_b(b) == pytest.approx(J_AT_Q_STAR, abs=1e-10)


def test_max_branch_sign_of_c():
    assert c_max_of_b(0.5 * B_LINEAR) < 0 < c_max_of_b(0.5 * (B_LINEAR + B_MAX_HI))
    assert c_min_of_b(1.0) > 0


def test_singular_constants_raise_on_linear_window():
    with pytest.raises(DomainError):
        K1(B_LINEAR)
    with pytest.raises(DomainError):
        c_max_of_b(B_LINEAR)


@pytest.mark.parametrize("bad", [0.5, 1.5, math.nan])
def test_min_b_domain(bad):
    with pytest.raises(DomainError):
        K(bad)


def test_constants():
    assert q_star() == pytest.approx(0.27591, abs=1e-5)
    assert q_max_const() == pytest.approx(0.36788, abs=1e-5)
    assert q_star() < q_max_const()
    lin = VelocityDistribution.from_function(lambda s: s / E, primitive=lambda s: s * s / (2 * E))
    assert eval_I(lin) == pytest.approx(q_star(), abs=1e-12)


def test_q_is_monotone_on_each_branch():
    bmin = np.linspace(B_MIN_LO * (1 + 1e-9), B_MIN_HI, 400)
    assert np.all(np.diff([q_min_branch(b) for b in bmin]) < 0)
    bmax = np.linspace(1e-6, B_MAX_HI, 400)
    assert np.all(np.diff([q_max_branch(b) for b in bmax]) > 0)


# --- inversion and curves ---------------------------------------------------------


def test_inversion_endpoints():
    assert invert_q_min(Q_MAX) == B_MIN_LO
    assert invert_q_max(Q_MAX) == B_MAX_HI
    assert invert_q_max(Q_STAR) == B_LINEAR
    assert invert_q_min(q_min_branch(1.0)) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(q=st.floats(min_value=1e-9, max_value=Q_MAX, exclude_max=True))
def test_inversion_round_trip(q):
    assert q_min_branch(invert_q_min(q)) == pytest.approx(q, rel=1e-12, abs=1e-15)
    assert q_max_branch(invert_q_max(q)) == pytest.approx(q, rel=1e-12, abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(q=st.floats(min_value=1e-6, max_value=Q_MAX))
def test_min_curve_below_max_curve(q):
    assert J_min_curve(q) <= J_max_curve(q) + 1e-12


def test_curve_endpoint_values():
    assert J_min_curve(Q_MAX) == pytest.approx(J_AT_Q_MAX, abs=1e-12)
    assert J_max_curve(Q_MAX) == pytest.approx(J_AT_Q_MAX, abs=1e-12)
    assert J_max_curve(Q_STAR) == pytest.approx(J_AT_Q_STAR, abs=1e-12)


@pytest.mark.parametrize("bad", [0.0, -0.1, Q_MAX * 1.001, math.inf, math.nan])
def test_q_domain(bad):
    with pytest.raises(DomainError):
        J_min_curve(bad)
    with pytest.raises(DomainError):
        build_max_extremal(bad)


# --- extremal functions ------------------------------------------------------------


def test_max_lift_extremals_are_constant():
    for build in (build_min_extremal, build_max_extremal):
        desc, _ = build(Q_MAX)
        np.testing.assert_allclose(desc.u(GRID), 1 / E, atol=1e-14)


def test_q_star_gives_straight_line():
    desc, lam = build_max_extremal(Q_STAR)
    assert desc.branch is Branch.MAX_LINEAR
    np.testing.assert_allclose(lam(GRID), GRID / math.sqrt(E), atol=1e-15)


@pytest.mark.parametrize("q", [0.01, 0.1, 0.25, 0.35])
def test_min_extremal_shape(q):
    desc, _ = build_min_extremal(q)
    inside = GRID[GRID < desc.gamma]
    np.testing.assert_array_equal(desc.u(inside), 1.0)
    assert float(desc.u(1.0)) == pytest.approx(1 / E, abs=1e-13)
    # lambda continuous at the junction
    below = float(np.real(desc.lam(desc.gamma * (1 - 1e-15))))
    assert abs(float(np.real(desc.lam(desc.gamma))) - below) < 1e-12


@pytest.mark.parametrize("q", [0.02, 0.2, Q_STAR, 0.3, Q_MAX])
@pytest.mark.parametrize("build", [build_min_extremal, build_max_extremal])
def test_extremals_are_admissible(q, build):
    desc, lam = build(q)
    u = desc.u(GRID)
    assert np.all(u >= 0) and np.all(u <= 1 + 1e-12)
    assert float(lam(0.0)) == 0.0
    assert np.all(np.diff(lam(GRID)) >= 0)
    assert validate_brillouin(desc.velocity()).admissible


@pytest.mark.parametrize("q", [0.05, 0.2, 0.3])
def test_extremal_reproduces_curve(q):
    for build, curve in ((build_min_extremal, J_min_curve), (build_max_extremal, J_max_curve)):
        desc, _ = build(q)
        u = desc.velocity()
        assert eval_I(u) == pytest.approx(q, abs=1e-9)
        assert eval_J(u) == pytest.approx(curve(q), abs=1e-7)


def test_extremals_beat_feasible_competitors():
    """Smooth competitors on the constraint set I = q stay inside [J_min, J_max]."""
    q = 0.25
    jmin, jmax = J_min_curve(q), J_max_curve(q)

    def family(p, m):
        # e^{-1} f^m with f a sigmoid in (0, 1): I falls from 1/e to 0 as m grows
        return lambda s: np.exp(-1.0) * (0.5 * (1 + np.tanh(p * (s - 0.5)))) ** m

    for p in np.linspace(0.5, 4.0, 6):
        lo, hi = 0.0, 50.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if eval_I(VelocityDistribution.from_function(family(p, mid))) > q:
                lo = mid
            else:
                hi = mid
        u = VelocityDistribution.from_function(family(p, lo))
        assert eval_I(u) == pytest.approx(q, abs=1e-9)
        assert jmin < eval_J(u) < jmax


# --- residuals -------------------------------------------------------------------


@pytest.mark.parametrize("q", [0.01, 0.15, 0.27, Q_STAR, 0.3, 0.36])
def test_residuals_small(q):
    for build in (build_min_extremal, build_max_extremal):
        desc, _ = build(q)
        assert euler_residual(desc, GRID) <= 1e-9
        assert transversality_residual(desc) <= 1e-9


def test_perturbed_descriptor_residual():
    desc, _ = build_max_extremal(0.32)
    bad = dataclasses.replace(desc, c=desc.c + 0.01)
    r = euler_integral_residual(bad, GRID, lam=desc.lam)
    assert r == pytest.approx(0.01 / max(1.0, abs(bad.c)), rel=1e-6)


def test_descriptor_text_round_trip():
    for q in (0.1, Q_STAR, 0.33):
        for build in (build_min_extremal, build_max_extremal):
            desc, _ = build(q)
            back = ExtremalDescriptor.from_text(desc.to_text())
            assert back.branch is desc.branch
            np.testing.assert_array_equal(back.lam(GRID), desc.lam(GRID))


def test_descriptor_text_missing_field():
    with pytest.raises(ValueError):
        ExtremalDescriptor.from_text("branch=MAX_UPPER\nb=0.5\n")


@pytest.mark.parametrize("q", [1e-5, 1e-7])
def test_small_q_max_curve_matches_quadrature(q):
    """J_max decays only like 2 sqrt(q log 1/q); quadrature of the built extremal agrees."""
    desc, _ = build_max_extremal(q)
    u = desc.velocity()
    assert eval_I(u) == pytest.approx(q, rel=1e-6)
    assert eval_J(u) == pytest.approx(J_max_curve(q), rel=1e-8)
    assert 0.8 < J_max_curve(q) / (2 * math.sqrt(q * math.log(1 / q))) < 1.3
