import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cavitybounds.errors import (
    BrillouinViolationError,
    DegenerateDistributionError,
    DomainError,
    InvalidDistributionError,
)
from cavitybounds.functionals import (
    LambdaFunction,
    VelocityDistribution,
    assemble_coefficients,
    coefficients_from_values,
    distribution_csv_text,
    eval_I,
    eval_I_lambda,
    eval_J,
    eval_J_lambda,
    format_number,
    lambda_from_u,
    read_distribution_csv,
    u_from_lambda,
    validate_brillouin,
    write_distribution_csv,
    xlogx,
)

E = math.e


def linear_lambda(slope):
    return LambdaFunction.from_functions(lambda s: slope * s, lambda s: np.full_like(s, slope))


# --- closed-form values ------------------------------------------------------


def test_unit_speed_has_zero_functionals():
    u = VelocityDistribution.constant(1.0)
    assert eval_I(u) == pytest.approx(0.0, abs=1e-15)
    assert eval_J(u) == pytest.approx(0.0, abs=1e-15)


def test_constant_inverse_e():
    u = VelocityDistribution.constant(1 / E)
    assert eval_I(u) == pytest.approx(1 / E, abs=1e-12)
    assert eval_J(u) == pytest.approx(2 / math.sqrt(E), abs=1e-10)


def test_linear_u():
    # I = 1/4, and J = -int sigma log sigma / (sigma/sqrt 2) = sqrt 2
    u = VelocityDistribution.from_function(lambda s: s, primitive=lambda s: 0.5 * s * s)
    assert eval_I(u) == pytest.approx(0.25, abs=1e-12)
    assert eval_J(u) == pytest.approx(math.sqrt(2.0), abs=1e-9)


def test_straight_lambda():
    lam = linear_lambda(1 / math.sqrt(E))
    assert eval_I_lambda(lam) == pytest.approx(3 / (4 * E), abs=1e-12)
    assert eval_J_lambda(lam) == pytest.approx(2 * math.sqrt(2) / math.sqrt(E), abs=1e-10)


def test_lambda_and_u_forms_agree_on_straight_line():
    lam = linear_lambda(1 / math.sqrt(E))
    u = u_from_lambda(lam)
    assert eval_I(u) == pytest.approx(eval_I_lambda(lam), abs=1e-11)
    assert eval_J(u) == pytest.approx(eval_J_lambda(lam), abs=1e-9)


def test_running_integral_without_primitive_matches_closed_form():
    u = VelocityDistribution.from_function(lambda s: np.cos(s))
    assert u.running_integral(0.7) == pytest.approx(math.sin(0.7), rel=1e-12)


def test_xlogx_extension_at_zero():
    assert xlogx(0.0) == 0.0
    np.testing.assert_allclose(xlogx(np.array([0.0, 1.0, 0.5])), [0.0, 0.0, 0.5 * math.log(0.5)])


# --- round trips ---------------------------------------------------------------


@settings(max_examples=25, deadline=None)
@given(
    c=st.floats(min_value=0.05, max_value=0.95),
    p=st.floats(min_value=0.0, max_value=2.0),
)
def test_lambda_u_round_trip(c, p):
    """u = c (1 + p sigma) / (1 + p) through lambda and back."""

    def f(s):
        return c * (1 + p * s) / (1 + p)

    def prim(s):
        return c * (s + 0.5 * p * s * s) / (1 + p)

    u = VelocityDistribution.from_function(f, primitive=prim)
    back = u_from_lambda(lambda_from_u(u))
    grid = np.linspace(0.01, 1.0, 50)
    np.testing.assert_allclose(back(grid), f(grid), rtol=1e-12)
    assert eval_I(back) == pytest.approx(eval_I(u), abs=1e-11)
    assert eval_J(back) == pytest.approx(eval_J(u), abs=1e-8)


@settings(max_examples=25, deadline=None)
@given(c=st.floats(min_value=0.02, max_value=1.0))
def test_constant_closed_forms(c):
    u = VelocityDistribution.constant(c)
    assert eval_I(u) == pytest.approx(-c * math.log(c), abs=1e-12)
    # J = -c log c * int_0^1 (c s)^(-1/2) ds = -2 sqrt(c) log c
    assert eval_J(u) == pytest.approx(-2 * math.sqrt(c) * math.log(c), abs=1e-9)


def test_tabulated_matches_closed_form():
    s = np.linspace(0.0, 1.0, 401)
    u = VelocityDistribution.tabulated(s, 0.2 + 0.5 * s)
    exact = VelocityDistribution.from_function(lambda x: 0.2 + 0.5 * x, primitive=lambda x: 0.2 * x + 0.25 * x * x)
    assert eval_I(u) == pytest.approx(eval_I(exact), abs=1e-9)
    assert eval_J(u) == pytest.approx(eval_J(exact), abs=1e-7)


# --- invalid input ---------------------------------------------------------------


def test_degenerate_distribution_rejected():
    u = VelocityDistribution.from_function(lambda s: np.where(s < 0.2, 0.0, 0.5), breakpoints=(0.2,))
    with pytest.raises(DegenerateDistributionError):
        eval_J(u)


def test_negative_samples_rejected():
    with pytest.raises(InvalidDistributionError):
        VelocityDistribution.tabulated(np.linspace(0, 1, 10), np.full(10, -0.1))
    u = VelocityDistribution.from_function(lambda s: s - 0.5)
    with pytest.raises(InvalidDistributionError):
        eval_I(u)


@pytest.mark.parametrize(
    "sigma",
    [
        np.linspace(0.0, 0.9, 10),  # does not reach 1
        np.array([0.0, 0.3, 0.2, 0.4, 0.5, 0.6, 0.8, 1.0]),  # not increasing
        np.linspace(0.0, 1.0, 5),  # too few points
    ],
)
def test_bad_grid_rejected(sigma):
    with pytest.raises(InvalidDistributionError):
        VelocityDistribution.tabulated(sigma, np.full(sigma.size, 0.5))


def test_non_monotone_lambda_rejected():
    s = np.linspace(0, 1, 10)
    with pytest.raises(InvalidDistributionError):
        LambdaFunction.tabulated(s, np.sin(3 * s))
    lam = LambdaFunction.from_functions(lambda x: np.sin(4 * x), lambda x: 4 * np.cos(4 * x))
    with pytest.raises(InvalidDistributionError):
        eval_J_lambda(lam)


def test_lambda_must_vanish_at_zero():
    lam = LambdaFunction.from_functions(lambda x: 0.1 + x, lambda x: np.ones_like(x))
    with pytest.raises(InvalidDistributionError):
        eval_I_lambda(lam)


# --- Brillouin --------------------------------------------------------------------


def test_brillouin_admissible_and_violation():
    ok = validate_brillouin(VelocityDistribution.constant(1.0))
    assert ok.admissible and ok.first_violation is None
    bump = VelocityDistribution.from_function(lambda s: 0.5 + 0.7 * np.exp(-((s - 0.4) / 0.05) ** 2))
    rep = validate_brillouin(bump)
    assert not rep.admissible
    assert rep.max_u == pytest.approx(1.2, abs=1e-3)
    assert rep.sigma_at_max == pytest.approx(0.4, abs=1e-3)
    assert rep.first_violation < 0.4


def test_assemble_rejects_brillouin_violation():
    with pytest.raises(BrillouinViolationError) as info:
        assemble_coefficients(0.0, None, VelocityDistribution.constant(1.1))
    assert info.value.report.max_u == pytest.approx(1.1)


# --- coefficients ---------------------------------------------------------------------


def test_max_lift_coefficients():
    c = assemble_coefficients(0.0, None, VelocityDistribution.constant(1 / E))
    assert c.c_l == pytest.approx(2 / E, abs=1e-10)
    assert c.c_d == pytest.approx(2 / (math.pi * E), abs=1e-10)
    assert c.kappa == pytest.approx(math.pi, abs=1e-10)


def test_unit_speed_coefficients():
    c = assemble_coefficients(0.0, None, VelocityDistribution.constant(1.0))
    assert c.c_l == 0.0 and c.c_d == 0.0 and c.kappa == 0.0


def test_two_arc_assembly_matches_values():
    u1, u2 = VelocityDistribution.constant(0.5), VelocityDistribution.constant(1 / E)
    got = assemble_coefficients(0.3, u1, u2)
    want = coefficients_from_values(0.3, eval_I(u1), eval_J(u1), eval_I(u2), eval_J(u2))
    assert got.c_l == pytest.approx(want.c_l, abs=1e-13)
    assert got.c_d == pytest.approx(want.c_d, abs=1e-13)


@pytest.mark.parametrize("eps", [-0.1, 1.0, math.nan])
def test_epsilon_domain(eps):
    with pytest.raises(DomainError):
        assemble_coefficients(eps, VelocityDistribution.constant(0.5), VelocityDistribution.constant(0.5))


def test_u1_required_when_epsilon_positive():
    with pytest.raises(DomainError):
        assemble_coefficients(0.2, None, VelocityDistribution.constant(0.5))


# --- CSV ---------------------------------------------------------------------


def test_csv_round_trip(tmp_path):
    s = np.linspace(0, 1, 21)
    path = tmp_path / "u.csv"
    write_distribution_csv(path, s, 0.3 + 0.2 * s)
    raw = path.read_bytes()
    assert raw.startswith(b"sigma,u\n") and b"\r" not in raw
    u = read_distribution_csv(path)
    np.testing.assert_allclose(u.values, 0.3 + 0.2 * s, rtol=1e-10)


def test_csv_text_precision():
    assert format_number(math.pi) == "3.141592654"
    assert format_number(-0.0) == "0"
    assert distribution_csv_text([0.0, 1.0], [1.0, 0.5]) == "sigma,u\n0,1\n1,0.5\n"


@pytest.mark.parametrize(
    "text",
    [
        "s,u\n0,1\n",
        "sigma,u\n0,abc\n",
        "sigma,u\n0,1,2\n0.5,1,2\n",
        "sigma,u\n",
    ],
)
def test_malformed_csv(tmp_path, text):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(InvalidDistributionError):
        read_distribution_csv(path)
