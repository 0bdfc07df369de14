import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pmc_rotor.curvfn import (
    Constant,
    DomainError,
    GrimReaper,
    Polynomial,
    evaluate,
    evaluate_deriv,
    from_json,
    parity,
    sign_and_zeros,
)

from conftest import SAMPLE_PROFILES

coeff = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
polys = st.lists(coeff, min_size=1, max_size=6).map(lambda c: Polynomial(tuple(c)))
unit = st.floats(-1.0, 1.0, allow_nan=False)


# -- evaluation examples ----------------------------------------------------

def test_eval_linear():
    assert evaluate(Polynomial((-0.5, 1.0)), 1.0) == 0.5


def test_eval_constant():
    assert evaluate(Constant(3.0), -0.7) == 3.0


def test_grim_reaper_value_at_zero():
    # (0 + 1/(pi/2)) / 2
    assert evaluate(GrimReaper(), 0.0) == pytest.approx(1.0 / math.pi, abs=1e-15)


def test_grim_reaper_limit_at_one():
    assert evaluate(GrimReaper(), 1.0) == pytest.approx(1.0, abs=1e-15)


def test_grim_reaper_matches_closed_form_away_from_one():
    g = GrimReaper()
    for y in np.linspace(0.0, 0.99, 34):
        want = 0.5 * (y + math.sqrt(1 - y * y) / math.acos(y))
        assert g.value(float(y)) == pytest.approx(want, rel=1e-14)


def test_grim_reaper_extension_positive():
    g = GrimReaper()
    assert min(g.value(float(y)) for y in np.linspace(-1, 0, 201)) > 0


def test_domain_error():
    with pytest.raises(DomainError):
        evaluate(Constant(1.0), 1.1)
    with pytest.raises(DomainError):
        evaluate_deriv(Polynomial((1.0,)), -1.0 - 1e-9)
    # inside the grace band
    assert evaluate(Constant(1.0), 1.0 + 1e-13) == 1.0


def test_polynomial_rejects_bad_coefficients():
    with pytest.raises(ValueError):
        Polynomial(())
    with pytest.raises(ValueError):
        Polynomial((1.0, math.inf))


# -- derivative ---------------------------------------------------------------

def test_deriv_examples():
    assert evaluate_deriv(Polynomial((-0.5, 1.0)), 0.3) == 1.0
    assert evaluate_deriv(Constant(2.0), -0.4) == 0.0
    assert evaluate_deriv(Polynomial((1.0, 0.0, 1.0)), 0.0) == 0.0


def _fd(h, y, d=1e-5):
    if y + d > 1:
        return (3 * h.value(y) - 4 * h.value(y - d) + h.value(y - 2 * d)) / (2 * d)
    if y - d < -1:
        return (-3 * h.value(y) + 4 * h.value(y + d) - h.value(y + 2 * d)) / (2 * d)
    return (h.value(y + d) - h.value(y - d)) / (2 * d)


@pytest.mark.parametrize("name", sorted(SAMPLE_PROFILES))
def test_deriv_matches_central_difference_on_grid(name):
    h = SAMPLE_PROFILES[name]
    for y in np.linspace(-1, 1, 401):
        assert abs(evaluate_deriv(h, float(y)) - _fd(h, float(y))) <= 1e-6


@settings(max_examples=200, deadline=None)
@given(y=unit)
def test_grim_reaper_deriv_property(y):
    g = GrimReaper()
    assert abs(g.deriv(y) - _fd(g, y)) <= 1e-6


@settings(max_examples=100, deadline=None)
@given(h=polys, y=unit)
def test_polynomial_deriv_property(h, y):
    assert abs(h.deriv(y) - _fd(h, y)) <= 1e-6 * max(1.0, sum(abs(c) for c in h.coeffs))


def test_grim_reaper_series_switch_continuity():
    g = GrimReaper()
    y0 = 1 - 1e-6
    assert abs(g.value(y0 + 1e-9) - g.value(y0 - 1e-9)) < 1e-8
    y1 = 0.9999
    assert abs(g.deriv(y1 + 1e-12) - g.deriv(y1 - 1e-12)) < 1e-8


def test_grim_reaper_c2_join_at_zero():
    g = GrimReaper()
    e = 1e-7
    assert g.value(-e) == pytest.approx(g.value(e), abs=1e-6)
    assert g.deriv(-e) == pytest.approx(g.deriv(e), abs=1e-6)


# -- parity ---------------------------------------------------------------------

def test_parity_examples():
    assert parity(Polynomial((1.0, 0.0, 1.0)), 1e-12) == "even"
    assert parity(Polynomial((2.0, 1.0)), 1e-12) == "not_even"
    assert parity(Constant(5.0), 1e-12) == "even"
    assert parity(GrimReaper(), 1e-12) == "not_even"


def test_parity_rejects_nonpositive_tol():
    with pytest.raises(ValueError):
        parity(Constant(1.0), 0.0)


@settings(max_examples=100, deadline=None)
@given(c=st.lists(coeff, min_size=1, max_size=4), y=unit)
def test_even_polynomials_are_symmetric(c, y):
    coeffs = []
    for k, v in enumerate(c):
        coeffs += [v, 0.0]
    h = Polynomial(tuple(coeffs))
    assert parity(h, 1e-12) == "even"
    assert abs(h.value(y) - h.value(-y)) <= 1e-12


def test_tiny_odd_coefficient_breaks_parity():
    assert parity(Polynomial((1.0, 1e-9)), 1e-12) == "not_even"


# -- sign and zeros --------------------------------------------------------------

def test_zeros_linear():
    info = sign_and_zeros(Polynomial((-0.5, 1.0)))
    assert len(info.zeros) == 1
    assert info.zeros[0][0] == pytest.approx(0.5, abs=1e-12)
    assert info.zeros[0][1] is False


def test_zeros_catenoid_profile():
    info = sign_and_zeros(Polynomial((-1.0, 0.0, 1.0)))
    assert [z for z, _ in info.zeros] == pytest.approx([-1.0, 1.0], abs=1e-12)
    assert info.max_value == pytest.approx(0.0, abs=1e-12)
    assert info.min_value == pytest.approx(-1.0, abs=1e-6)


def test_tangential_zero():
    h = Polynomial((0.0, 0.0, 2.0, 1.0))
    info = sign_and_zeros(h)
    assert len(info.zeros) == 1
    y, tangential = info.zeros[0]
    assert abs(y) < 1e-5 and abs(h.value(y)) < 1e-10
    assert tangential
    assert info.min_value >= 0.0


def test_positive_profile_has_no_zeros():
    info = sign_and_zeros(Polynomial((1.0, 0.0, 1.0)))
    assert info.zeros == []
    assert info.min_value == pytest.approx(1.0)
    assert info.max_value == pytest.approx(2.0)


@settings(max_examples=40, deadline=None)
@given(r=st.floats(-0.95, 0.95))
def test_transversal_root_refined(r):
    h = Polynomial((-r, 1.0))
    zs = sign_and_zeros(h).zeros
    assert len(zs) == 1
    assert abs(h.value(zs[0][0])) < 1e-12


# -- json ------------------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(SAMPLE_PROFILES))
def test_json_round_trip(name):
    h = SAMPLE_PROFILES[name]
    assert from_json(h.to_json()) == h


def test_json_unknown_kind():
    with pytest.raises(ValueError):
        from_json({"kind": "spline"})
