import pytest
from hypothesis import given, strategies as st
from scipy.integrate import solve_ivp

from sdwave.errors import InvalidParameter
from sdwave.model import CoefficientSpec, State, VelocityOrbit, builtin_flux
from sdwave.riemann import RiemannInput, WaveFan, solve_riemann
from sdwave.twophase import State3, solve_delta_riemann3, solve_riemann3

ID = builtin_flux("identity")


def test_symmetric_equal_components():
    front = solve_riemann3(State3(1, 1, 1), State3(1, 1, -1), 1.0, ID)
    for t in (0.25, 0.5, 1.0):
        # each side feeds v |u| = 1 per unit time into each component
        assert front.xi_v(t) == pytest.approx(2 * t, abs=1e-12)
        assert front.xi_w(t) == pytest.approx(2 * t, abs=1e-12)
        assert abs(front.chi(t)) < 1e-12


def test_liquid_twice_gas():
    front = solve_riemann3(State3(1, 2, 1), State3(1, 2, -1), 1.0, ID)
    assert front.xi_w(1.0) == pytest.approx(2 * front.xi_v(1.0), abs=1e-12)


def test_delta_data_component_growth():
    front = solve_delta_riemann3(State3(1, 1, 1), State3(1, 1, -1), 1.0, 1.0, 0.0, 1.0, ID)
    for t in (0.0, 0.5, 1.0):
        assert front.xi_v(t) == pytest.approx(2 * t + 1, abs=1e-12)
        assert front.xi_w(t) == pytest.approx(2 * t + 1, abs=1e-12)


def test_component_balances_against_scipy():
    flux, coeff = builtin_flux("geometric_optics"), CoefficientSpec.constant(0.5, 0.2)
    left, right = State3(0.7, 1.1, 1.4), State3(1.3, 0.4, -0.6)
    front = solve_delta_riemann3(left, right, 0.3, 0.5, 0.2, 1.0, flux, coeff)
    ol, orr = VelocityOrbit(left.u, coeff), VelocityOrbit(right.u, coeff)

    def rhs(t, y):
        c, xv, xw, p = y
        chi = p / (xv + xw)
        sp = float(flux(chi))
        ul, ur = ol(t), orr(t)
        fl, fr = float(flux(ul)) - sp, float(flux(ur)) - sp
        dp = (left.total * ul * fl - right.total * ur * fr) + coeff.kappa(t) * (coeff.ua(t) * (xv + xw) - p)
        return [sp, left.v * fl - right.v * fr, left.w * fl - right.w * fr, dp]

    ref = solve_ivp(rhs, (0, 1), [0, 0.3, 0.5, 0.8 * 0.2], rtol=1e-12, atol=1e-13, dense_output=True)
    c, xv, xw, p = ref.sol(1.0)
    assert front.c(1.0) == pytest.approx(c, abs=1e-8)
    assert front.xi_v(1.0) == pytest.approx(xv, abs=1e-8)
    assert front.xi_w(1.0) == pytest.approx(xw, abs=1e-8)


def test_vacuum_fan():
    fan = solve_riemann3(State3(1, 1, -1), State3(1, 1, 1), 1.0, ID)
    assert isinstance(fan, WaveFan)


def test_errors():
    with pytest.raises(InvalidParameter):
        State3(-1, 0, 0)
    with pytest.raises(InvalidParameter):
        solve_delta_riemann3(State3(1, 1, 1), State3(1, 1, -1), 0.0, 1.0, 0.0, 1.0, ID)
    with pytest.raises(InvalidParameter):
        solve_delta_riemann3(State3(1, 1, 1), State3(1, 1, -1), 1.0, 1.0, 2.0, 1.0, ID)


masses = st.floats(0.05, 3)


@given(masses, masses, masses, masses, st.floats(-2, 2), st.floats(0.01, 3),
       st.sampled_from(["identity", "geometric_optics"]))
def test_aggregates_to_single_phase(vl, wl, vr, wr, ur, gap, fname):
    flux = builtin_flux(fname)
    coeff = CoefficientSpec.constant(0.4, 0.1)
    ul = ur + gap
    three = solve_riemann3(State3(vl, wl, ul), State3(vr, wr, ur), 1.0, flux, coeff)
    two = solve_riemann(RiemannInput(State(vl + wl, ul), State(vr + wr, ur), flux, coeff), 1.0)
    assert abs(three.chi(1.0) - two.chi(1.0)) <= 1e-9
    assert abs(three.xi_v(1.0) + three.xi_w(1.0) - two.xi(1.0)) <= 1e-8
