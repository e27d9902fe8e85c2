import numpy as np
import pytest
from hypothesis import given, strategies as st

from sdwave.entropy_diagnostics import (
    dissipativity_residual, entropy_report, f_squared_convex, is_dissipative, overcompressive, residual_with_error,
)
from sdwave.errors import TimeOutOfRange
from sdwave.model import CoefficientSpec, State, builtin_flux
from sdwave.riemann import DeltaFront, RiemannInput, sample_times, solve_delta_riemann, solve_riemann

ID = builtin_flux("identity")
CUBE = builtin_flux("odd_power", k=3)


class FastWeight(DeltaFront):
    """A front whose weight is pinned outside the admissible interval."""

    def _chi_at(self, c, t):
        return 2.0


def bad_front():
    inp = RiemannInput(State(1, 1), State(1, -1), ID)
    ol, orr = inp.orbits()
    return FastWeight(ID, CoefficientSpec.zero(), ol, orr, (1.0,), (1.0,), 1.0)


def test_symmetric_front_residual_closed_form():
    front = solve_riemann(RiemannInput(State(1, 1), State(1, -1), ID), 1.0)
    # chi = 0, so only the entropy flux jump survives: -(rho_r f(u_r)^3 - rho_l f(u_l)^3) = -2
    for t in (0.2, 0.6, 0.95):
        assert dissipativity_residual(front, t) == pytest.approx(-2.0, abs=1e-9)
        assert overcompressive(front, t) and is_dissipative(front, t)


def test_pressureless_residual_closed_form():
    # (1,2)|(4,0): chi = 2/3, xi = 4t; residual = 2 xi chi chi' + xi' chi^2 - chi [v u^2] + [v u^3]
    front = solve_riemann(RiemannInput(State(1, 2), State(4, 0), ID), 1.0)
    r = dissipativity_residual(front, 0.5)
    # source = chi [v u^2] - [v u^3] = (2/3)(0 - 4) - (0 - 8) = 16/3; xi' chi^2 = 4 * 4/9
    assert r == pytest.approx(16 / 9 - 16 / 3, abs=1e-8)


def test_hand_built_violation_flagged_by_both():
    front = bad_front()
    for t in (0.3, 0.7):
        assert not overcompressive(front, t)
        assert not is_dissipative(front, t)
    rep = entropy_report(front, [0.3, 0.5, 0.7])
    assert rep.consistent() and not rep.dissipative.any()


def test_residual_error_estimate_small_for_smooth_front():
    front = solve_riemann(RiemannInput(State(1, 1.5), State(2, -0.5), CUBE, CoefficientSpec.constant(0.5)), 1.0)
    r, err = residual_with_error(front, 0.5)
    assert err < 1e-6 * (1 + abs(r))


def test_dead_front_raises():
    front = solve_riemann(RiemannInput(State(1, 1), State(1, -1), ID), 1.0)
    with pytest.raises(TimeOutOfRange):
        overcompressive(front, 2.0)
    with pytest.raises(TimeOutOfRange):
        dissipativity_residual(front, 2.0)


def test_f_squared_convexity():
    assert f_squared_convex(ID, -3, 3)
    assert f_squared_convex(lambda x: -x, -1, 1)
    assert not f_squared_convex(np.log, 0.5, 10)
    assert f_squared_convex(CUBE, -2, 2)
    with pytest.raises(ValueError):
        f_squared_convex(ID, 1, 1)


states = st.tuples(st.floats(0.2, 4), st.floats(-2, 2))


@given(states, states, st.sampled_from([ID, CUBE, builtin_flux("geometric_optics")]),
       st.sampled_from(["zero", "const", "alg"]), st.booleans())
def test_dissipative_iff_overcompressive(a, b, flux, kind, with_mass):
    (vl, ul), (vr, ur) = a, b
    if ul - ur < 0.05:
        ul, ur = max(ul, ur) + 0.5, min(ul, ur)
    coeff = {"zero": CoefficientSpec.zero(), "const": CoefficientSpec.constant(0.6, 0.2),
             "alg": CoefficientSpec.algebraic(1.0, -0.1)}[kind]
    if with_mass:
        inp = RiemannInput(State(vl, ul), State(vr, ur), flux, coeff, 0.5, 0.5 * (ul + ur))
        front = solve_delta_riemann(inp, 1.0)
    else:
        front = solve_riemann(RiemannInput(State(vl, ul), State(vr, ur), flux, coeff), 1.0)
    rep = entropy_report(front, sample_times(front, 12), u_range=(ur, ul))
    assert rep.overcompressive.all()
    if rep.f_squared_convex:
        assert rep.consistent()


def test_nonconvex_f_squared_breaks_equivalence():
    # geometric optics: f^2 = u^2 / (1 + u^2) is concave for |u| > 1/sqrt(3)
    front = solve_riemann(RiemannInput(State(1, 2.5), State(1, 0), builtin_flux("geometric_optics")), 1.0)
    rep = entropy_report(front, sample_times(front, 5), u_range=(0, 2.5))
    assert not rep.f_squared_convex
    assert rep.overcompressive.all() and not rep.dissipative.any()
