import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad as sp_quad, solve_ivp
from scipy.optimize import brentq

from sdwave import gvp
from sdwave.errors import InvalidParameter, OutOfSupport, SupportEscape, UnboundedBelow


def const_field(k=1.0, cells=1024):
    return gvp.GvpField(lambda e: np.ones_like(e), lambda e: np.zeros_like(e), k, (-6, 6), cells)


def riemann_field(left, right, k=1.0, cells=2048, support=(-6, 6)):
    (vl, ul), (vr, ur) = left, right
    return gvp.GvpField(gvp.piecewise_constant([0.0], [vl, vr]), gvp.piecewise_constant([0.0], [ul, ur]),
                        k, support, cells, breaks=[0.0])


def u_closed(x, t, k=1.0):
    s = t + k
    return x * (s * s - k * k) / (s * (s * s + k * k))


def test_constant_data_point_values():
    f = const_field()
    assert gvp.potential(f, 0.8, 1.0, 1.0) == pytest.approx(-0.4, abs=1e-12)
    pair = gvp.minimizers(f, 1.0, 1.0)
    assert pair.y_star == pytest.approx(0.8, abs=1e-12) and not pair.split
    assert gvp.velocity(f, 1.0, 1.0) == pytest.approx(0.3, abs=1e-12)
    assert gvp.mass(f, 1.0, 1.0) == pytest.approx(0.8, abs=1e-12)
    assert gvp.diagnostics(f, 1.0, 1.0) == pytest.approx((0.12, 0.012, 0.04), abs=1e-12)


@pytest.mark.parametrize("k", [0.5, 1.0, 3.0])
def test_constant_data_velocity_closed_form(k, rng):
    f = const_field(k)
    x, t = rng.uniform(-2, 2, 50), rng.uniform(0.05, 2, 50)
    for xi, ti in zip(x, t):
        assert gvp.velocity(f, xi, ti) == pytest.approx(u_closed(xi, ti, k), abs=1e-10)


def test_backward_characteristic_closed_form():
    f = const_field()
    t = np.linspace(0, 1, 11)
    lo, hi = gvp.backward_characteristics(f, 1.0, 1.0, t)
    expected = 0.4 * ((t + 1) + 1 / (t + 1))
    assert np.max(np.abs(lo - expected)) < 1e-12 and np.max(np.abs(hi - expected)) < 1e-12
    with pytest.raises(InvalidParameter):
        gvp.backward_characteristics(f, 1.0, 1.0, 2.0)


def test_potential_matches_scipy_quadrature():
    v0 = lambda e: 1.5 + np.sin(e)  # noqa: E731
    u0 = lambda e: np.cos(2 * e)  # noqa: E731
    f = gvp.GvpField(v0, u0, 0.7, (-4, 4), 512)
    c = gvp.Coefficients(0.9, 0.7)
    for y in (-2.3, 0.4, 3.1):
        P0 = sp_quad(v0, 0, y, epsabs=1e-13)[0]
        P1 = sp_quad(lambda e: e * v0(e), 0, y, epsabs=1e-13)[0]
        Pu = sp_quad(lambda e: u0(e) * v0(e), 0, y, epsabs=1e-13)[0]
        assert gvp.potential(f, y, 0.3, 0.9) == pytest.approx(c.A * P1 + c.B * Pu - 0.3 * P0, abs=1e-11)


def test_minimizer_is_global_on_fine_scan():
    v0 = lambda e: 1.2 + 0.8 * np.sin(3 * e)  # noqa: E731
    u0 = lambda e: -np.tanh(4 * e) + 0.3 * np.sin(e)  # noqa: E731
    f = gvp.GvpField(v0, u0, 1.0, (-6, 6), 2048)
    ys = np.linspace(-6, 6, 200001)
    for x in (-0.7, 0.05, 0.9):
        pair = gvp.minimizers(f, x, 1.0)
        scan = gvp.potential(f, ys, x, 1.0)
        assert pair.value <= scan.min() + 1e-9


def remark_ode_oracle(left, right, k, T):
    (vl, ul), (vr, ur) = left, right

    def rhs(t, y):
        c, xi, p = y
        chi = p / xi
        s = t + k
        A = 1 + t * t / (2 * k * s)
        dA = t * (t + 2 * k) / (2 * k * s * s)
        Vl, Vr = vl / A, vr / A
        Ul, Ur = dA / A * c + ul * (k / s) / A, dA / A * c + ur * (k / s) / A
        jV, jVU, jVU2 = Vr - Vl, Vr * Ur - Vl * Ul, Vr * Ur**2 - Vl * Ul**2
        return [chi, chi * jV - jVU, chi * jVU - jVU2 - (chi - c / s) * xi / s]

    jv, jvu, jvu2 = vr - vl, vr * ur - vl * ul, vr * ur * ur - vl * ul * ul
    chi0 = brentq(lambda z: jv * z * z - 2 * jvu * z + jvu2, ur, ul, xtol=1e-15)
    t0 = 1e-8
    xi0 = t0 * (chi0 * jv - jvu)
    sol = solve_ivp(rhs, (t0, T), [chi0 * t0, xi0, xi0 * chi0], method="DOP853", rtol=1e-12, atol=1e-14)
    c, xi, p = sol.y[:, -1]
    return c, xi, p / xi


@pytest.mark.parametrize("left,right,k", [((1, 2), (4, 0), 1.0), ((1, 1), (1, -1), 2.0), ((2, 0.5), (1, -1.5), 0.5)])
def test_atom_matches_shock_ode(left, right, k):
    (atom,) = gvp.atoms(riemann_field(left, right, k), 1.0)
    c, xi, chi = remark_ode_oracle(left, right, k, 1.0)
    assert atom.x == pytest.approx(c, abs=1e-8)
    assert atom.xi == pytest.approx(xi, abs=1e-8)
    assert atom.chi == pytest.approx(chi, abs=1e-8)
    path = gvp.delta_shock_path(left, right, k, 1.0)
    assert path(1.0) == pytest.approx((c, xi, chi), abs=1e-8)


def test_pressureless_atom_values():
    (atom,) = gvp.atoms(riemann_field((1, 2), (4, 0)), 1.0)
    assert (atom.x, atom.xi, atom.chi) == pytest.approx((0.5, 2.4, 5 / 12), abs=1e-9)


def test_symmetric_split_and_one_sided_limits():
    f = riemann_field((1, 1), (1, -1))
    pair = gvp.minimizers(f, 0.0, 1.0)
    assert pair.split and pair.y_star == pytest.approx(-pair.y_star_hi, abs=1e-12)
    um, up = gvp.one_sided_velocities(f, 0.0, 1.0)
    assert um[0] > 0 > up[0] and um[0] == pytest.approx(-up[0], abs=1e-12)
    assert gvp.velocity(f, 0.0, 1.0) == pytest.approx(0.0, abs=1e-12)


def test_auxiliary_potentials_derivatives():
    f = riemann_field((1, 2), (4, 0))
    x = np.linspace(-1.5, 1.5, 3001)
    H, I = gvp.auxiliary_potentials(f, x, 1.0)
    q, _, J = gvp.diagnostics(f, x, 1.0)
    mid = 0.5 * (x[1:] + x[:-1])
    away = np.abs(mid - 0.5) > 0.01
    qm, _, Jm = gvp.diagnostics(f, mid[away], 1.0)
    h = x[1] - x[0]
    assert np.max(np.abs(np.diff(H)[away] / h + qm)) < 1e-5
    assert np.max(np.abs(np.diff(I)[away] / h + Jm)) < 1e-5


def test_weak_residual_small_on_constant_data():
    f = const_field(1.0, 512)
    bump = gvp.Bump(0.1, 1.0, 0.8, 0.6)
    r = gvp.weak_residual(f, [bump], np.linspace(-1.5, 1.5, 193), np.linspace(0.3, 1.7, 161))
    assert np.max(np.abs(r)) < 1e-4


def test_weak_residual_argument_checks():
    f = const_field(1.0, 256)
    with pytest.raises(InvalidParameter):
        gvp.weak_residual(f, [gvp.Bump(0, 1, 0.5, 0.5)], np.linspace(-1, 1, 41), np.linspace(0.4, 1.6, 40))
    with pytest.raises(SupportEscape):
        gvp.weak_residual(f, [gvp.Bump(0, 1, 0.5, 0.5)], np.linspace(-0.2, 0.2, 41), np.linspace(0.4, 1.6, 41))


def test_errors():
    with pytest.raises(InvalidParameter):
        gvp.GvpField(lambda e: np.ones_like(e), lambda e: 0 * e, 1.0, (0.5, 2))
    with pytest.raises(InvalidParameter):
        gvp.GvpField(lambda e: 0 * e, lambda e: 0 * e, 1.0, (-1, 1))
    f = const_field(1.0, 64)
    with pytest.raises(OutOfSupport):
        gvp.potential(f, 7.0, 0.0, 1.0)
    with pytest.raises(UnboundedBelow):
        gvp.velocity(f, 50.0, 1.0)
    with pytest.raises(InvalidParameter):
        gvp.velocity(f, 0.0, 0.0)


@st.composite
def piecewise_smooth(draw):
    nb = draw(st.integers(1, 3))
    breaks = sorted(draw(st.lists(st.floats(-1.2, 1.2), min_size=nb, max_size=nb, unique=True)))
    if np.any(np.diff(breaks) < 0.05):
        breaks = [breaks[0]]
    levels = draw(st.lists(st.floats(-1.5, 1.5), min_size=len(breaks) + 1, max_size=len(breaks) + 1))
    amp, freq = draw(st.floats(0, 0.9)), draw(st.floats(0.5, 4))
    wave = draw(st.floats(0, 0.5))
    step = gvp.piecewise_constant(breaks, levels)
    v0 = lambda e: 1.0 + amp * np.sin(freq * e)  # noqa: E731
    u0 = lambda e: step(e) + wave * np.sin(2 * e)  # noqa: E731
    return v0, u0, breaks


@settings(max_examples=15, deadline=None)
@given(piecewise_smooth(), st.floats(0.2, 1.5), st.floats(0.5, 2))
def test_oleinik_bound_and_jump_order(data, t, k):
    v0, u0, breaks = data
    f = gvp.GvpField(v0, u0, k, (-8, 8), 2048, breaks=breaks)
    rep = gvp.oleinik_violation(f, t, np.linspace(-2, 2, 801))
    assert rep.violation <= 1e-8
    assert rep.jumps_ordered


@settings(max_examples=15, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(0.05, 2.0))
def test_mass_is_monotone_and_velocity_bounded(u_level, t):
    f = riemann_field((1.0, u_level + 1.0), (2.0, u_level - 1.0))
    x = np.linspace(-2, 2, 401)
    snap = gvp.snapshot(f, t, x)
    assert np.all(np.diff(snap.m) >= -1e-12)
    assert np.all(np.abs(snap.u) <= abs(u_level) + 1.0 + 1e-9)


def test_piecewise_constant_and_support():
    step = gvp.piecewise_constant([0.0, 1.0], [1, 2, 3])
    assert list(step(np.array([-1, 0, 0.5, 1, 2]))) == [1, 2, 2, 3, 3]
    with pytest.raises(InvalidParameter):
        gvp.piecewise_constant([0.0], [1])
    lo, hi = gvp.support_for((1, 2), 1.0, 1.0, 1.0)
    assert lo < 0 < 2 < hi
