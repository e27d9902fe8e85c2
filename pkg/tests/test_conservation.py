import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sdwave import fronts
from sdwave.conservation import balance_report, component_masses, momentum_residual, total_mass, total_momentum
from sdwave.errors import InsufficientSamples
from sdwave.model import CoefficientSpec, builtin_flux

ID = builtin_flux("identity")


def test_triple_state_totals():
    cfg = fronts.from_pieces([(1, 2), (1, 0), (1, -2)], [0, 1], ID, None, 1.0, (-3, 4))
    traj = fronts.track(cfg, 1.0)
    for t in (0.0, 0.25, 0.5, 0.75, 1.0):
        assert total_mass(traj, t) == pytest.approx(7.0, rel=1e-12)
        # symmetric about x = 0.5: momentum stays 3*2 - 3*2 = 0
        assert abs(total_momentum(traj, t)) < 1e-12


def test_constant_drag_closed_form():
    # M1(t) = e^{-kt} M1(0) + u_a M0 (1 - e^{-kt})
    coeff = CoefficientSpec.constant(1.5, 0.4)
    cfg = fronts.from_pieces([(1, 2), (2, 0), (1, -1)], [0, 1], ID, coeff, 1.0, (-3, 4))
    traj = fronts.track(cfg, 1.0)
    M0, M1 = total_mass(traj, 0.0), total_momentum(traj, 0.0)
    for t in np.linspace(0, 1, 9):
        expected = math.exp(-1.5 * t) * M1 + 0.4 * M0 * (1 - math.exp(-1.5 * t))
        assert total_momentum(traj, t) == pytest.approx(expected, abs=1e-9)


def test_balance_report_and_residual():
    coeff = CoefficientSpec.algebraic(0.5, 0.3)
    spec = fronts.PartitionSpec(R=0.0, eps=2**-6)
    cfg = fronts.discretize_initial((1.0, 1.0), lambda x: (1.0 + x, math.cos(3 * x)), spec, 1.0, ID, coeff, 1.0,
                                    box=(-3, 4))
    traj = fronts.track(cfg, 1.0)
    rep = balance_report(traj, np.linspace(0, 1, 41))
    assert rep.mass_drift < 1e-10
    assert rep.closed_form_error < 1e-8
    assert momentum_residual(rep) < 1e-8


def test_component_masses_on_single_configuration():
    cfg = fronts.from_pieces([((1, 3), 1), ((2, 1), -1)], [0.0], ID, None, 1.0, (-1, 1))
    assert component_masses(cfg, 0.0) == pytest.approx([3.0, 4.0])
    assert component_masses(cfg, 0.5) == pytest.approx([3.0, 4.0])


def test_residual_needs_samples():
    cfg = fronts.from_pieces([(1, 1), (1, -1)], [0.0], ID, None, 1.0)
    rep = balance_report(fronts.track(cfg, 1.0), [0.0, 0.5, 1.0])
    with pytest.raises(InsufficientSamples):
        momentum_residual(rep)


@given(st.lists(st.tuples(st.floats(0.1, 3), st.floats(-2, 2)), min_size=2, max_size=5),
       st.floats(0.1, 2), st.floats(-1, 1))
def test_momentum_closed_form_property(pieces, kappa, ua):
    coeff = CoefficientSpec.constant(kappa, ua)
    breaks = list(0.5 * np.arange(len(pieces) - 1))
    cfg = fronts.from_pieces(pieces, breaks, ID, coeff, 1.0, (-4, 4 + breaks[-1]))
    rep = balance_report(fronts.track(cfg, 1.0), np.linspace(0, 1, 6))
    assert rep.mass_drift < 1e-8 and rep.closed_form_error < 1e-6
