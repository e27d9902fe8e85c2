"""Riemann and delta-data problems for the droplet system in the delta-shock limit.

A delta front is described by its centre ``c(t)``, the mass ``xi(t)`` it
carries and the velocity ``chi(t)`` of that mass.  Mass and momentum balance
across the front give closed forms for ``xi`` and ``xi * chi`` in terms of
``c`` and the flux integrals of the neighbouring orbits, so only the scalar
equation ``c' = f(chi)`` is integrated.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BracketFailure, InvalidParameter, NoSignChange, RegionViolation
from .model import CoefficientSpec, FluxSpec, State, VelocityOrbit
from .numerics import TIGHT_TOL, ToleranceProfile, find_root, integrate_ode

NODES_PER_UNIT_TIME = 64
# velocity gaps below this (relative) are round-off: the orbits cannot be told apart
VELOCITY_TIE = 1e-12
_PATH_TOL = ToleranceProfile(abs_tol=1e-13, rel_tol=1e-12, max_iter=400)


class WaveKind(enum.Enum):
    DELTA_SHOCK = "DeltaShock"
    CONTACT_VACUUM = "ContactVacuum"
    SINGLE_CONTACT = "SingleContact"


@dataclass
class RiemannInput:
    left: State
    right: State
    flux: FluxSpec
    coefficients: CoefficientSpec = field(default_factory=CoefficientSpec.zero)
    delta_mass: float = 0.0
    delta_velocity: float = 0.0

    def __post_init__(self):
        if self.delta_mass < 0:
            raise InvalidParameter("delta mass must be nonnegative")
        if self.delta_mass > 0 and not (self.left.u > self.delta_velocity > self.right.u):
            raise InvalidParameter("delta data needs u_l > u_bar > u_r")

    def orbits(self):
        return VelocityOrbit(self.left.u, self.coefficients), VelocityOrbit(self.right.u, self.coefficients)


class ContactPath:
    """Zero-mass line moving with speed f(U(t)) of one orbit, anchored at (x0, t0)."""

    def __init__(self, orbit: VelocityOrbit, flux: FluxSpec, x0: float = 0.0, t0: float = 0.0):
        self.orbit, self.flux, self.x0, self.t0 = orbit, flux, float(x0), float(t0)
        self._base = orbit.flux_integral(flux, t0)

    def __call__(self, t: float) -> float:
        return self.x0 + self.orbit.flux_integral(self.flux, t) - self._base

    def speed(self, t: float) -> float:
        return float(self.flux(self.orbit(t)))


@dataclass
class WaveFan:
    """Two contacts bounding a vacuum; both coincide when the velocities agree."""

    left: ContactPath
    right: ContactPath
    kind: WaveKind = WaveKind.CONTACT_VACUUM

    def edges(self, t: float):
        return self.left(t), self.right(t)

    def z(self, x, t: float):
        """Velocity inside the vacuum, linear between the two edge traces."""
        xl, xr = self.edges(t)
        ul, ur = self.left.orbit(t), self.right.orbit(t)
        if xr <= xl:
            return np.full_like(np.asarray(x, dtype=float), ul)
        theta = (np.asarray(x, dtype=float) - xl) / (xr - xl)
        return ul + theta * (ur - ul)


def weight_function(x, t, flux, rho_l, rho_r, orbit_l, orbit_r):
    """The function whose root in (U_r, U_l) is the front weight chi(t).

    Written as ``rho_r (x - U_r)(f(x) - f(U_r)) - rho_l (x - U_l)(f(x) - f(U_l))``,
    which expands to the jump form but keeps the endpoint signs exact when
    the two velocities nearly coincide.
    """
    ul, ur = orbit_l(t), orbit_r(t)
    fx = float(flux(x))
    return rho_r * (x - ur) * (fx - float(flux(ur))) - rho_l * (x - ul) * (fx - float(flux(ul)))


def _weight_root(t, flux, rho_l, rho_r, orbit_l, orbit_r, tol=TIGHT_TOL):
    ul, ur = orbit_l(t), orbit_r(t)
    if not ul > ur:
        raise BracketFailure(f"orbits not ordered at t={t}: U_l={ul}, U_r={ur}")
    g = lambda x: weight_function(x, t, flux, rho_l, rho_r, orbit_l, orbit_r)  # noqa: E731
    if float(flux(ul)) == float(flux(ur)):
        # flux values tie in floating point: every point of the gap is a root
        return 0.5 * (ul + ur)
    try:
        return find_root(g, ur, ul, tol)
    except NoSignChange as exc:
        raise BracketFailure(f"no weight root in ({ur}, {ul}); flux not increasing?") from exc


class DeltaFront:
    """Delta front born at (X, T) between two constant states.

    Masses are tuples so the same object serves the single-phase system (one
    component) and the drift-flux system (gas and liquid).  The centre, the
    weight and the total mass use the summed density.

    With zero initial mass the weight is the per-time root of the weight
    function; with positive initial mass it is the momentum/mass ratio along
    the integrated centre.
    """

    def __init__(
        self,
        flux: FluxSpec,
        coefficients: CoefficientSpec,
        orbit_l: VelocityOrbit,
        orbit_r: VelocityOrbit,
        rho_l: Sequence[float],
        rho_r: Sequence[float],
        horizon: float,
        x0: float = 0.0,
        t0: float = 0.0,
        mbar: Sequence[float] | None = None,
        ubar: float = 0.0,
        region_tol: float = 1e-8,
    ):
        self.flux, self.coefficients = flux, coefficients
        self.orbit_l, self.orbit_r = orbit_l, orbit_r
        self.rho_l = tuple(float(r) for r in rho_l)
        self.rho_r = tuple(float(r) for r in rho_r)
        if len(self.rho_l) != len(self.rho_r):
            raise InvalidParameter("left and right states carry different numbers of mass fields")
        self.mbar = tuple(float(m) for m in (mbar if mbar is not None else [0.0] * len(self.rho_l)))
        self.ubar = float(ubar)
        self.birth_position, self.birth_time = float(x0), float(t0)
        self.horizon = float(max(horizon, t0))
        self.rl, self.rr = sum(self.rho_l), sum(self.rho_r)
        self.total_mbar = sum(self.mbar)
        self.mode = "data" if self.total_mbar > 0 else "riemann"
        self._Il0 = orbit_l.flux_integral(flux, self.birth_time)
        self._Ir0 = orbit_r.flux_integral(flux, self.birth_time)
        self.orbit_bar = VelocityOrbit.through(coefficients, self.birth_time, self.ubar)
        self._chi_cache: dict = {}
        self._integrate(region_tol)

    # closed-form balances
    def _dI(self, t):
        return (
            self.orbit_l.flux_integral(self.flux, t) - self._Il0,
            self.orbit_r.flux_integral(self.flux, t) - self._Ir0,
        )

    def _mass_parts_at(self, c, t):
        dl, dr = self._dI(t)
        shift = c - self.birth_position
        return tuple(
            shift * (rr - rl) + rl * dl - rr * dr + m
            for rl, rr, m in zip(self.rho_l, self.rho_r, self.mbar)
        )

    def _momentum_at(self, c, t):
        dl, dr = self._dI(t)
        ul, ur = self.orbit_l(t), self.orbit_r(t)
        shift = c - self.birth_position
        return (
            shift * (self.rr * ur - self.rl * ul)
            + self.rl * ul * dl
            - self.rr * ur * dr
            + self.total_mbar * self.orbit_bar(t)
        )

    def _chi_at(self, c, t):
        if self.mode == "riemann":
            if t not in self._chi_cache:
                self._chi_cache[t] = _weight_root(t, self.flux, self.rl, self.rr, self.orbit_l, self.orbit_r)
            return self._chi_cache[t]
        xi = sum(self._mass_parts_at(c, t))
        return self._momentum_at(c, t) / xi

    def _integrate(self, region_tol):
        t0, t1 = self.birth_time, self.horizon
        rhs = lambda t, y: float(self.flux(self._chi_at(y[0], t)))  # noqa: E731
        self.path = integrate_ode(
            rhs, t0, [self.birth_position], t1, _PATH_TOL,
            max_step=1.0 / NODES_PER_UNIT_TIME, first_step=min(1e-4, max(t1 - t0, 1e-300)),
        )
        self.mesh = self.path.t
        if self.mode == "data":
            for t, c in zip(self.path.t, self.path.y[:, 0]):
                dl, dr = self._dI(t)
                lo = self.birth_position + dr
                hi = self.birth_position + dl
                slack = region_tol * (1.0 + abs(c))
                if c < lo - slack or c > hi + slack:
                    raise RegionViolation(
                        f"front centre {c:.12g} left the admissible strip [{lo:.12g}, {hi:.12g}] at t={t:.6g}"
                    )

    # public evaluators
    def alive(self, t: float) -> bool:
        return self.birth_time <= t <= self.horizon + 1e-12

    def c(self, t: float) -> float:
        if self.path.t.size == 1:
            return self.birth_position
        return float(self.path(t)[0])

    def xi_parts(self, t: float):
        return self._mass_parts_at(self.c(t), t)

    def xi(self, t: float) -> float:
        return float(sum(self.xi_parts(t)))

    def chi(self, t: float) -> float:
        if t == self.birth_time and self.mode == "data":
            return self.ubar
        return float(self._chi_at(self.c(t), t))

    def momentum(self, t: float) -> float:
        return self.xi(t) * self.chi(t)

    def speed(self, t: float) -> float:
        return float(self.flux(self.chi(t)))

    def outer_velocities(self, t: float):
        return self.orbit_l(t), self.orbit_r(t)

    def orbit_form_discrepancy(self, times) -> float:
        """Largest gap between the per-time weight root and the drag orbit through its birth value."""
        if self.mode != "riemann":
            return 0.0
        ref = VelocityOrbit.through(self.coefficients, self.birth_time, self.chi(self.birth_time))
        return max(abs(self.chi(t) - ref(t)) for t in times)


class DeltaFront3(DeltaFront):
    """Two-component delta front; the first field is gas ``v``, the second liquid ``w``."""

    def xi_v(self, t: float) -> float:
        return float(self.xi_parts(t)[0])

    def xi_w(self, t: float) -> float:
        return float(self.xi_parts(t)[1])


def velocity_order(ul: float, ur: float) -> int:
    """+1 for a shock (u_l > u_r), -1 for a vacuum fan, 0 for a tie within round-off."""
    gap = ul - ur
    if abs(gap) <= VELOCITY_TIE * (1.0 + abs(ul) + abs(ur)):
        return 0
    return 1 if gap > 0 else -1


def classify(inp: RiemannInput) -> WaveKind:
    order = velocity_order(inp.left.u, inp.right.u)
    if order > 0:
        return WaveKind.DELTA_SHOCK
    if order < 0:
        return WaveKind.CONTACT_VACUUM
    return WaveKind.SINGLE_CONTACT


def chi_root(t: float, inp: RiemannInput) -> float:
    """Weight chi(t) of the zero-mass Riemann front."""
    if inp.delta_mass != 0:
        raise InvalidParameter("chi_root applies to data without a point mass")
    ol, orr = inp.orbits()
    return _weight_root(t, inp.flux, inp.left.v, inp.right.v, ol, orr)


def xi_mass(t: float, c_value: float, inp: RiemannInput) -> float:
    """Mass carried by a front born at the origin when its centre is at ``c_value``."""
    if t == 0:
        return inp.delta_mass
    ol, orr = inp.orbits()
    il, ir = ol.flux_integral(inp.flux, t), orr.flux_integral(inp.flux, t)
    return c_value * (inp.right.v - inp.left.v) + inp.left.v * il - inp.right.v * ir + inp.delta_mass


def solve_riemann(inp: RiemannInput, T: float):
    """Delta front for u_l > u_r, otherwise a contact/vacuum fan (zero width when u_l = u_r)."""
    if inp.delta_mass != 0:
        raise InvalidParameter("solve_riemann takes data without a point mass; use solve_delta_riemann")
    ol, orr = inp.orbits()
    kind = classify(inp)
    if kind is WaveKind.DELTA_SHOCK:
        return DeltaFront(inp.flux, inp.coefficients, ol, orr, (inp.left.v,), (inp.right.v,), T)
    return WaveFan(ContactPath(ol, inp.flux), ContactPath(orr, inp.flux), kind)


def solve_delta_riemann(inp: RiemannInput, T: float) -> DeltaFront:
    """Front issued from a point mass sitting between two constant states."""
    if not inp.delta_mass > 0:
        raise InvalidParameter("delta data needs a positive point mass")
    ol, orr = inp.orbits()
    return DeltaFront(
        inp.flux, inp.coefficients, ol, orr, (inp.left.v,), (inp.right.v,), T,
        mbar=(inp.delta_mass,), ubar=inp.delta_velocity,
    )


def overcompressive_at(front: DeltaFront, t: float, tol: float = 1e-10) -> bool:
    ul, ur = front.outer_velocities(t)
    chi = front.chi(t)
    f = front.flux
    return (ur - tol < chi < ul + tol) and (float(f(ur)) - tol < float(f(chi)) < float(f(ul)) + tol)


def sample_times(front: DeltaFront, n: int = 50):
    """``n`` times strictly inside the front's life."""
    lo, hi = front.birth_time, front.horizon
    return [lo + (hi - lo) * (k + 1) / (n + 1) for k in range(n)]


__all__ = [
    "WaveKind", "RiemannInput", "ContactPath", "WaveFan", "DeltaFront", "DeltaFront3",
    "classify", "velocity_order", "chi_root", "xi_mass", "solve_riemann", "solve_delta_riemann",
    "weight_function", "overcompressive_at", "sample_times",
]
