"""Drift-flux variant: gas mass ``v`` and liquid mass ``w`` sharing one velocity.

The centre and weight of a front depend only on the summed density ``v + w``;
the two component masses follow from their own balance laws along that centre.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidParameter
from .model import CoefficientSpec, FluxSpec, VelocityOrbit
from .riemann import ContactPath, DeltaFront3, WaveFan, WaveKind, velocity_order


@dataclass(frozen=True)
class State3:
    v: float
    w: float
    u: float

    def __post_init__(self):
        if self.v < 0 or self.w < 0:
            raise InvalidParameter("gas and liquid masses must be nonnegative")

    @property
    def total(self) -> float:
        return self.v + self.w


def solve_riemann3(left: State3, right: State3, T: float, flux: FluxSpec, coefficients: CoefficientSpec | None = None):
    """Two-component front for u_l > u_r, otherwise a vacuum fan with both masses zero inside."""
    coefficients = coefficients or CoefficientSpec.zero()
    ol, orr = VelocityOrbit(left.u, coefficients), VelocityOrbit(right.u, coefficients)
    order = velocity_order(left.u, right.u)
    if order > 0:
        return DeltaFront3(flux, coefficients, ol, orr, (left.v, left.w), (right.v, right.w), T)
    kind = WaveKind.CONTACT_VACUUM if order < 0 else WaveKind.SINGLE_CONTACT
    return WaveFan(ContactPath(ol, flux), ContactPath(orr, flux), kind)


def solve_delta_riemann3(
    left: State3,
    right: State3,
    mbar: float,
    nbar: float,
    ubar: float,
    T: float,
    flux: FluxSpec,
    coefficients: CoefficientSpec | None = None,
) -> DeltaFront3:
    """Front issued from point masses ``mbar`` (gas) and ``nbar`` (liquid) moving at ``ubar``."""
    if not (mbar > 0 and nbar > 0):
        raise InvalidParameter("both point masses must be positive")
    if not left.u > ubar > right.u:
        raise InvalidParameter("delta data needs u_l > u_bar > u_r")
    coefficients = coefficients or CoefficientSpec.zero()
    ol, orr = VelocityOrbit(left.u, coefficients), VelocityOrbit(right.u, coefficients)
    return DeltaFront3(
        flux, coefficients, ol, orr, (left.v, left.w), (right.v, right.w), T,
        mbar=(mbar, nbar), ubar=ubar,
    )
