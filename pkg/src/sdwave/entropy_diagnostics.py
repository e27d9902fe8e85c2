"""Entropy diagnostics for delta fronts with the pair ``eta = v f(u)^2 / 2``, ``q = v f(u)^3 / 2``.

A front is dissipative when the entropy stored in its atom, ``xi f(chi)^2 / 2``,
grows no faster than the entropy flux jump feeds it, after accounting for
drag.  ``dissipativity_residual`` returns twice that balance, so a front is
dissipative where the residual is not positive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientSamples, TimeOutOfRange
from .model import FluxSpec
from .riemann import DeltaFront

ABS_TOL = 1e-10


def overcompressive(front: DeltaFront, t: float, abs_tol: float = ABS_TOL) -> bool:
    """``U_r < chi < U_l`` and ``f(U_r) < f(chi) < f(U_l)``, each up to ``abs_tol``."""
    if not front.alive(t):
        raise TimeOutOfRange(f"front not alive at t={t:g}")
    ul, ur = front.outer_velocities(t)
    chi = front.chi(t)
    f = front.flux
    fl, fr, fc = float(f(ul)), float(f(ur)), float(f(chi))
    return (ur - abs_tol <= chi <= ul + abs_tol) and (fr - abs_tol <= fc <= fl + abs_tol)


def _jump(front, t, power):
    ul, ur = front.outer_velocities(t)
    f = front.flux
    return front.rr * float(f(ur)) ** power - front.rl * float(f(ul)) ** power


def _derivative(g, t, lo, hi, h):
    """Centred difference where possible, second-order one-sided at the ends."""
    if t - h >= lo and t + h <= hi:
        return (g(t + h) - g(t - h)) / (2 * h)
    if t + 2 * h <= hi:
        return (-3 * g(t) + 4 * g(t + h) - g(t + 2 * h)) / (2 * h)
    if t - 2 * h >= lo:
        return (3 * g(t) - 4 * g(t - h) + g(t - 2 * h)) / (2 * h)
    raise InsufficientSamples("front lives too briefly to difference its weight and mass")


def _local_step(front, t):
    mesh = front.mesh
    if mesh.size < 3:
        raise InsufficientSamples("front mesh has fewer than three nodes")
    k = int(np.clip(np.searchsorted(mesh, t), 1, mesh.size - 1))
    return float(mesh[k] - mesh[k - 1])


def residual_with_error(front: DeltaFront, t: float):
    """Residual and an estimate of its differencing error (step h against h/2)."""
    if not front.alive(t):
        raise TimeOutOfRange(f"front not alive at t={t:g}")
    lo, hi = front.birth_time, front.horizon
    h = 0.5 * _local_step(front, t)
    coeff = front.coefficients
    fc = float(front.flux(front.chi(t)))
    dfc = float(front.flux.df(front.chi(t)))
    xi, chi = front.xi(t), front.chi(t)
    drag = float(coeff.kappa(t)) * (chi - float(coeff.ua(t)))
    source = fc * _jump(front, t, 2) - _jump(front, t, 3)

    def value(step):
        dchi = _derivative(front.chi, t, lo, hi, step)
        dxi = _derivative(front.xi, t, lo, hi, step)
        return 2 * xi * fc * dfc * (dchi + drag) + dxi * fc**2 - source

    coarse, fine = value(h), value(0.5 * h)
    return fine, abs(fine - coarse)


def dissipativity_residual(front: DeltaFront, t: float) -> float:
    return residual_with_error(front, t)[0]


def is_dissipative(front: DeltaFront, t: float, abs_tol: float = ABS_TOL) -> bool:
    r, err = residual_with_error(front, t)
    return r <= 10 * err + abs_tol * (1 + abs(front.xi(t)))


def f_squared_convex(flux, lo: float, hi: float, samples: int = 1000, abs_tol: float = ABS_TOL) -> bool:
    """Numerical convexity of ``f^2`` on ``[lo, hi]`` from second differences."""
    if not hi > lo:
        raise ValueError("empty range")
    f = flux.f if isinstance(flux, FluxSpec) else flux
    x = np.linspace(lo, hi, samples)
    g = np.asarray(f(x), dtype=float) ** 2
    h = x[1] - x[0]
    second = (g[2:] - 2 * g[1:-1] + g[:-2]) / h**2
    return bool(np.all(second >= -abs_tol))


@dataclass
class EntropyReport:
    times: np.ndarray
    residuals: np.ndarray
    tolerances: np.ndarray
    overcompressive: np.ndarray
    f_squared_convex: bool
    notes: list = field(default_factory=list)

    @property
    def dissipative(self) -> np.ndarray:
        return self.residuals <= self.tolerances

    def consistent(self) -> bool:
        """Whether the overcompressive and dissipative flags agree at every sample."""
        return bool(np.all(self.dissipative == self.overcompressive))


def entropy_report(front: DeltaFront, times, abs_tol: float = ABS_TOL, u_range=None) -> EntropyReport:
    times = np.asarray(times, dtype=float)
    res, tol, over = [], [], []
    for t in times:
        r, err = residual_with_error(front, t)
        res.append(r)
        tol.append(10 * err + abs_tol * (1 + abs(front.xi(t))))
        over.append(overcompressive(front, t, abs_tol))
    if u_range is None:
        ul, ur = front.outer_velocities(front.birth_time)
        u_range = (min(ur, ul), max(ur, ul))
    lo, hi = u_range
    convex = f_squared_convex(front.flux, lo, hi) if hi > lo else True
    return EntropyReport(times, np.array(res), np.array(tol), np.array(over), convex)


__all__ = [
    "overcompressive", "dissipativity_residual", "residual_with_error", "is_dissipative",
    "f_squared_convex", "EntropyReport", "entropy_report",
]
