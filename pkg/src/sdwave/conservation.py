"""Total mass and momentum inside the material truncation box.

Mass is conserved exactly.  Momentum relaxes toward ``u_a`` times the mass,
``M1' = kappa (u_a M0 - M1)``; with the integrating factor ``exp(K)`` this
reads ``(exp(K) M1)' = M0 Phi'``, which is what the residual differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientSamples
from .fronts import FrontConfiguration, Trajectory


def _config(obj, t) -> FrontConfiguration:
    if isinstance(obj, Trajectory):
        return obj.at(t)
    obj.check_time(t)
    return obj


def _pieces(cfg: FrontConfiguration, t: float):
    lo, hi = cfg.box_edges(t)
    pos = np.clip(cfg.positions(t), lo, hi)
    edges = np.concatenate([[lo], pos, [hi]])
    widths = np.maximum(np.diff(edges), 0.0)
    raw = cfg.positions(t)
    inside = [lo < p < hi for p in raw]
    return widths, inside


def total_mass(obj, t: float) -> float:
    """Atoms plus region densities over the box at time ``t``."""
    cfg = _config(obj, t)
    widths, inside = _pieces(cfg, t)
    states = sum(r.density * w for r, w in zip(cfg.regions, widths))
    atoms = sum(fr.mass(t) for fr, ok in zip(cfg.fronts, inside) if ok)
    return float(states + atoms)


def component_masses(obj, t: float):
    """Per-field totals, e.g. gas and liquid for the drift-flux system."""
    cfg = _config(obj, t)
    widths, inside = _pieces(cfg, t)
    out = np.zeros(cfg.ncomp)
    for r, w in zip(cfg.regions, widths):
        out += np.asarray(r.masses) * w
    for fr, ok in zip(cfg.fronts, inside):
        if ok:
            out += np.asarray(fr.mass_parts(t, cfg.ncomp))
    return out


def total_momentum(obj, t: float) -> float:
    cfg = _config(obj, t)
    widths, inside = _pieces(cfg, t)
    states = sum(r.density * r.orbit_left(t) * w for r, w in zip(cfg.regions, widths) if not r.vacuum)
    atoms = sum(fr.momentum(t) for fr, ok in zip(cfg.fronts, inside) if ok)
    return float(states + atoms)


@dataclass
class BalanceReport:
    times: np.ndarray
    M0: np.ndarray
    M1: np.ndarray
    coefficients: object
    closed_form_error: float | None = None

    @property
    def mass_drift(self) -> float:
        """Largest relative deviation of M0 from its first sample."""
        ref = self.M0[0]
        return float(np.max(np.abs(self.M0 - ref)) / max(abs(ref), 1e-300))


def balance_report(trajectory, times) -> BalanceReport:
    times = np.asarray(times, dtype=float)
    M0 = np.array([total_mass(trajectory, t) for t in times])
    M1 = np.array([total_momentum(trajectory, t) for t in times])
    cfg = trajectory.configurations[0] if isinstance(trajectory, Trajectory) else trajectory
    coeff = cfg.coefficients
    closed = None
    if coeff.kind in ("zero", "constant", "algebraic"):
        # exp(K) M1 - M0 Phi is invariant
        t0 = times[0]
        ref = math.exp(coeff.K(t0)) * M1[0] - M0[0] * coeff.Phi(t0)
        pred = np.array([math.exp(-coeff.K(t)) * (ref + M0[0] * coeff.Phi(t)) for t in times])
        closed = float(np.max(np.abs(M1 - pred)))
    return BalanceReport(times, M0, M1, coeff, closed)


def momentum_residual(report: BalanceReport) -> float:
    """Largest residual of ``M1' = kappa (u_a M0 - M1)`` over consecutive samples.

    Each interval compares the difference quotient of ``exp(K) M1`` with
    ``M0`` times that of ``Phi`` and rescales by ``exp(-K)`` at the midpoint.
    """
    t = np.asarray(report.times, dtype=float)
    if t.size < 5:
        raise InsufficientSamples(f"need at least 5 samples, got {t.size}")
    coeff = report.coefficients
    K = np.array([coeff.K(s) for s in t])
    Phi = np.array([coeff.Phi(s) for s in t])
    scaled = np.exp(K) * report.M1
    dt = np.diff(t)
    m0 = 0.5 * (report.M0[1:] + report.M0[:-1])
    lhs = np.diff(scaled) / dt
    rhs = m0 * np.diff(Phi) / dt
    damp = np.exp(-0.5 * (K[1:] + K[:-1]))
    return float(np.max(np.abs(lhs - rhs) * damp))


__all__ = [
    "total_mass", "total_momentum", "component_masses", "BalanceReport", "balance_report", "momentum_residual",
]
