"""Numerical kernels: embedded Runge-Kutta integration, Brent root finding and
adaptive Simpson quadrature."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import MaxDepthExceeded, NoSignChange, NonFiniteRhs, StepSizeUnderflow


@dataclass(frozen=True)
class ToleranceProfile:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    max_iter: int = 200

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


DEFAULT_TOL = ToleranceProfile()
# used where a root or path feeds an exact comparison downstream
TIGHT_TOL = ToleranceProfile(abs_tol=1e-13, rel_tol=1e-12, max_iter=400)


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# continuous extension, columns multiply theta, theta^2, theta^3, theta^4
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])


class OdePath:
    """Accepted nodes of an integration plus a dense interpolant between them."""

    def __init__(self, t, y, coeffs):
        self.t = np.asarray(t, dtype=float)
        self.y = np.asarray(y, dtype=float).reshape(len(self.t), -1)
        if coeffs:
            self._h = np.array([h for h, _ in coeffs])
            self._q = np.stack([q for _, q in coeffs])  # (steps, 4, dim)
        else:
            self._h = np.zeros(0)
            self._q = np.zeros((0, 4, self.y.shape[1]))

    @property
    def t0(self):
        return float(self.t[0])

    @property
    def t1(self):
        return float(self.t[-1])

    def __call__(self, tq):
        scalar = np.ndim(tq) == 0
        tq = np.atleast_1d(np.asarray(tq, dtype=float))
        slack = 1e-12 * max(1.0, abs(self.t[-1]))
        if np.any(tq < self.t[0] - slack) or np.any(tq > self.t[-1] + slack):
            raise ValueError("query time outside the integrated interval")
        if len(self.t) == 1:
            out = np.repeat(self.y[:1], tq.size, axis=0)
        else:
            idx = np.clip(np.searchsorted(self.t, tq, side="right") - 1, 0, len(self.t) - 2)
            h = self._h[idx]
            theta = (tq - self.t[idx]) / h
            powers = np.stack([theta, theta**2, theta**3, theta**4], axis=1)
            out = self.y[idx] + h[:, None] * np.einsum("nk,nkd->nd", powers, self._q[idx])
        return out[0] if scalar else out


def _check_finite(values):
    if not np.all(np.isfinite(values)):
        raise NonFiniteRhs("right-hand side returned a non-finite value")
    return values


def integrate_ode(
    rhs: Callable,
    t0: float,
    y0,
    t1: float,
    tol: ToleranceProfile = DEFAULT_TOL,
    max_step: float | None = None,
    first_step: float | None = None,
) -> OdePath:
    """Integrate ``y' = rhs(t, y)`` from ``t0`` to ``t1`` with Dormand-Prince 5(4).

    Returns an :class:`OdePath` that interpolates between accepted steps with
    the pair's fourth-order continuous extension.
    """
    if t1 < t0:
        raise ValueError("t1 must not precede t0")
    y = np.atleast_1d(np.asarray(y0, dtype=float)).copy()
    ts, ys, coeffs = [t0], [y.copy()], []
    span = t1 - t0
    if span == 0:
        return OdePath(ts, ys, coeffs)
    if max_step is None:
        max_step = span
    floor = 1e-14 * span

    def f(t, yy):
        return _check_finite(np.atleast_1d(np.asarray(rhs(t, yy), dtype=float)))

    k0 = f(t0, y)
    if first_step is None:
        scale = tol.abs_tol + tol.rel_tol * np.abs(y)
        d0 = np.max(np.abs(y) / scale)
        d1 = np.max(np.abs(k0) / scale)
        h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6 * span
        h = min(max(h, 1e-6 * span), max_step, span)
    else:
        h = min(first_step, max_step, span)

    t = t0
    k = np.empty((7, y.size))
    iterations = 0
    while t < t1:
        if t + h > t1 or t1 - (t + h) < 1e-12 * span:
            h = t1 - t
        accepted = False
        while not accepted:
            iterations += 1
            if h < floor:
                raise StepSizeUnderflow(f"step {h:g} fell below {floor:g} at t={t:g}")
            k[0] = k0
            for s in range(1, 7):
                ys_stage = y + h * (np.asarray(_A[s]) @ k[:s])
                k[s] = f(t + _C[s] * h, ys_stage)
            y_new = y + h * (_B @ k)
            err_vec = h * (_E @ k)
            scale = tol.abs_tol + tol.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
            err = float(np.max(np.abs(err_vec) / scale))
            if err <= 1.0:
                accepted = True
                coeffs.append((h, (k.T @ _P).T.copy()))
                t = t1 if t1 - (t + h) <= 1e-14 * span else t + h
                y = y_new
                k0 = k[6].copy()
                ts.append(t)
                ys.append(y.copy())
                fac = 5.0 if err == 0 else min(5.0, 0.9 * err ** -0.2)
                h = min(h * fac, max_step)
            else:
                h = h * max(0.2, 0.9 * err ** -0.2)
    return OdePath(ts, ys, coeffs)


def find_root(g: Callable[[float], float], a: float, b: float, tol: ToleranceProfile = DEFAULT_TOL) -> float:
    """Brent's method on a sign-changing bracket; the iterate never leaves [a, b]."""
    fa, fb = float(g(a)), float(g(b))
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        raise NoSignChange(f"g({a:g})={fa:g} and g({b:g})={fb:g} share a sign")
    lo, hi = min(a, b), max(a, b)
    width_tol = tol.rel_tol * (abs(a) + abs(b))
    c, fc = a, fa
    d = e = b - a
    for _ in range(tol.max_iter):
        if fb * fc > 0:
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        xtol = 2.0 * np.finfo(float).eps * abs(b) + 0.5 * width_tol
        m = 0.5 * (c - b)
        if abs(fb) <= tol.abs_tol or abs(m) <= xtol:
            return min(max(b, lo), hi)
        if abs(e) >= xtol and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p, q = 2.0 * m * s, 1.0 - s
            else:
                q_, r = fa / fc, fb / fc
                p = s * (2.0 * m * q_ * (q_ - r) - (b - a) * (r - 1.0))
                q = (q_ - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            else:
                p = -p
            if 2.0 * p < min(3.0 * m * q - abs(xtol * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = m
        else:
            d = e = m
        a, fa = b, fb
        b = b + d if abs(d) > xtol else b + math.copysign(xtol, m)
        fb = float(g(b))
    return min(max(b, lo), hi)


def quad(f: Callable[[float], float], a: float, b: float, tol: ToleranceProfile = DEFAULT_TOL, max_depth: int = 30) -> float:
    """Adaptive Simpson quadrature with Richardson correction."""
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    fa, fm, fb = float(f(a)), float(f(0.5 * (a + b))), float(f(b))
    whole = (b - a) * (fa + 4 * fm + fb) / 6.0
    eps = max(tol.abs_tol, tol.rel_tol * abs(whole))
    return sign * _simpson(f, a, b, fa, fm, fb, whole, eps, max_depth, 0)


def _simpson(f, a, b, fa, fm, fb, whole, eps, max_depth, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = float(f(lm)), float(f(rm))
    left = (m - a) * (fa + 4 * flm + fm) / 6.0
    right = (b - m) * (fm + 4 * frm + fb) / 6.0
    delta = left + right - whole
    # always split twice so that a lucky coarse estimate is not trusted
    if depth >= 2 and abs(delta) <= 15.0 * eps:
        return left + right + delta / 15.0
    if depth >= max_depth:
        raise MaxDepthExceeded(f"adaptive Simpson exceeded {max_depth} levels near x={m:g}")
    return _simpson(f, a, m, fa, flm, fm, left, 0.5 * eps, max_depth, depth + 1) + _simpson(
        f, m, b, fm, frm, fb, right, 0.5 * eps, max_depth, depth + 1
    )


def gauss_legendre(n: int = 8):
    """Nodes and weights on [-1, 1]."""
    return np.polynomial.legendre.leggauss(n)
