"""Flux functions, drag coefficients and drag-evolved velocity orbits.

The droplet system transports volume fraction ``v`` and momentum ``v u`` with
speed ``f(u)`` while the velocity relaxes toward the air velocity ``u_a(t)``
at rate ``kappa(t)``.  A constant state therefore keeps its density and its
velocity follows the orbit ``U(t) = exp(-K(t)) (Phi(t) + u0)``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidParameter, NegativeTime, UnknownModel
from .numerics import ToleranceProfile, quad

_QUAD_TOL = ToleranceProfile(abs_tol=1e-13, rel_tol=1e-12)


@dataclass(frozen=True, eq=False)
class FluxSpec:
    """Strictly increasing flux ``f`` with its derivative.

    ``f`` and ``df`` accept scalars or numpy arrays.  ``params`` is kept so a
    flux can be serialized back into a scenario.
    """

    f: Callable
    df: Callable
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __call__(self, u):
        return self.f(u)

    def is_identity(self) -> bool:
        return self.name == "identity"

    def check_monotone(self, lo: float, hi: float, samples: int = 10_000) -> bool:
        u = np.linspace(lo, hi, samples)
        return bool(np.all(self.df(u) > 0))


def _identity():
    return FluxSpec(lambda u: u * 1.0, lambda u: 1.0 + 0.0 * u, "identity")


def _geometric_optics():
    def f(u):
        return u / np.sqrt(1.0 + u * u)

    def df(u):
        return (1.0 + u * u) ** -1.5

    return FluxSpec(f, df, "geometric_optics")


def _odd_power(k=3):
    if isinstance(k, bool) or not float(k).is_integer():
        raise InvalidParameter(f"odd_power exponent must be an integer, got {k!r}")
    k = int(k)
    if k < 1 or k % 2 == 0:
        raise InvalidParameter(f"odd_power exponent must be odd and >= 1, got {k}")
    if k == 1:
        return FluxSpec(lambda u: u * 1.0, lambda u: 1.0 + 0.0 * u, "odd_power", {"k": 1})
    # the derivative vanishes at u = 0; strictness holds away from the origin only
    return FluxSpec(lambda u: u**k, lambda u: k * u ** (k - 1), "odd_power", {"k": k})


def _traffic(a=1.0):
    a = float(a)
    if not a > 0:
        raise InvalidParameter(f"traffic sensitivity a must be positive, got {a}")
    return FluxSpec(lambda u: u / (a + u), lambda u: a / (a + u) ** 2, "traffic", {"a": a})


_BUILTINS = {
    "identity": _identity,
    "geometric_optics": _geometric_optics,
    "odd_power": _odd_power,
    "traffic": _traffic,
}


def builtin_flux(name: str, **params) -> FluxSpec:
    """Return one of the built-in fluxes: identity, geometric_optics, odd_power(k), traffic(a)."""
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise UnknownModel(f"unknown flux model {name!r}; choose from {sorted(_BUILTINS)}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise InvalidParameter(f"bad parameters for {name}: {exc}") from None


def _check_time(t):
    if t < 0:
        raise NegativeTime(f"time must be nonnegative, got {t}")


class CoefficientSpec:
    """Drag coefficient ``kappa(t)`` and air velocity ``u_a(t)``.

    ``K(t)`` and ``Phi(t)`` are closed-form for the built-in kinds (zero,
    constant, algebraic ``1/(t + upkappa)`` with constant air velocity).  For
    arbitrary callables they are accumulated on a geometric checkpoint ladder
    so repeated queries only integrate the last partial interval.
    """

    _LADDER = tuple([0.0] + [2.0**j for j in range(-6, 12)])

    def __init__(self, kappa: Callable | None = None, ua: Callable | None = None, *, kind: str = "generic", **info):
        self.kind = kind
        self.info = dict(info)
        self.kappa = kappa if kappa is not None else (lambda t: 0.0)
        self.ua = ua if ua is not None else (lambda t: 0.0)
        self._lock = threading.Lock()
        self._K_cache = {0.0: 0.0}
        self._Phi_cache = {0.0: 0.0}

    # constructors for the closed-form kinds
    @classmethod
    def zero(cls, ua: float = 0.0):
        ua = float(ua)
        return cls(lambda t: 0.0, lambda t: ua, kind="zero", ua_value=ua)

    @classmethod
    def constant(cls, kappa: float, ua: float = 0.0):
        kappa, ua = float(kappa), float(ua)
        if kappa == 0:
            return cls.zero(ua)
        return cls(lambda t: kappa, lambda t: ua, kind="constant", kappa_value=kappa, ua_value=ua)

    @classmethod
    def algebraic(cls, upkappa: float, ua: float = 0.0):
        upkappa, ua = float(upkappa), float(ua)
        if not upkappa > 0:
            raise InvalidParameter("upkappa must be positive")
        return cls(lambda t: 1.0 / (t + upkappa), lambda t: ua, kind="algebraic", upkappa=upkappa, ua_value=ua)

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"

    def describe(self) -> dict:
        return {"kind": self.kind, **self.info}

    def K(self, t: float) -> float:
        _check_time(t)
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return self.info["kappa_value"] * t
        if self.kind == "algebraic":
            return math.log1p(t / self.info["upkappa"])
        return self._ladder(t, self._K_cache, lambda s: float(self.kappa(s)))

    def expK(self, t: float) -> float:
        return math.exp(self.K(t))

    def Phi(self, t: float) -> float:
        _check_time(t)
        if self.kind == "zero":
            return 0.0
        a = self.info.get("ua_value", 0.0)
        if self.kind == "constant":
            return a * math.expm1(self.info["kappa_value"] * t)
        if self.kind == "algebraic":
            return a * t / self.info["upkappa"]
        return self._ladder(t, self._Phi_cache, lambda s: float(self.kappa(s) * self.ua(s)) * self.expK(s))

    def _ladder(self, t, cache, integrand):
        ladder = self._LADDER
        j = int(np.searchsorted(ladder, t, side="right")) - 1
        if j >= len(ladder) - 1:
            j = len(ladder) - 1
        base = ladder[j]
        with self._lock:
            known = cache.get(base)
        if known is None:
            # fill the ladder up to base, one rung at a time
            value = 0.0
            for i in range(1, j + 1):
                rung = ladder[i]
                with self._lock:
                    cached = cache.get(rung)
                if cached is None:
                    cached = value + quad(integrand, ladder[i - 1], rung, _QUAD_TOL)
                    with self._lock:
                        cache[rung] = cached
                value = cached
            known = value
        return known + quad(integrand, base, t, _QUAD_TOL)


def kappa_integral(coeff: CoefficientSpec, t: float) -> float:
    """K(t), the integral of the drag coefficient over [0, t]."""
    return coeff.K(t)


def forcing_integral(coeff: CoefficientSpec, t: float) -> float:
    """Phi(t), the integral of kappa * u_a * exp(K) over [0, t]."""
    return coeff.Phi(t)


@dataclass(frozen=True)
class State:
    v: float
    u: float

    def __post_init__(self):
        if self.v < 0:
            raise InvalidParameter(f"volume fraction must be nonnegative, got {self.v}")


class VelocityOrbit:
    """Velocity of a constant state under drag, ``U(t) = exp(-K)(Phi + u0)``."""

    _STEP = 1.0 / 16.0

    def __init__(self, u0: float, coefficients: CoefficientSpec):
        self.u0 = float(u0)
        self.coefficients = coefficients
        self._lock = threading.Lock()
        self._flux_cache: dict = {}

    @classmethod
    def through(cls, coefficients: CoefficientSpec, t: float, u: float) -> "VelocityOrbit":
        """The orbit that takes velocity ``u`` at time ``t``."""
        return cls(coefficients.expK(t) * u - coefficients.Phi(t), coefficients)

    def __call__(self, t: float) -> float:
        c = self.coefficients
        if c.kind == "zero":
            _check_time(t)
            return self.u0
        if c.kind == "constant":
            _check_time(t)
            a = c.info["ua_value"]
            return a + (self.u0 - a) * math.exp(-c.info["kappa_value"] * t)
        if c.kind == "algebraic":
            _check_time(t)
            k, a = c.info["upkappa"], c.info["ua_value"]
            return (a * t + self.u0 * k) / (t + k)
        return math.exp(-c.K(t)) * (c.Phi(t) + self.u0)

    def flux_integral(self, flux: FluxSpec, t: float) -> float:
        """The integral of f(U(s)) over [0, t]: the path of a contact riding this orbit."""
        _check_time(t)
        c = self.coefficients
        if c.kind == "zero":
            return float(flux(self.u0)) * t
        if flux.is_identity() and c.kind == "constant":
            a, kap = c.info["ua_value"], c.info["kappa_value"]
            return a * t - (self.u0 - a) * math.expm1(-kap * t) / kap
        if flux.is_identity() and c.kind == "algebraic":
            k, a = c.info["upkappa"], c.info["ua_value"]
            return a * t + k * (self.u0 - a) * math.log1p(t / k)
        return self._memo_integral(flux, t)

    def _memo_integral(self, flux, t):
        step = self._STEP
        j = int(t // step)
        key = id(flux)
        with self._lock:
            table = self._flux_cache.setdefault(key, [0.0])
        integrand = lambda s: float(flux(self(s)))  # noqa: E731
        while len(table) <= j:
            n = len(table)
            value = table[-1] + quad(integrand, (n - 1) * step, n * step, _QUAD_TOL)
            with self._lock:
                if len(table) == n:
                    table.append(value)
        return table[j] + quad(integrand, j * step, t, _QUAD_TOL)


def evolve_velocity(orbit: VelocityOrbit, t: float) -> float:
    """U(t) for the given orbit."""
    _check_time(t)
    return orbit(t)
