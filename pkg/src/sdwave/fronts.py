"""Front tracking for piecewise constant data.

The line is cut into cells, every cell boundary is resolved by a Riemann
problem, and fronts are advanced until two neighbours meet.  A collision is
replaced by a single delta front carrying the combined mass and momentum,
born from point-mass data between the two outer states.

A configuration is an alternating list ``regions[0], fronts[0], regions[1],
..., fronts[n-1], regions[n]``.  Vacuum regions carry zero mass and take their
velocity traces from the states on either side.

Mass bookkeeping uses a material truncation box: its two edges ride the
flux integral of the outermost states, so nothing crosses them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    EventBudgetExceeded,
    InvalidParameter,
    InvalidPartition,
    NonOvercompressiveMerge,
    TimeOutOfRange,
)
from .model import CoefficientSpec, FluxSpec, VelocityOrbit
from .numerics import TIGHT_TOL, find_root
from .riemann import NODES_PER_UNIT_TIME, ContactPath, DeltaFront, DeltaFront3, overcompressive_at, velocity_order

SIMULTANEOUS_TOL = 1e-12
_MERGE_TOL = 1e-9


@dataclass(frozen=True)
class PartitionSpec:
    """Cell widths must lie strictly between ``C1 * eps**alpha`` and ``C2 * rho(eps)``.

    The default spacing function is ``rho(eps) = eps**(alpha / 2)``, which tends
    to zero more slowly than ``eps**alpha`` so the window is open for small eps.
    """

    R: float
    eps: float
    alpha: float = 0.5
    C1: float = 1.0
    C2: float = 1.0
    rho: Callable[[float], float] | None = None

    def __post_init__(self):
        if not self.eps > 0:
            raise InvalidParameter("eps must be positive")
        if not 0 < self.alpha < 1:
            raise InvalidParameter("alpha must lie in (0, 1)")
        if self.C1 < 1 or self.C2 < 1:
            raise InvalidParameter("C1 and C2 must be at least 1")

    def spacing(self) -> float:
        if self.rho is None:
            return self.eps ** (0.5 * self.alpha)
        return float(self.rho(self.eps))

    def bounds(self):
        return self.C1 * self.eps**self.alpha, self.C2 * self.spacing()

    def nodes(self, length: float) -> np.ndarray:
        """Uniform nodes ``Y_0 = R < ... < Y_n = R + length`` inside the width window."""
        lo, hi = self.bounds()
        if not lo < hi:
            raise InvalidPartition(f"empty width window: lower {lo:g} >= upper {hi:g}")
        if not length > 0:
            raise InvalidPartition("partition length must be positive")
        target = math.sqrt(lo * hi)
        n0 = max(1, round(length / target))
        for n in (n0, n0 + 1, n0 - 1):
            if n >= 1 and lo < length / n < hi:
                return self.R + length * np.arange(n + 1) / n
        raise InvalidPartition(f"no uniform partition of length {length:g} has widths in ({lo:g}, {hi:g})")

    def check(self, nodes: Sequence[float]) -> None:
        lo, hi = self.bounds()
        widths = np.diff(np.asarray(nodes, dtype=float))
        bad = np.flatnonzero((widths <= lo) | (widths >= hi))
        if bad.size:
            i = int(bad[0])
            raise InvalidPartition(f"cell {i} has width {widths[i]:g} outside ({lo:g}, {hi:g})")

    def event_budget(self, length: float) -> int:
        # each cell boundary spawns at most two fronts and each event removes at least one
        return math.ceil(2.0 * length / (self.C1 * self.eps**self.alpha))


@dataclass(frozen=True)
class Region:
    """Constant state between two fronts; ``masses`` is all zero in a vacuum."""

    masses: tuple
    orbit_left: VelocityOrbit
    orbit_right: VelocityOrbit
    vacuum: bool = False

    @property
    def density(self) -> float:
        return float(sum(self.masses))

    def velocity(self, x, t, xl, xr):
        if not self.vacuum:
            return np.full(np.shape(x), self.orbit_left(t), dtype=float)
        ul, ur = self.orbit_left(t), self.orbit_right(t)
        if not (math.isfinite(xl) and math.isfinite(xr)) or xr <= xl:
            return np.full(np.shape(x), ul, dtype=float)
        return ul + (np.asarray(x, dtype=float) - xl) / (xr - xl) * (ur - ul)


class Front:
    """A delta front or a zero-mass contact.

    ``kind`` is ``"Delta"``, ``"Delta3"``, ``"ContactLeft"`` (state on the left,
    vacuum on the right), ``"ContactRight"`` (vacuum then state) or
    ``"Contact"`` (two states with equal velocity).
    """

    def __init__(self, kind: str, payload):
        self.kind = kind
        self.payload = payload

    @property
    def is_delta(self) -> bool:
        return self.kind.startswith("Delta")

    @property
    def birth_time(self) -> float:
        return self.payload.birth_time if self.is_delta else self.payload.t0

    def position(self, t: float) -> float:
        return self.payload.c(t) if self.is_delta else self.payload(t)

    def positions(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        if self.is_delta:
            p = self.payload
            if p.path.t.size == 1:
                return np.full(ts.shape, p.birth_position)
            return p.path(ts)[:, 0]
        return np.array([self.payload(t) for t in ts])

    def mass_parts(self, t: float, ncomp: int):
        return tuple(self.payload.xi_parts(t)) if self.is_delta else (0.0,) * ncomp

    def mass(self, t: float) -> float:
        return self.payload.xi(t) if self.is_delta else 0.0

    def chi(self, t: float) -> float:
        return self.payload.chi(t) if self.is_delta else self.payload.orbit(t)

    def momentum(self, t: float) -> float:
        return self.payload.momentum(t) if self.is_delta else 0.0

    def __repr__(self):
        return f"Front({self.kind}, born t={self.birth_time:g})"


@dataclass
class Event:
    """Crossing of adjacent fronts ``participants`` (consecutive indices) at ``(T, X)``."""

    T: float
    X: float
    participants: tuple


@dataclass
class FrontConfiguration:
    time: float
    regions: list
    fronts: list
    flux: FluxSpec
    coefficients: CoefficientSpec
    horizon: float
    box: tuple
    event_log: list = field(default_factory=list)
    valid_until: float | None = None
    event_budget: int | None = None
    _pair_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if len(self.regions) != len(self.fronts) + 1:
            raise InvalidParameter("a configuration alternates regions and fronts")
        if self.valid_until is None:
            self.valid_until = self.horizon

    @property
    def ncomp(self) -> int:
        return len(self.regions[0].masses)

    @property
    def states(self):
        return self.regions

    def box_edges(self, t: float):
        return self.box[0](t), self.box[1](t)

    def check_time(self, t: float):
        slack = 1e-12 * max(1.0, abs(t))
        if not (self.time - slack <= t <= self.valid_until + slack):
            raise TimeOutOfRange(f"t={t:g} outside [{self.time:g}, {self.valid_until:g}]")

    def positions(self, t: float) -> np.ndarray:
        return np.array([fr.position(t) for fr in self.fronts])

    def delta_fronts(self):
        return [fr for fr in self.fronts if fr.is_delta]


# ---------------------------------------------------------------------------
# construction


def _region(masses, orbit):
    return Region(tuple(float(m) for m in masses), orbit, orbit)


def _split(left: Region, right: Region, x0, t0, flux, coefficients, horizon):
    """Fronts and inserted regions resolving the jump between two adjacent regions."""
    order = velocity_order(left.orbit_right(t0), right.orbit_left(t0))
    if order > 0:
        cls = DeltaFront3 if len(left.masses) == 2 else DeltaFront
        front = cls(flux, coefficients, left.orbit_right, right.orbit_left, left.masses, right.masses,
                    horizon, x0=x0, t0=t0)
        return [Front("Delta3" if cls is DeltaFront3 else "Delta", front)], []
    if order < 0:
        vac = Region((0.0,) * len(left.masses), left.orbit_right, right.orbit_left, vacuum=True)
        return [
            Front("ContactLeft", ContactPath(left.orbit_right, flux, x0, t0)),
            Front("ContactRight", ContactPath(right.orbit_left, flux, x0, t0)),
        ], [vac]
    return [Front("Contact", ContactPath(left.orbit_right, flux, x0, t0))], []


def from_pieces(
    states: Sequence,
    breaks: Sequence[float],
    flux: FluxSpec,
    coefficients: CoefficientSpec | None = None,
    horizon: float = 1.0,
    box: tuple | None = None,
    event_budget: int | None = None,
) -> FrontConfiguration:
    """Configuration for piecewise constant data.

    ``states`` are ``(masses, u)`` pairs, ``masses`` a float or a tuple; state
    ``i`` occupies ``(breaks[i-1], breaks[i])``.  ``box`` is the truncation box
    at time zero and defaults to one unit beyond the outer breaks.
    """
    coefficients = coefficients or CoefficientSpec.zero()
    if len(states) != len(breaks) + 1:
        raise InvalidParameter("need exactly one more state than breaks")
    if np.any(np.diff(breaks) <= 0):
        raise InvalidParameter("breaks must be strictly increasing")
    norm = []
    for masses, u in states:
        masses = tuple(masses) if isinstance(masses, (tuple, list)) else (masses,)
        if any(m < 0 for m in masses):
            raise InvalidParameter("masses must be nonnegative")
        norm.append((masses, float(u)))
    if len({len(m) for m, _ in norm}) != 1:
        raise InvalidParameter("all states need the same number of mass fields")

    # merge runs of identical states so they do not produce empty contacts
    merged_states, merged_breaks = [norm[0]], []
    for (masses, u), x in zip(norm[1:], breaks):
        if (masses, u) == merged_states[-1]:
            continue
        merged_states.append((masses, u))
        merged_breaks.append(float(x))

    base = [_region(m, VelocityOrbit(u, coefficients)) for m, u in merged_states]
    regions, fronts = [base[0]], []
    for right, x in zip(base[1:], merged_breaks):
        new_fronts, inserted = _split(regions[-1], right, x, 0.0, flux, coefficients, horizon)
        fronts.extend(new_fronts)
        regions.extend(inserted)
        regions.append(right)

    if box is None:
        lo = (merged_breaks[0] if merged_breaks else 0.0) - 1.0
        hi = (merged_breaks[-1] if merged_breaks else 0.0) + 1.0
    else:
        lo, hi = map(float, box)
        if merged_breaks and not (lo < merged_breaks[0] and hi > merged_breaks[-1]):
            raise InvalidParameter("the truncation box must contain every break")
    edges = (
        ContactPath(regions[0].orbit_left, flux, lo, 0.0),
        ContactPath(regions[-1].orbit_right, flux, hi, 0.0),
    )
    return FrontConfiguration(0.0, regions, fronts, flux, coefficients, float(horizon), edges,
                              event_budget=event_budget)


def discretize_initial(
    left,
    sampler: Callable,
    spec: PartitionSpec,
    length: float,
    flux: FluxSpec,
    coefficients: CoefficientSpec | None = None,
    horizon: float = 1.0,
    nodes: Sequence[float] | None = None,
    box: tuple | None = None,
) -> FrontConfiguration:
    """Piecewise constant approximation of sampled data on ``[R, R + length]``.

    ``sampler(x)`` returns ``(masses, u)`` with ``masses`` a float or a
    ``(v, w)`` tuple.  Cell ``[Y_i, Y_{i+1}]`` takes the value at its right
    endpoint, the constant ``left = (masses, u)`` fills ``(-inf, R)`` and the
    last cell value continues to the right.
    """
    if nodes is None:
        nodes = spec.nodes(length)
    else:
        nodes = np.asarray(nodes, dtype=float)
        spec.check(nodes)
    states = [left] + [sampler(float(y)) for y in nodes[1:]]
    breaks = list(nodes[:-1])
    if box is None:
        box = (nodes[0] - 1.0, nodes[-1] + 1.0)
    return from_pieces(states, breaks, flux, coefficients, horizon, box,
                       event_budget=spec.event_budget(nodes[-1] - nodes[0]))


# ---------------------------------------------------------------------------
# interactions


def _time_nodes(a: Front, b: Front, t0: float, t1: float) -> np.ndarray:
    n = max(2, int(math.ceil((t1 - t0) * NODES_PER_UNIT_TIME)) + 1)
    grid = [np.linspace(t0, t1, n)]
    for fr in (a, b):
        if fr.is_delta:
            mesh = fr.payload.mesh
            grid.append(mesh[(mesh > t0) & (mesh < t1)])
    return np.unique(np.concatenate(grid))


def _crossing(a: Front, b: Front, t0: float, t1: float) -> float:
    """First time in (t0, t1] at which ``b`` is no longer to the right of ``a``."""
    if not (a.is_delta or b.is_delta):
        return math.inf  # contacts never meet: parallel or separated by a vacuum
    if t1 <= t0:
        return math.inf
    ts = _time_nodes(a, b, t0, t1)
    gap = b.positions(ts) - a.positions(ts)
    hit = np.flatnonzero(gap[1:] <= 0.0)
    if hit.size == 0:
        return math.inf
    k = int(hit[0]) + 1
    if gap[k] == 0.0:
        return float(ts[k])
    g = lambda t: b.position(t) - a.position(t)  # noqa: E731
    return find_root(g, float(ts[k - 1]), float(ts[k]), TIGHT_TOL)


def next_interaction(config: FrontConfiguration) -> Event | None:
    """Earliest crossing of adjacent fronts after the configuration time.

    Crossings within ``SIMULTANEOUS_TOL`` of the earliest one that chain
    through shared fronts are returned as one event.
    """
    fronts = config.fronts
    times = []
    for i in range(len(fronts) - 1):
        key = (id(fronts[i]), id(fronts[i + 1]))
        if key not in config._pair_cache:
            config._pair_cache[key] = _crossing(fronts[i], fronts[i + 1], config.time, config.horizon)
        times.append(config._pair_cache[key])
    if not times or min(times) == math.inf:
        return None
    T = min(times)
    first = times.index(T)
    lo = hi = first
    while lo > 0 and times[lo - 1] - T <= SIMULTANEOUS_TOL:
        lo -= 1
    while hi + 1 < len(times) and times[hi + 1] - T <= SIMULTANEOUS_TOL:
        hi += 1
    participants = tuple(range(lo, hi + 2))
    X = float(np.mean([fronts[i].position(T) for i in participants]))
    return Event(float(T), X, participants)


def resolve_interaction(config: FrontConfiguration, event: Event) -> FrontConfiguration:
    """Replace the colliding fronts by one delta front born from their combined mass."""
    T, X = event.T, event.X
    idx = list(event.participants)
    i, j = idx[0], idx[-1]
    if j >= len(config.fronts) or idx != list(range(i, j + 1)) or len(idx) < 2:
        raise InvalidParameter("event participants must be consecutive fronts of this configuration")
    if T < config.time:
        raise InvalidParameter("event precedes the configuration time")
    ncomp = config.ncomp
    parts = [config.fronts[k].mass_parts(T, ncomp) for k in idx]
    mbar = tuple(float(sum(p[c] for p in parts)) for c in range(ncomp))
    total = sum(mbar)
    momentum = sum(config.fronts[k].momentum(T) for k in idx)
    if not total > 0:
        raise NonOvercompressiveMerge(f"merged mass {total:g} is not positive")
    ubar = momentum / total
    left, right = config.regions[i], config.regions[j + 1]
    ul, ur = left.orbit_right(T), right.orbit_left(T)
    slack = _MERGE_TOL * (1.0 + abs(ul) + abs(ur))
    if not (ul - ubar > -slack and ubar - ur > -slack):
        raise NonOvercompressiveMerge(f"merged velocity {ubar:.12g} not inside ({ur:.12g}, {ul:.12g}) at t={T:g}")
    # boundary ties within tolerance are pushed just inside the admissible interval
    ubar = min(max(ubar, ur + 0.5 * slack), ul - 0.5 * slack) if ul - ur > slack else 0.5 * (ul + ur)

    cls = DeltaFront3 if ncomp == 2 else DeltaFront
    payload = cls(
        config.flux, config.coefficients, left.orbit_right, right.orbit_left, left.masses, right.masses,
        config.horizon, x0=X, t0=T, mbar=mbar, ubar=ubar,
    )
    merged = Front("Delta3" if ncomp == 2 else "Delta", payload)
    flags = []
    if any(config.regions[k].vacuum for k in range(i + 1, j + 1)):
        flags.append("vacuum_far_edge")
    config.event_log.append({
        "T": T, "X": X, "participants": tuple(idx), "mbar": mbar, "ubar": ubar, "flags": flags,
    })
    new = FrontConfiguration(
        T,
        config.regions[: i + 1] + config.regions[j + 1:],
        config.fronts[:i] + [merged] + config.fronts[j + 1:],
        config.flux, config.coefficients, config.horizon, config.box,
        event_log=config.event_log, event_budget=config.event_budget,
    )
    new._pair_cache = {k: v for k, v in config._pair_cache.items()}
    return new


@dataclass
class Trajectory:
    """Configurations at the start, after each event, and the horizon."""

    configurations: list
    events: list

    @property
    def final(self) -> FrontConfiguration:
        return self.configurations[-1]

    @property
    def horizon(self) -> float:
        return self.final.valid_until

    def at(self, t: float) -> FrontConfiguration:
        for cfg in self.configurations:
            if cfg.time <= t <= cfg.valid_until:
                # prefer the later configuration at an event instant
                last = cfg
        try:
            return last
        except NameError:
            raise TimeOutOfRange(f"t={t:g} outside [0, {self.horizon:g}]") from None

    def sample(self, t: float, grid):
        return sample(self.at(t), t, grid)

    def front_counts(self):
        return [len(cfg.fronts) for cfg in self.configurations]


def track(config: FrontConfiguration, T: float) -> Trajectory:
    """Run the event loop up to ``T``; the configuration horizon must cover ``T``."""
    if not T > config.time:
        raise InvalidParameter("track needs T beyond the configuration time")
    if T > config.horizon + 1e-12:
        raise InvalidParameter(f"T={T:g} exceeds the horizon {config.horizon:g} the fronts were built for")
    limit = None if config.event_budget is None else 10 * config.event_budget
    configs, events = [config], []
    cfg = config
    while True:
        ev = next_interaction(cfg)
        if ev is None or ev.T > T:
            cfg.valid_until = T
            break
        cfg.valid_until = ev.T
        events.append(ev)
        if limit is not None and len(events) > limit:
            raise EventBudgetExceeded(f"more than {limit} interactions before t={T:g}")
        cfg = resolve_interaction(cfg, ev)
        configs.append(cfg)
    return Trajectory(configs, events)


def all_overcompressive(config: FrontConfiguration, t: float, tol: float = 1e-9) -> bool:
    return all(overcompressive_at(fr.payload, t, tol) for fr in config.delta_fronts() if fr.payload.alive(t))


# ---------------------------------------------------------------------------
# sampling


@dataclass
class Snapshot:
    t: float
    x: np.ndarray
    u: np.ndarray
    m: np.ndarray
    atoms: list  # (x, xi, chi) per delta front


def _cumulative(config, t):
    """Positions, per-region integrals and running mass at each front (left limit)."""
    pos = config.positions(t)
    lo, hi = config.box_edges(t)
    edges = np.concatenate([[lo], np.clip(pos, lo, hi), [hi]])
    return pos, lo, hi, edges


def sample(config: FrontConfiguration, t: float, grid) -> Snapshot:
    """Velocity, cumulative mass ``m`` (from the left box edge) and atoms at time ``t``.

    ``m`` is left-continuous: an atom sitting exactly on a grid point is not yet counted there.
    """
    config.check_time(t)
    x = np.asarray(grid, dtype=float)
    pos, lo, hi, edges = _cumulative(config, t)
    nreg = len(config.regions)
    owner = np.searchsorted(pos, x, side="right")
    u = np.empty_like(x)
    bounds = np.concatenate([[-np.inf], pos, [np.inf]])
    for k in range(nreg):
        sel = owner == k
        if np.any(sel):
            u[sel] = config.regions[k].velocity(x[sel], t, bounds[k], bounds[k + 1])
    xis = [fr.mass(t) for fr in config.fronts]
    # running mass at the left limit of each front
    running = np.zeros(nreg + 1)
    for k in range(nreg):
        width = max(0.0, edges[k + 1] - edges[k])
        running[k + 1] = running[k] + config.regions[k].density * width
        if k < len(xis) and lo < pos[k] < hi:
            running[k + 1] += xis[k]
    m = np.empty_like(x)
    for k in range(nreg):
        sel = owner == k
        if np.any(sel):
            xc = np.clip(x[sel], edges[k], edges[k + 1])
            m[sel] = running[k] + config.regions[k].density * (xc - edges[k])
    # points exactly on a front: exclude that front's atom
    for k, p in enumerate(pos):
        on = x == p
        if np.any(on) and lo < p < hi:
            m[on] -= xis[k]
    m = np.where(x < lo, 0.0, m)
    atoms = [(float(p), float(xi), float(fr.chi(t))) for p, xi, fr in zip(pos, xis, config.fronts) if fr.is_delta]
    return Snapshot(float(t), x, u, m, atoms)


__all__ = [
    "PartitionSpec", "Region", "Front", "Event", "FrontConfiguration", "Trajectory", "Snapshot",
    "from_pieces", "discretize_initial", "next_interaction", "resolve_interaction", "track", "sample",
    "all_overcompressive", "SIMULTANEOUS_TOL",
]
