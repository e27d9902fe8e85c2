"""Command line driver: ``sdwave run|compare|check scenario.json``.

Exit status 0 on success, 2 when the scenario fails validation and 3 when a
solver gives up (the event log is written first).
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import fronts, gvp
from .conservation import total_mass, total_momentum
from .entropy_diagnostics import dissipativity_residual
from .errors import IncompatibleScenario, InsufficientSamples, SolverError, ValidationError
from .model import CoefficientSpec, builtin_flux
from .numerics import ToleranceProfile

log = logging.getLogger("sdwave")

EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 2, 3


class ScenarioError(ValidationError):
    """Validation failure tied to a field path such as ``initial.pieces[1].v``."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


# ---------------------------------------------------------------------------
# scenario


def _num(obj, key, where, default=None, positive=False, nonneg=False):
    if key not in obj:
        if default is None:
            raise ScenarioError(f"{where}.{key}", "required")
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise ScenarioError(f"{where}.{key}", f"expected a finite number, got {val!r}")
    if positive and not val > 0:
        raise ScenarioError(f"{where}.{key}", "must be positive")
    if nonneg and val < 0:
        raise ScenarioError(f"{where}.{key}", "must be nonnegative")
    return float(val)


@dataclass
class Scenario:
    model: dict
    initial: dict
    solver: dict
    horizon: float
    domain: tuple
    output: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict) -> "Scenario":
        if not isinstance(raw, dict):
            raise ScenarioError("<root>", "expected a JSON object")
        for key in ("model", "initial", "solver", "horizon", "domain"):
            if key not in raw:
                raise ScenarioError(key, "required")
        sc = cls(
            model=copy.deepcopy(raw["model"]),
            initial=copy.deepcopy(raw["initial"]),
            solver=copy.deepcopy(raw["solver"]),
            horizon=_num(raw, "horizon", "<root>", positive=True),
            domain=tuple(raw["domain"]) if isinstance(raw["domain"], list) else raw["domain"],
            output=copy.deepcopy(raw.get("output", {})),
        )
        sc.validate()
        return sc

    def to_dict(self) -> dict:
        return {
            "model": copy.deepcopy(self.model),
            "initial": copy.deepcopy(self.initial),
            "solver": copy.deepcopy(self.solver),
            "horizon": self.horizon,
            "domain": list(self.domain),
            "output": copy.deepcopy(self.output),
        }

    # validation ------------------------------------------------------------
    def validate(self):
        if not (isinstance(self.domain, tuple) and len(self.domain) == 2):
            raise ScenarioError("domain", "expected [lo, hi]")
        lo = _num({"lo": self.domain[0]}, "lo", "domain")
        hi = _num({"hi": self.domain[1]}, "hi", "domain")
        if not lo < hi:
            raise ScenarioError("domain", "lo must be below hi")
        self._validate_model()
        self._validate_initial()
        self._validate_solver()

    def _validate_model(self):
        m = self.model
        if not isinstance(m, dict):
            raise ScenarioError("model", "expected an object")
        fl = m.get("flux", {"name": "identity"})
        if not isinstance(fl, dict) or "name" not in fl:
            raise ScenarioError("model.flux", "expected {name, params}")
        try:
            builtin_flux(fl["name"], **fl.get("params", {}))
        except ValidationError as exc:
            raise ScenarioError("model.flux", str(exc)) from None
        kap = m.get("kappa", {"kind": "zero"})
        kind = kap.get("kind")
        if kind not in ("zero", "constant", "algebraic"):
            raise ScenarioError("model.kappa.kind", f"expected zero|constant|algebraic, got {kind!r}")
        if kind == "constant":
            _num(kap, "value", "model.kappa")
        if kind == "algebraic":
            _num(kap, "upkappa", "model.kappa", positive=True)
        ua = m.get("ua", {"kind": "zero"})
        if ua.get("kind") not in ("zero", "constant", "algebraic"):
            raise ScenarioError("model.ua.kind", f"expected zero|constant|algebraic, got {ua.get('kind')!r}")
        if ua.get("kind") == "constant":
            _num(ua, "value", "model.ua")
        if ua.get("kind") == "algebraic" and kind != "algebraic":
            raise ScenarioError("model.ua", "an algebraic air velocity needs algebraic kappa")

    def _validate_initial(self):
        ini = self.initial
        if not isinstance(ini, dict):
            raise ScenarioError("initial", "expected an object")
        two = bool(ini.get("two_phase", False))
        if "pieces" in ini:
            if "left" not in ini:
                raise ScenarioError("initial.left", "required with pieces")
            self._state(ini["left"], "initial.left", two)
            prev = -math.inf
            for i, p in enumerate(ini["pieces"]):
                where = f"initial.pieces[{i}]"
                x = _num(p, "x", where)
                if not x > prev:
                    raise ScenarioError(f"{where}.x", "breaks must be strictly increasing")
                prev = x
                self._state(p, where, two)
        elif "sampled" in ini:
            s = ini["sampled"]
            keys = ("x", "v", "u") + (("w",) if two else ())
            for key in keys:
                if key not in s or not isinstance(s[key], list):
                    raise ScenarioError(f"initial.sampled.{key}", "required list")
            n = len(s["x"])
            if n < 2 or any(len(s[k]) != n for k in keys):
                raise ScenarioError("initial.sampled", "arrays need equal length >= 2")
            if np.any(np.diff(np.asarray(s["x"], dtype=float)) <= 0):
                raise ScenarioError("initial.sampled.x", "must be strictly increasing")
            for key in ("v", "w") if two else ("v",):
                if np.any(np.asarray(s[key], dtype=float) < 0):
                    raise ScenarioError(f"initial.sampled.{key}", "must be nonnegative")
        else:
            raise ScenarioError("initial", "needs pieces (with left) or sampled")

    @staticmethod
    def _state(obj, where, two):
        _num(obj, "v", where, nonneg=True)
        _num(obj, "u", where)
        if two:
            _num(obj, "w", where, nonneg=True)

    def _validate_solver(self):
        s = self.solver
        method = s.get("method")
        if method not in ("fronts", "gvp", "both"):
            raise ScenarioError("solver.method", f"expected fronts|gvp|both, got {method!r}")
        if method in ("fronts", "both") and "sampled" in self.initial:
            fr = s.get("fronts")
            if not isinstance(fr, dict):
                raise ScenarioError("solver.fronts", "sampled data need a partition block")
            _num(fr, "eps", "solver.fronts", positive=True)
            a = _num(fr, "alpha", "solver.fronts", default=0.5)
            if not 0 < a < 1:
                raise ScenarioError("solver.fronts.alpha", "must lie in (0, 1)")
        if method in ("gvp", "both"):
            g = s.get("gvp", {})
            _num(g, "upkappa", "solver.gvp", positive=True)
            if self.initial.get("two_phase"):
                raise ScenarioError("solver.gvp", "the variational solver handles the single-phase system only")
            if method == "gvp":
                self._check_gvp_regime()
            if np.any(self._gvp_v() <= 0):
                raise ScenarioError("initial", "the variational solver needs v > 0 everywhere")

    def _check_gvp_regime(self):
        m = self.model
        if m.get("flux", {"name": "identity"})["name"] not in ("identity",) and not (
            m["flux"]["name"] == "odd_power" and m["flux"].get("params", {}).get("k", 3) == 1
        ):
            raise ScenarioError("model.flux", "the variational solver needs the identity flux")
        if m.get("kappa", {}).get("kind") != "algebraic" or m.get("ua", {}).get("kind") != "algebraic":
            raise ScenarioError("model", "the variational solver needs algebraic kappa and air velocity")
        if abs(m["kappa"]["upkappa"] - self.solver["gvp"]["upkappa"]) > 0:
            raise ScenarioError("solver.gvp.upkappa", "must equal model.kappa.upkappa")

    def _gvp_v(self):
        ini = self.initial
        if "pieces" in ini:
            return np.array([ini["left"]["v"]] + [p["v"] for p in ini["pieces"]], dtype=float)
        return np.asarray(ini["sampled"]["v"], dtype=float)

    # model objects -----------------------------------------------------------
    @property
    def two_phase(self) -> bool:
        return bool(self.initial.get("two_phase", False))

    def flux(self):
        fl = self.model.get("flux", {"name": "identity"})
        return builtin_flux(fl["name"], **fl.get("params", {}))

    def coefficients(self) -> CoefficientSpec:
        kap = self.model.get("kappa", {"kind": "zero"})
        ua = self.model.get("ua", {"kind": "zero"})
        a = float(ua.get("value", 0.0)) if ua.get("kind") == "constant" else 0.0
        if kap["kind"] == "zero":
            return CoefficientSpec.zero(a)
        if kap["kind"] == "constant":
            return CoefficientSpec.constant(kap["value"], a)
        if ua.get("kind") == "algebraic":
            raise IncompatibleScenario("an air velocity depending on x is only available to the variational solver")
        return CoefficientSpec.algebraic(kap["upkappa"], a)

    def output_times(self):
        times = self.output.get("times", [self.horizon])
        return [float(t) for t in times if 0 <= t <= self.horizon]

    def output_grid(self):
        n = int(self.output.get("grid", 201))
        return np.linspace(self.domain[0], self.domain[1], n)


def load_scenario(path) -> Scenario:
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    return Scenario.from_dict(raw)


# ---------------------------------------------------------------------------
# solving


def _state_tuple(obj, two):
    masses = (obj["v"], obj["w"]) if two else obj["v"]
    return masses, obj["u"]


def build_fronts(sc: Scenario) -> fronts.FrontConfiguration:
    flux, coeff, two = sc.flux(), sc.coefficients(), sc.two_phase
    ini = sc.initial
    if "pieces" in ini:
        states = [_state_tuple(ini["left"], two)] + [_state_tuple(p, two) for p in ini["pieces"]]
        breaks = [p["x"] for p in ini["pieces"]]
        return fronts.from_pieces(states, breaks, flux, coeff, sc.horizon, sc.domain)
    s = ini["sampled"]
    xs = np.asarray(s["x"], dtype=float)
    cols = {k: np.asarray(s[k], dtype=float) for k in ("v", "u", "w") if k in s}

    def sampler(x):
        vals = {k: float(np.interp(x, xs, col)) for k, col in cols.items()}
        return ((vals["v"], vals["w"]) if two else vals["v"]), vals["u"]

    fr = sc.solver["fronts"]
    rho_exp = fr.get("rho", {}).get("exponent")
    rho = (lambda e, p=float(rho_exp): e**p) if rho_exp is not None else None
    spec = fronts.PartitionSpec(
        R=float(xs[0]), eps=float(fr["eps"]), alpha=float(fr.get("alpha", 0.5)),
        C1=float(fr.get("C1", 1.0)), C2=float(fr.get("C2", 1.0)), rho=rho,
    )
    return fronts.discretize_initial(sampler(xs[0]), sampler, spec, float(xs[-1] - xs[0]), flux, coeff,
                                     sc.horizon, box=sc.domain)


def build_gvp(sc: Scenario) -> gvp.GvpField:
    ini = sc.initial
    g = sc.solver["gvp"]
    k = float(g["upkappa"])
    if "pieces" in ini:
        breaks = [p["x"] for p in ini["pieces"]]
        v0 = gvp.piecewise_constant(breaks, [ini["left"]["v"]] + [p["v"] for p in ini["pieces"]])
        u0 = gvp.piecewise_constant(breaks, [ini["left"]["u"]] + [p["u"] for p in ini["pieces"]])
        ub = max(abs(ini["left"]["u"]), *(abs(p["u"]) for p in ini["pieces"])) if ini["pieces"] else abs(ini["left"]["u"])
    else:
        s = ini["sampled"]
        xs = np.asarray(s["x"], dtype=float)
        vs, us = np.asarray(s["v"], dtype=float), np.asarray(s["u"], dtype=float)
        v0 = lambda e: np.interp(e, xs, vs)  # noqa: E731
        u0 = lambda e: np.interp(e, xs, us)  # noqa: E731
        breaks = list(xs)
        ub = float(np.max(np.abs(us)))
    support = gvp.support_for(sc.domain, ub, sc.horizon, k)
    return gvp.GvpField(v0, u0, k, support, int(g.get("cells", 4096)), breaks=breaks)


# ---------------------------------------------------------------------------
# output


def _fmt(x):
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


class _Writer:
    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        out_dir.mkdir(parents=True, exist_ok=True)

    def write(self, name, header, rows):
        with open(self.out_dir / name, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])


def _plot_script(prefix: str, times) -> str:
    lines = [
        "# gnuplot script for the CSV files next to it",
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set multiplot layout 2,1",
        "set xlabel 'x'",
        "set ylabel 'u'",
        "plot " + ", ".join(
            f"'{prefix}snapshots.csv' using ($1=={t!r} ? $2 : 1/0):3 with lines title 't={t:g}'" for t in times
        ),
        "set ylabel 'm'",
        "plot " + ", ".join(
            f"'{prefix}snapshots.csv' using ($1=={t!r} ? $2 : 1/0):4 with lines title 't={t:g}'" for t in times
        ),
        "unset multiplot",
        "",
    ]
    return "\n".join(lines)


def _entropy_max(cfg, t):
    vals = []
    for fr in cfg.delta_fronts():
        p = fr.payload
        if p.alive(t) and t > p.birth_time:
            try:
                vals.append(dissipativity_residual(p, t))
            except InsufficientSamples:
                pass
    return max(vals) if vals else math.nan


def run_fronts(sc: Scenario, writer: _Writer, tol: ToleranceProfile):
    cfg = build_fronts(sc)
    try:
        traj = fronts.track(cfg, sc.horizon)
    except SolverError:
        _write_events(writer, cfg.event_log)
        raise
    _write_events(writer, cfg.event_log)
    grid = sc.output_grid()
    snaps, atoms, diags = [], [], []
    for t in sc.output_times():
        c = traj.at(t)
        lo, hi = c.box_edges(t)
        pos = c.positions(t)
        if pos.size and (pos.min() <= lo or pos.max() >= hi):
            raise ScenarioError("domain", f"a front left the truncation box by t={t:g}; enlarge the domain")
        snap = fronts.sample(c, t, grid)
        snaps += [(t, x, u, m) for x, u, m in zip(snap.x, snap.u, snap.m)]
        for fr in c.fronts:
            if fr.is_delta:
                row = [t, fr.position(t), fr.mass(t), fr.chi(t)]
                if sc.two_phase:
                    row += list(fr.mass_parts(t, 2))
                atoms.append(row)
        diags.append((t, total_mass(c, t), total_momentum(c, t), _entropy_max(c, t), math.nan))
    writer.write("snapshots.csv", ["t", "x", "u", "m"], snaps)
    writer.write("atoms.csv", ["t", "x", "xi", "chi"] + (["xi_v", "xi_w"] if sc.two_phase else []), atoms)
    writer.write("diagnostics.csv", ["t", "M0", "M1", "entropy_residual_max", "oleinik_violation"], diags)
    return traj


def _write_events(writer, event_log):
    rows = []
    for ev in event_log:
        rows.append((ev["T"], ev["X"], "[" + ",".join(str(i) for i in ev["participants"]) + "]"))
    writer.write("events.csv", ["T", "X", "participants"], rows)


def run_gvp(sc: Scenario, writer: _Writer, tol: ToleranceProfile):
    field_ = build_gvp(sc)
    grid = sc.output_grid()
    snaps, atoms, diags = [], [], []
    for t in sc.output_times():
        if t <= 0:
            continue
        snap = gvp.snapshot(field_, t, grid)
        snaps += [(t, x, u, m) for x, u, m in zip(snap.x, snap.u, snap.m)]
        atoms += [(t, a.x, a.xi, a.chi) for a in snap.atoms]
        q, _, _ = gvp.diagnostics(field_, np.array([grid[0], grid[-1]]), t)
        ole = gvp.oleinik_violation(field_, t, grid)
        diags.append((t, snap.m[-1] - snap.m[0], q[-1] - q[0], math.nan, ole.violation))
    writer.write("snapshots.csv", ["t", "x", "u", "m"], snaps)
    writer.write("atoms.csv", ["t", "x", "xi", "chi"], atoms)
    writer.write("events.csv", ["T", "X", "participants"], [])
    writer.write("diagnostics.csv", ["t", "M0", "M1", "entropy_residual_max", "oleinik_violation"], diags)
    return field_


def run(sc: Scenario, out_dir: Path, tol: ToleranceProfile):
    method = sc.solver["method"]
    if method == "both":
        run_fronts(sc, _Writer(out_dir / "fronts"), tol)
        run_gvp(sc, _Writer(out_dir / "gvp"), tol)
        for sub in ("fronts", "gvp"):
            (out_dir / sub / "plot.gp").write_text(_plot_script("", sc.output_times()), encoding="utf-8")
        return
    writer = _Writer(out_dir)
    (run_fronts if method == "fronts" else run_gvp)(sc, writer, tol)
    (out_dir / "plot.gp").write_text(_plot_script("", sc.output_times()), encoding="utf-8")


def _riemann_pair(sc: Scenario):
    ini = sc.initial
    if "pieces" not in ini or len(ini["pieces"]) != 1:
        return None
    left, right = ini["left"], ini["pieces"][0]
    return (left["v"], left["u"]), (right["v"], right["u"]), right["x"]


def compare(sc: Scenario, out_dir: Path, tol: ToleranceProfile) -> float:
    """Velocity discrepancy between the two solvers, or GVP against the shock ODE."""
    if sc.model.get("flux", {"name": "identity"})["name"] != "identity":
        raise IncompatibleScenario("comparison needs the identity flux")
    if "gvp" not in sc.solver:
        raise IncompatibleScenario("comparison needs a solver.gvp block")
    kind = sc.model.get("kappa", {"kind": "zero"})["kind"]
    writer = _Writer(out_dir)
    field_ = build_gvp(sc)
    T = sc.horizon
    grid = sc.output_grid()
    snap_g = gvp.snapshot(field_, T, grid)
    h = grid[1] - grid[0]
    rows = []
    if kind == "zero":
        traj = fronts.track(build_fronts(sc), T)
        snap_f = fronts.sample(traj.at(T), T, grid)
        shocks = [a[0] for a in snap_f.atoms] + [a.x for a in snap_g.atoms]
        near = np.zeros(grid.size, dtype=bool)
        for xs in shocks:
            near |= np.abs(grid - xs) <= 2 * h
        du = np.abs(snap_f.u - snap_g.u)
        rows += [("u", x, d, int(n)) for x, d, n in zip(grid, du, near)]
        worst = float(np.max(du[~near])) if np.any(~near) else 0.0
        for (xf, _, _), ag in zip(snap_f.atoms, snap_g.atoms):
            rows.append(("atom", xf, abs(xf - ag.x), 0))
    elif kind == "algebraic":
        pair = _riemann_pair(sc)
        if pair is None:
            raise IncompatibleScenario("the shock ODE comparison needs a single Riemann jump")
        left, right, x0 = pair
        if x0 != 0:
            raise IncompatibleScenario("the shock ODE comparison needs the jump at x = 0")
        path = gvp.delta_shock_path(left, right, field_.upkappa, T)
        c, _, _ = path(T)
        if not snap_g.atoms:
            raise IncompatibleScenario("the variational solution has no shock to compare")
        worst = abs(snap_g.atoms[0].x - c) / h
        rows.append(("atom", c, abs(snap_g.atoms[0].x - c), 0))
    else:
        raise IncompatibleScenario("comparison needs kappa zero or algebraic")
    writer.write("compare.csv", ["quantity", "x", "abs_diff", "near_shock"], rows)
    return worst


# ---------------------------------------------------------------------------
# entry point


def _parser():
    p = argparse.ArgumentParser(prog="sdwave", description="Delta-shock solvers for droplet flows.")
    p.add_argument("command", choices=["run", "compare", "check"])
    p.add_argument("scenario")
    p.add_argument("--out-dir", default=None, help="output directory (default: $SDW_OUT_DIR or ./sdwave_out)")
    p.add_argument("--tol-abs", type=float, default=1e-10)
    p.add_argument("--tol-rel", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0, help="recorded in run.json for randomized suites")
    p.add_argument("--quiet", action="store_true")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        tol = ToleranceProfile(args.tol_abs, args.tol_rel)
        sc = load_scenario(args.scenario)
    except (ValidationError, ValueError, OSError) as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.command == "check":
        log.info("scenario OK")
        return EXIT_OK
    root = args.out_dir or os.environ.get("SDW_OUT_DIR") or "sdwave_out"
    out_dir = Path(root)
    try:
        if args.command == "run":
            run(sc, out_dir, tol)
            log.info("wrote results to %s", out_dir)
        else:
            worst = compare(sc, out_dir, tol)
            print(f"max discrepancy: {worst:.6g}")
        manifest = {"scenario": sc.to_dict(), "seed": args.seed, "tol_abs": tol.abs_tol, "tol_rel": tol.rel_tol}
        (out_dir / "run.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except ValidationError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SolverError as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
