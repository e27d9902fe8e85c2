import csv
import json
from pathlib import Path

import numpy as np
import pytest

from sdwave import cli
from sdwave.errors import EventBudgetExceeded, IncompatibleScenario

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def load(name):
    return json.loads((SCENARIOS / name).read_text())


def write(tmp_path, data, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_triple_state_outputs(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["run", str(SCENARIOS / "triple_state.json"), "--out-dir", str(out), "--quiet"]) == 0
    ev = rows(out / "events.csv")
    assert ev[0] == ["T", "X", "participants"] and len(ev) == 2
    assert float(ev[1][0]) == pytest.approx(0.5, abs=1e-9)
    assert float(ev[1][1]) == pytest.approx(0.5, abs=1e-9)
    assert ev[1][2] == "[0,1]"
    atoms = rows(out / "atoms.csv")
    last = [list(map(float, r)) for r in atoms[1:] if float(r[0]) == 1.0]
    assert last == [pytest.approx([1.0, 0.5, 4.0, 0.0], abs=1e-8)]
    diag = rows(out / "diagnostics.csv")
    assert diag[0] == ["t", "M0", "M1", "entropy_residual_max", "oleinik_violation"]
    assert all(r[4] == "nan" for r in diag[1:])
    assert (out / "plot.gp").read_text().count("snapshots.csv") >= 2
    raw = (out / "snapshots.csv").read_bytes()
    assert b"\r\n" not in raw


def test_gvp_constant_row(tmp_path):
    out = tmp_path / "g"
    assert cli.main(["run", str(SCENARIOS / "gvp_constant.json"), "--out-dir", str(out), "--quiet"]) == 0
    snap = np.array([list(map(float, r)) for r in rows(out / "snapshots.csv")[1:]])
    row = snap[(snap[:, 0] == 1.0) & (snap[:, 1] == 1.0)][0]
    assert row[2:] == pytest.approx([0.3, 0.8], abs=1e-10)
    assert rows(out / "atoms.csv") == [["t", "x", "xi", "chi"]]


def test_constant_fronts_linear_mass(tmp_path):
    out = tmp_path / "c"
    assert cli.main(["run", str(SCENARIOS / "constant_fronts.json"), "--out-dir", str(out), "--quiet"]) == 0
    snap = np.array([list(map(float, r)) for r in rows(out / "snapshots.csv")[1:]])
    at0 = snap[snap[:, 0] == 0.0]
    assert np.allclose(np.diff(at0[:, 3]) / np.diff(at0[:, 1]), 1.0)
    assert rows(out / "atoms.csv") == [["t", "x", "xi", "chi"]]


def test_drift_flux_columns(tmp_path):
    out = tmp_path / "d"
    assert cli.main(["run", str(SCENARIOS / "drift_flux.json"), "--out-dir", str(out), "--quiet"]) == 0
    atoms = rows(out / "atoms.csv")
    assert atoms[0] == ["t", "x", "xi", "chi", "xi_v", "xi_w"]
    t, x, xi, chi, xv, xw = map(float, atoms[-1])
    assert (xv, xw) == pytest.approx((2.0, 4.0), abs=1e-10) and xi == pytest.approx(6.0, abs=1e-10)


def test_outputs_deterministic(tmp_path):
    for name in ("a", "b"):
        cli.main(["run", str(SCENARIOS / "sampled_fronts.json"), "--out-dir", str(tmp_path / name), "--quiet"])
    for f in ("snapshots.csv", "atoms.csv", "events.csv", "diagnostics.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_env_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("SDW_OUT_DIR", str(tmp_path / "env"))
    assert cli.main(["run", str(SCENARIOS / "constant_fronts.json"), "--quiet"]) == 0
    assert (tmp_path / "env" / "snapshots.csv").exists()


@pytest.mark.parametrize("name", sorted(p.name for p in SCENARIOS.glob("*.json")))
def test_round_trip(name):
    sc = cli.Scenario.from_dict(load(name))
    again = cli.Scenario.from_dict(json.loads(json.dumps(sc.to_dict())))
    assert again == sc and again.to_dict() == sc.to_dict()


def test_check_reports_json_position(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"model": {,}')
    assert cli.main(["check", str(p)]) == 2
    assert "line 1 column" in capsys.readouterr().err


@pytest.mark.parametrize("mutate,where", [
    (lambda d: d["initial"]["pieces"][1].update(x=-1), "initial.pieces[1].x"),
    (lambda d: d["initial"]["pieces"][0].update(v=-1), "initial.pieces[0].v"),
    (lambda d: d["model"]["kappa"].update(kind="cubic"), "model.kappa.kind"),
    (lambda d: d.pop("horizon"), "horizon"),
    (lambda d: d.update(domain=[1, 0]), "domain"),
    (lambda d: d["solver"].update(method="gvp", gvp={"upkappa": 1}), "model"),
])
def test_validation_paths(tmp_path, capsys, mutate, where):
    data = load("triple_state.json")
    mutate(data)
    assert cli.main(["check", str(write(tmp_path, data))]) == 2
    assert where in capsys.readouterr().err


def test_front_leaving_domain_is_invalid(tmp_path):
    data = load("triple_state.json")
    data["domain"] = [-0.5, 1.2]
    assert cli.main(["run", str(write(tmp_path, data)), "--out-dir", str(tmp_path / "o"), "--quiet"]) == 2


def test_solver_error_exit_flushes_events(tmp_path, monkeypatch):
    def boom(cfg, T):
        cfg.event_log.append({"T": 0.25, "X": 0.0, "participants": (0, 1)})
        raise EventBudgetExceeded("too many interactions")

    monkeypatch.setattr(cli.fronts, "track", boom)
    out = tmp_path / "o"
    assert cli.main(["run", str(SCENARIOS / "triple_state.json"), "--out-dir", str(out), "--quiet"]) == 3
    assert rows(out / "events.csv")[1] == ["0.25", "0", "[0,1]"]


def test_compare_pressureless(tmp_path, capsys):
    assert cli.main(["compare", str(SCENARIOS / "compare_pressureless.json"), "--out-dir", str(tmp_path)]) == 0
    worst = float(capsys.readouterr().out.split(":")[1])
    assert worst <= 1e-2
    assert rows(tmp_path / "compare.csv")[0] == ["quantity", "x", "abs_diff", "near_shock"]


@pytest.mark.parametrize("half_width", [1.0, 2.0])
def test_compare_identical_constant_data(tmp_path, capsys, half_width):
    data = load("compare_pressureless.json")
    data["initial"] = {"left": {"v": 1, "u": 0}, "pieces": [{"x": 0, "v": 1, "u": 0}]}
    data["domain"] = [-half_width, half_width]
    assert cli.main(["compare", str(write(tmp_path, data)), "--out-dir", str(tmp_path)]) == 0
    worst = float(capsys.readouterr().out.split(":")[1])
    # the variational solution keeps the free-flow drift x t (t + 2k) / (s (s^2 + k^2)) of order x t / k^2
    k, t = 1e4, 1.0
    s = t + k
    assert worst == pytest.approx(half_width * t * (t + 2 * k) / (s * (s * s + k * k)), rel=1e-4)
    if half_width <= 1.0:
        assert worst <= 1e-8


def test_compare_shock_ode_within_two_cells(tmp_path, capsys):
    assert cli.main(["compare", str(SCENARIOS / "compare_algebraic.json"), "--out-dir", str(tmp_path)]) == 0
    assert float(capsys.readouterr().out.split(":")[1]) <= 2.0


def test_compare_incompatible(tmp_path):
    data = load("triple_state.json")
    data["model"]["kappa"] = {"kind": "constant", "value": 1.0}
    data["solver"] = {"method": "both", "gvp": {"upkappa": 1.0}}
    sc = cli.Scenario.from_dict(data)
    with pytest.raises(IncompatibleScenario):
        cli.compare(sc, tmp_path, None)
