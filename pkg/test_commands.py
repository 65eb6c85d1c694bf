import csv
import json
import re

import numpy as np
import pytest

from app import main
from commands import cmd_simulate, cmd_verify, parse_complex, sweep_grid
from contours import EllipseSpec, sample_ellipse
from errors import ScenarioError
from outputs import frame_bounds, write_svg
from presets import load_preset, preset_names
from scenario import Scenario, contour_geometry, ellipse_geometry, load_scenario, scenario_from_dict


def _rows(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def test_presets_validate():
    for name in preset_names():
        assert load_preset(name).name == name


def test_unknown_preset():
    with pytest.raises(ScenarioError):
        load_preset("nope")


def test_verify_confocal_preset(tmp_path):
    assert main(["--out", str(tmp_path), "verify", "--preset", "flierl_polvani"]) == 0
    summary = json.loads((tmp_path / "verify.json").read_text())
    assert summary["omega"] == pytest.approx(0.15)
    assert summary["passed"] is True
    rows = _rows(tmp_path / "residuals.csv")
    assert list(rows[0]) == ["interface", "node_index", "s", "re_z", "im_z", "residual"]
    assert {r["interface"] for r in rows} == {"outer", "inner"}


def test_verify_with_wrong_omega_fails(tmp_path):
    data = load_preset("flierl_polvani").model_dump(mode="json", exclude_none=True)
    data["omega"] = 0.2
    assert cmd_verify(scenario_from_dict(data), str(tmp_path)) == 1


def test_verify_kirchhoff_and_rankine(tmp_path):
    assert main(["--out", str(tmp_path / "k"), "verify", "--preset", "kirchhoff"]) == 0
    assert main(["--out", str(tmp_path / "r"), "verify", "--preset", "rankine"]) == 0


def test_circle_inside_ellipse_fails_verification(tmp_path):
    assert main(["--out", str(tmp_path), "verify", "--preset", "circle_with_ellipse"]) == 1


def test_malformed_scenario_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json", encoding="utf-8")
    assert main(["verify", str(path)]) == 2
    assert main(["verify", str(tmp_path / "missing.json")]) == 2


def test_schema_rejects_zero_dt(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({
        "outer": {"type": "ellipse", "a": 2, "b": 1},
        "numerics": {"dt": 0, "t_end": 1},
    }), encoding="utf-8")
    assert main(["simulate", str(path)]) == 2


def test_schema_rejects_unknown_fields():
    with pytest.raises(ScenarioError):
        scenario_from_dict({"outer": {"type": "ellipse", "a": 2, "b": 1}, "colour": "red"})
    with pytest.raises(ScenarioError):
        scenario_from_dict({"outer": {"type": "samples", "points": [[0, 0]] * 5}})


def test_scenario_round_trip(tmp_path):
    path = tmp_path / "dump.json"
    assert main(["--out", str(tmp_path / "out"), "verify", "--preset", "kirchhoff", "--dump", str(path)]) == 0
    assert load_scenario(path) == load_preset("kirchhoff")


def test_simulate_annulus(tmp_path):
    assert main(["--out", str(tmp_path), "simulate", "--preset", "annulus"]) == 0
    rows = _rows(tmp_path / "diagnostics.csv")
    assert len(rows) == 21
    centroids = np.array([[float(r["re_centroid"]), float(r["im_centroid"])] for r in rows])
    assert np.max(np.abs(centroids - centroids[0])) < 1e-10
    assert all(r["measured_omega"] == "" for r in rows)
    snapshot = json.loads((tmp_path / "simulation.json").read_text())
    assert len(snapshot["states"]) == 21


@pytest.mark.slow
def test_simulate_kirchhoff(tmp_path):
    assert main(["--out", str(tmp_path), "simulate", "--preset", "kirchhoff"]) == 0
    rows = _rows(tmp_path / "diagnostics.csv")
    assert float(rows[-1]["measured_omega"]) == pytest.approx(2 / 9, abs=1e-6)


def test_simulate_with_sparse_saves_leaves_rotation_unmeasured(tmp_path):
    data = load_preset("kirchhoff").model_dump(mode="json", exclude_none=True)
    data["numerics"].update(n=32, dt=0.25, t_end=12.0)
    data["outputs"] = {"formats": ["csv"], "stride": 16}
    assert cmd_simulate(scenario_from_dict(data), str(tmp_path)) == 0
    rows = _rows(tmp_path / "diagnostics.csv")
    assert len(rows) == 4
    assert all(r["measured_omega"] == "" for r in rows)


def test_solve_without_inner_is_invalid(tmp_path):
    assert main(["--out", str(tmp_path), "solve", "--preset", "kirchhoff"]) == 2


def test_solve_with_zero_alpha_does_not_converge(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({
        "inner": {"type": "ellipse", "a": 3, "b": 1},
        "outer": {"type": "ellipse", "a": 4, "b": 2.7},
        "alpha": 0,
    }), encoding="utf-8")
    assert main(["--out", str(tmp_path / "out"), "solve", str(path)]) == 4


@pytest.mark.slow
def test_solve_confocal_preset(tmp_path):
    assert main(["--out", str(tmp_path), "solve", "--preset", "flierl_polvani_solve"]) == 0
    solution = json.loads((tmp_path / "solution.json").read_text())
    assert solution["omega"] == pytest.approx(0.15, abs=1e-8)
    assert solution["report"]["converged"] is True


def test_transform_ellipse(capsys):
    assert main(["transform", "--shape", "ellipse", "--a", "2", "--b", "1", "--at", "3"]) == 0
    out = capsys.readouterr().out
    assert "0.73402" in out
    assert "outside" in out


def test_transform_disc_csv(tmp_path):
    path = tmp_path / "t.csv"
    assert main(["transform", "--shape", "disc", "--r", "1", "--at", "2", "--at", "0.5j", "--csv", str(path)]) == 0
    rows = _rows(path)
    assert float(rows[0]["re_value"]) == pytest.approx(0.5)
    assert rows[1]["side"] == "inside"
    assert float(rows[1]["im_value"]) == pytest.approx(-0.5)


def test_transform_on_focal_segment():
    assert main(["transform", "--shape", "ellipse", "--a", "2", "--b", "1", "--at", "1"]) == 3


def test_transform_parse_errors():
    assert main(["transform", "--shape", "disc", "--r", "1", "--at", "two"]) == 2
    assert main(["transform", "--shape", "disc", "--at", "2"]) == 2
    assert main(["transform", "--shape", "square", "--at", "2"]) == 2


def test_parse_complex():
    assert parse_complex("1+2i") == 1 + 2j
    assert parse_complex(" 3 ") == 3
    with pytest.raises(ScenarioError):
        parse_complex("x")


def test_sweep_grid_is_admissible():
    for q2, alpha in sweep_grid(3, 4):
        assert 0 < q2 < 1
        assert -q2 ** 2 / (1 - q2 ** 2) < alpha < 0


def test_sweep(tmp_path):
    assert main(["--out", str(tmp_path), "sweep", "--q2-count", "2", "--alpha-count", "2", "--n", "64"]) == 0
    rows = _rows(tmp_path / "sweep.csv")
    assert len(rows) == 4
    assert all(r["passed"] == "true" for r in rows)


def test_verify_sampled_geometry(tmp_path):
    spec = EllipseSpec(2.0, 1.0, 0j, 0.3)
    sampled = Scenario(outer=contour_geometry(sample_ellipse(spec, 128)), omega=2 / 9)
    assert cmd_verify(sampled, str(tmp_path / "s")) == 0
    analytic = Scenario(outer=ellipse_geometry(spec))
    assert analytic.outer_spec() == spec
    assert cmd_verify(analytic, str(tmp_path / "a")) == 0


def _svg_points(path):
    text = path.read_text(encoding="utf-8")
    coords = re.search(r'points="([^"]+)"', text).group(1).split()
    return np.array([complex(*map(float, p.split(","))) for p in coords])


def test_svg_frames_share_viewport(tmp_path):
    small = sample_ellipse(EllipseSpec(1.0, 1.0), 32)
    large = sample_ellipse(EllipseSpec(3.0, 3.0), 32)
    bounds = frame_bounds([[small], [large]])
    write_svg(tmp_path / "a.svg", [small], "t = 0", bounds)
    write_svg(tmp_path / "b.svg", [large], "t = 1", bounds)
    a, b = _svg_points(tmp_path / "a.svg"), _svg_points(tmp_path / "b.svg")
    assert np.ptp(b.real) == pytest.approx(3 * np.ptp(a.real), rel=1e-3)
    assert np.mean(a[:-1]) == pytest.approx(300 + 300j, abs=1e-2)
    # без общего окна каждый кадр растягивается на весь холст
    write_svg(tmp_path / "c.svg", [small])
    assert np.ptp(_svg_points(tmp_path / "c.svg").real) == pytest.approx(np.ptp(b.real), rel=1e-3)


def test_svg_title_is_escaped(tmp_path):
    path = write_svg(tmp_path / "t.svg", [sample_ellipse(EllipseSpec(1.0, 1.0), 16)], "a < b & c")
    text = path.read_text(encoding="utf-8")
    assert "<title>a &lt; b &amp; c</title>" in text
