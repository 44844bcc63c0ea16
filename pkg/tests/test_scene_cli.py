import hashlib
import json
import os

import numpy as np
import pytest

from thedra.cli import main
from thedra.scene import Scene, SceneError, load_scene

SCENE = {
    "version": 1,
    "cross_sections": {
        "rhombus": {"kind": "discrete",
                    "vertices": [[0, 0], [1, -1], [2, 0], [1, 1]]},
        "triangle": {"kind": "discrete", "vertices": [[0, 0], [1, 2], [2, 0]]},
        "kite": {"kind": "generated", "shape": "deltoid",
                 "params": {"half_width": 1.0, "lower_slope_deg": 63.434948822922,
                            "upper_slope_deg": 45.0}},
        "oval": {"kind": "smooth", "segments": [
            {"tag": "arc", "center": [-0.9396926207859084, -0.3420201433256687],
             "radius": 1.0, "ang0_deg": 20.0, "ang1_deg": 70.0},
            {"tag": "arc", "center": [np.float64(0.3420201433256689), np.float64(0.9396926207859082)],
             "radius": 1.0, "ang0_deg": 200.0, "ang1_deg": 250.0}]},
    },
    "trajectories": {
        "zig": {"type": "I",
                "points": [[0, 0], [1, 1], [2, 0], [3, 1], [4, 0]]},
        "rot": {"type": "II", "axis_x": -2.0,
                "angles_deg": [20, 20, 20], "factors": [1.0, 1.0, 1.0]},
        "ring": {"type": "I", "points": [[0, 0], [1, 1], [2, 0], [1, -1]],
                 "closed": True},
    },
    "tubes": {
        "miura": {"profile": "rhombus", "trajectory": "zig", "type": "I"},
        "rotor": {"profile": "rhombus", "trajectory": "rot", "type": "II"},
        "torus": {"profile": "rhombus", "trajectory": "ring",
                  "closed_trajectory": True},
        "soft": {"profile": "oval", "trajectory": "zig", "profile_density": 12},
    },
    "assemblies": {
        "zip": {"kind": "translational_zipper", "profile": "rhombus", "edge": 0,
                "trajectory": "zig",
                "partners": [{"profile": "rhombus", "edge": 2, "angle_deg": 90}]},
    },
    "sweeps": [{"target": "miura", "frames": 3, "output": "miura"}],
}


@pytest.fixture
def scene_path(tmp_path):
    p = tmp_path / "scene.json"
    p.write_text(json.dumps(SCENE))
    return str(p)


def test_scene_builds_everything(scene_path):
    scene = Scene.from_file(scene_path)
    assert scene.tube("miura").shape == (5, 4)
    assert scene.tube("rotor").ttype == "II"
    assert scene.tube("torus").closed_i
    assert scene.tube("soft").dense_axis == "profile"
    asm = scene.assembly("zip")
    assert len(asm.partners) == 1


def test_scene_schema_rejects_garbage(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"version": 2}))
    with pytest.raises(SceneError):
        load_scene(str(p))


def test_unresolved_reference(scene_path):
    scene = Scene.from_file(scene_path)
    with pytest.raises(SceneError):
        scene.tube("nope")


def test_cli_validate_exit_codes(scene_path, capsys):
    assert main(["validate", scene_path, "rhombus"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["valid"] is True
    assert main(["validate", scene_path, "triangle"]) == 2
    out = json.loads(capsys.readouterr().out)
    assert out["valid"] is False
    assert out["offending_classes"]
    assert main(["validate", scene_path, "oval"]) == 0


def test_cli_validate_malformed_json(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{nope")
    assert main(["validate", str(p), "x"]) == 1


def test_cli_limits_and_fold(scene_path, capsys, tmp_path):
    assert main(["limits", scene_path, "miura"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["t_max"] == pytest.approx(np.sqrt(2), abs=1e-12)
    assert doc["limit_max"][0] == "row-horizontal"
    obj = tmp_path / "f.obj"
    assert main(["fold", scene_path, "miura", "--t", "1.2", "--out", str(obj)]) == 0
    assert obj.exists()
    # beyond the range: clean error
    assert main(["fold", scene_path, "miura", "--t", "3.0"]) == 1


def test_cli_sweep_obj_deterministic(scene_path, tmp_path):
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    assert main(["sweep", scene_path, "miura", "--frames", "3",
                 "--out", out1]) == 0
    assert main(["sweep", scene_path, "miura", "--frames", "3",
                 "--out", out2]) == 0

    def digest(d):
        h = hashlib.sha256()
        for name in sorted(os.listdir(d)):
            h.update(name.encode())
            with open(os.path.join(d, name), "rb") as f:
                h.update(f.read())
        return h.hexdigest()

    assert digest(out1) == digest(out2)
    names = sorted(os.listdir(out1))
    assert "miura_0000.obj" in names and "miura_frames.json" in names


def test_cli_sweep_endpoint_frames_flagged(scene_path, tmp_path):
    out = str(tmp_path / "s")
    assert main(["sweep", scene_path, "miura", "--frames", "3", "--out", out]) == 0
    doc = json.loads(open(os.path.join(out, "miura_frames.json")).read())
    frames = doc["frames"]
    assert len(frames) == 3
    assert frames[0]["flags"]["at_limit"] and frames[2]["flags"]["at_limit"]
    assert not frames[1]["flags"]["at_limit"]
    assert frames[1]["t"] == pytest.approx(
        0.5 * (np.sqrt(2) + np.sqrt(2) / 2), abs=1e-12)


def test_cli_sweep_torus_closure(scene_path, tmp_path):
    out = str(tmp_path / "torus")
    assert main(["sweep", scene_path, "torus", "--frames", "5", "--out", out]) == 0
    doc = json.loads(open(os.path.join(out, "torus_frames.json")).read())
    for fr in doc["frames"]:
        assert fr["residuals"]["closure_gap"] <= 1e-9
        assert fr["residuals"]["closure_gap_trajectory"] <= 1e-9


def test_cli_sweep_report_csv_and_plot(scene_path, tmp_path):
    out = str(tmp_path / "rep")
    assert main(["sweep", scene_path, "miura", "--frames", "2", "--out", out,
                 "--plot"]) == 0
    names = os.listdir(out)
    assert any(n.endswith("_residuals.csv") for n in names)
    assert any(n.endswith(".png") for n in names)


def test_cli_sweep_single_frame_rejected(scene_path):
    assert main(["sweep", scene_path, "miura", "--frames", "1"]) == 1


def test_cli_zipper_sweep(scene_path, tmp_path):
    out = str(tmp_path / "zip")
    assert main(["sweep", scene_path, "zip", "--frames", "3", "--out", out]) == 0
    names = sorted(os.listdir(out))
    assert "zip_0000_tube0.obj" in names and "zip_0000_tube1.obj" in names


def test_frames_json_roundtrip_vertices(scene_path, tmp_path):
    # scene -> build -> export -> re-import: vertex grids equal within eps
    out = str(tmp_path / "rt")
    assert main(["sweep", scene_path, "miura", "--frames", "3", "--out", out]) == 0
    doc = json.loads(open(os.path.join(out, "miura_frames.json")).read())
    scene = Scene.from_file(scene_path)
    tube = scene.tube("miura")
    from thedra.fold import fold, fold_range
    fr = fold_range(tube)
    for k, t in enumerate(np.linspace(fr.t_min, fr.t_max, 3)):
        got = np.asarray(doc["frames"][k]["vertices"]).reshape(tube.grid.shape)
        want = fold(tube, float(t)).grid
        assert np.max(np.abs(got - want)) <= 1e-9
