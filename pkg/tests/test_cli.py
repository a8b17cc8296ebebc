import json
import textwrap

from rsloc import io as rio
from rsloc.cli import main

SWEEP = """
[run]
mode = sweep
[lidar]
model = vlp16
azimuth_step = 0.4
[sweep]
distance_min = 8
distance_max = 10
distance_step = 2
yaw_step = 90
correction = true
"""

TRAJ = """
[run]
mode = trajectory
[lidar]
model = vlp32c
[trajectory]
range_min = -2
range_max = 2
sample_step = 1
baseline = ndt_reference.csv
[occluder hedge]
x = 15
y = 2
length = 4
width = 0.3
height = 1
"""


def cfg(tmp_path, text):
    p = tmp_path / "run.cfg"
    p.write_text(textwrap.dedent(text))
    return str(p)


def test_sweep_outputs(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["sweep", "--config", cfg(tmp_path, SWEEP), "--out", str(out)]) == 0
    grid = rio.read_grid_csv(out / "grid.csv")
    assert grid.shape == (2, 4)
    for m in ("center_error", "bbox_area_error", "yaw_error", "point_count"):
        assert rio.read_ppm(out / f"{m}.ppm").shape == (2, 4, 3)
    stats = json.loads((out / "summary.json").read_text())
    assert stats["correction_enabled"] is True
    assert json.loads(capsys.readouterr().out) == stats


def test_render_subcommand(tmp_path):
    out = tmp_path / "out"
    main(["sweep", "--config", cfg(tmp_path, SWEEP), "--out", str(out)])
    img = tmp_path / "yaw.ppm"
    assert main(["render", "--grid", str(out / "grid.csv"), "--metric", "yaw_error", "--out", str(img),
                 "--max", "10"]) == 0
    assert rio.read_ppm(img).shape == (2, 4, 3)
    assert main(["render", "--grid", str(out / "grid.csv"), "--metric", "nope", "--out", str(img)]) == 1


def test_trajectory_outputs(tmp_path, capsys):
    out = tmp_path / "t"
    assert main(["trajectory", "--config", cfg(tmp_path, TRAJ), "--out", str(out)]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["failed"] == 0 and info["off_by_90_positions_m"] == []
    assert len(rio.read_trace_csv(out / "trace.csv")) == 5
    assert (out / "summary.csv").exists()
    comparison = (out / "comparison.csv").read_text().splitlines()
    assert len(comparison) == 6 and comparison[1].endswith(",true")


def test_exit_codes(tmp_path, capsys):
    bad = cfg(tmp_path, SWEEP.replace("distance_step = 2", "distance_step = 0"))
    assert main(["sweep", "--config", bad, "--out", str(tmp_path / "x")]) == 1
    assert "sweep.distance_step" in capsys.readouterr().err
    assert main(["sweep", "--config", str(tmp_path / "missing.cfg"), "--out", str(tmp_path)]) == 2
    assert main(["render", "--grid", str(tmp_path / "none.csv"), "--metric", "yaw_error",
                 "--out", str(tmp_path / "a.ppm")]) == 2
    assert main(["trajectory", "--config", cfg(tmp_path, SWEEP), "--out", str(tmp_path)]) == 1
    assert main(["bogus"]) == 1
