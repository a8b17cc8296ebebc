import math
import textwrap

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rsloc import io as rio
from rsloc.config import ConfigError, bundled_config, bundled_file, parse_config
from rsloc.experiments import FIT_FAILED, OK, TOO_FEW_POINTS, CellMetrics, ErrorGrid, TrajectorySample, summarize

MINIMAL = """
[run]
mode = sweep
[lidar]
model = vlp16
[sweep]
distance_min = 3
distance_max = 5
distance_step = 1
yaw_step = 90
"""


def write(tmp_path, text, name="c.cfg"):
    p = tmp_path / name
    p.write_text(textwrap.dedent(text))
    return p


def make_grid(values, statuses=None):
    distances = [5.0, 10.0][: len(values)]
    yaws = [0.0, 90.0][: len(values[0])]
    cells = []
    for i, row in enumerate(values):
        out = []
        for j, v in enumerate(row):
            st_ = statuses[i][j] if statuses else OK
            if st_ == OK:
                out.append(CellMetrics(distances[i], yaws[j], v, v * 2, v / 2, v > 1, 10 + j, OK))
            else:
                out.append(CellMetrics(distances[i], yaws[j], point_count=1, status=st_))
        cells.append(out)
    return ErrorGrid(np.array(distances), np.array(yaws), cells)


def test_bundled_pilot_config():
    cfg = parse_config(bundled_config("pilot_vlp16"))
    s = cfg.sweep
    assert cfg.mode == "sweep" and cfg.trajectory is None
    assert (s.distance_min, s.distance_max, s.distance_step, s.yaw_step) == (3.0, 40.0, 0.5, 2.0)
    assert s.lidar.mount[2] == 2.0 and len(s.lidar.elevation_angles) == 16
    assert not s.correction_enabled
    assert parse_config(bundled_config("pilot_vlp16_corrected")).sweep.correction_enabled


@pytest.mark.parametrize("name", ["trajectory_vlp16", "trajectory_vlp32c", "occluded_vlp16", "occluded_vlp32c"])
def test_bundled_trajectory_configs(name):
    cfg = parse_config(bundled_config(name))
    t = cfg.trajectory
    assert cfg.mode == "trajectory" and (t.range_min, t.range_max, t.sample_step) == (-50.0, 50.0, 0.5)
    assert cfg.baseline == bundled_file("ndt_reference.csv")
    assert bool(t.occluders) == name.startswith("occluded")


def test_minimal_config_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, MINIMAL))
    assert cfg.sweep.vehicle.length == 4.89 and cfg.scales["center_error"] == (0.0, 1.0)


def test_zero_distance_step_names_key(tmp_path):
    with pytest.raises(ConfigError) as e:
        parse_config(write(tmp_path, MINIMAL.replace("distance_step = 1", "distance_step = 0")))
    assert "sweep.distance_step" in str(e.value) and e.value.keys == ("sweep.distance_step",)


def test_unknown_key_rejected(tmp_path):
    with pytest.raises(ConfigError) as e:
        parse_config(write(tmp_path, MINIMAL + "[vehicle]\nlidar_hieght = 2\n"))
    assert "lidar_hieght" in str(e.value)


def test_missing_keys_listed_together(tmp_path):
    text = MINIMAL.replace("distance_min = 3\n", "").replace("yaw_step = 90\n", "")
    with pytest.raises(ConfigError) as e:
        parse_config(write(tmp_path, text))
    assert set(e.value.keys) == {"sweep.distance_min", "sweep.yaw_step"}


@pytest.mark.parametrize("patch, key", [
    (("model = vlp16", "model = vlp64"), "lidar.model"),
    (("mode = sweep", "mode = replay"), "run.mode"),
    (("yaw_step = 90", "yaw_step = 7"), "sweep.yaw_step"),
    (("distance_max = 5", "distance_max = 1"), "sweep.distance_max"),
    (("distance_min = 3", "distance_min = three"), "sweep.distance_min"),
])
def test_invalid_values_name_key(tmp_path, patch, key):
    with pytest.raises(ConfigError) as e:
        parse_config(write(tmp_path, MINIMAL.replace(*patch)))
    assert key in e.value.keys


def test_grid_csv_lines_and_round_trip(tmp_path):
    grid = make_grid([[0.1, 0.2], [0.3, 1.0 / 3.0]], [[OK, OK], [TOO_FEW_POINTS, OK]])
    p = tmp_path / "g.csv"
    rio.write_grid_csv(grid, p)
    lines = p.read_text().splitlines()
    assert len(lines) == 5
    assert lines[0] == ",".join(rio.GRID_HEADER)
    assert lines[3] == "10.0,0.0,,,,,1,too_few_points"
    back = rio.read_grid_csv(p)
    assert all(a.same_as(b) for a, b in zip(grid.iter_cells(), back.iter_cells()))


finite = st.floats(0, 1e6, allow_nan=False, allow_infinity=False)


@given(st.lists(finite, min_size=4, max_size=4), st.lists(st.sampled_from([OK, FIT_FAILED]), min_size=4, max_size=4))
def test_grid_round_trip_lossless(tmp_path_factory, vals, statuses):
    grid = make_grid([vals[:2], vals[2:]], [statuses[:2], statuses[2:]])
    p = tmp_path_factory.mktemp("rt") / "g.csv"
    rio.write_grid_csv(grid, p)
    back = rio.read_grid_csv(p)
    assert all(a.same_as(b) for a, b in zip(grid.iter_cells(), back.iter_cells()))


def test_ppm_uniform_grid_and_sentinel(tmp_path):
    grid = make_grid([[0.5, 0.5], [0.5, 0.5]], [[OK, OK], [OK, FIT_FAILED]])
    p = tmp_path / "u.ppm"
    rio.render_heatmap(grid, "center_error", p, (0.0, 1.0))
    img = rio.read_ppm(p)
    assert img.shape == (2, 2, 3)
    colours = {tuple(int(c) for c in px) for px in img.reshape(-1, 3)}
    assert colours == {rio._ramp(0.5), rio.SENTINEL}
    assert tuple(img[1, 1]) == rio.SENTINEL
    assert p.read_text().startswith("P3\n")


def test_ppm_ramp_endpoints(tmp_path):
    grid = make_grid([[0.0, 2.0], [2.0, 0.0]])
    p = tmp_path / "e.ppm"
    rio.render_heatmap(grid, "center_error", p, (0.0, 2.0))
    colours = {tuple(int(c) for c in px) for px in rio.read_ppm(p).reshape(-1, 3)}
    assert colours == {rio.RAMP_LOW, rio.RAMP_HIGH}


@given(st.lists(st.floats(0, 3), min_size=4, max_size=4))
def test_pixel_is_function_of_its_cell(vals):
    grid = make_grid([vals[:2], vals[2:]])
    pixels = rio.heatmap_pixels(grid, "center_error", (0.0, 2.0))
    for i in range(2):
        for j in range(2):
            alone = make_grid([[grid.cells[i][j].center_error]])
            assert pixels[i][j] == rio.heatmap_pixels(alone, "center_error", (0.0, 2.0))[0][0]


def test_point_count_renders_failed_cells(tmp_path):
    grid = make_grid([[0.5, 0.5]], [[OK, TOO_FEW_POINTS]])
    px = rio.heatmap_pixels(grid, "point_count", (0.0, 20.0))
    assert rio.SENTINEL not in px[0]


def test_render_errors():
    grid = make_grid([[0.5]])
    with pytest.raises(ValueError, match="unknown metric"):
        rio.heatmap_pixels(grid, "speed", (0, 1))
    with pytest.raises(ValueError, match="span"):
        rio.heatmap_pixels(grid, "center_error", (1.0, 1.0))


def test_baseline_csv(tmp_path):
    p = tmp_path / "b.csv"
    p.write_text("position_m,error_m\n1.0,0.2\n-1.0,0.1\n")
    assert rio.read_baseline_csv(p) == [(-1.0, 0.1), (1.0, 0.2)]
    p.write_text("position_m,error_m\n1.0,0.2\n2.0,abc\n")
    with pytest.raises(rio.CsvFormatError, match=":3:"):
        rio.read_baseline_csv(p)
    p.write_text("position_m,error_m\n1.0,0.2\n1.0,0.3\n")
    with pytest.raises(rio.CsvFormatError, match="duplicate"):
        rio.read_baseline_csv(p)
    p.write_text("pos,err\n1,2\n")
    with pytest.raises(rio.CsvFormatError, match=":1:"):
        rio.read_baseline_csv(p)


def test_bundled_ndt_reference_mae():
    base = rio.read_baseline_csv(bundled_file("ndt_reference.csv"))
    trace = [TrajectorySample(b.position, b.error, OK) for b in base]
    near, full = summarize(trace, [(-36, 36), (-50, 50)])
    assert near.mae == pytest.approx(0.1927, abs=5e-5)
    assert full.mae == pytest.approx(0.1704, abs=5e-5)


def test_trace_and_summary_files(tmp_path):
    trace = [TrajectorySample(0.0, 0.125, OK, False, 0.5, 40), TrajectorySample(0.5, math.nan, FIT_FAILED, None, math.nan, 2)]
    rio.write_trace_csv(trace, tmp_path / "t.csv")
    back = rio.read_trace_csv(tmp_path / "t.csv")
    assert back[0] == trace[0][:6] + (None,)
    assert back[1].status == FIT_FAILED and math.isnan(back[1].error)
    rio.write_summary_csv(summarize(trace, [(0, 1), (5, 6)]), tmp_path / "s.csv")
    rows = (tmp_path / "s.csv").read_text().splitlines()
    assert rows[1] == "0.0,1.0,1,1,0.125,0.125,0.125,0.125"
    assert rows[2].endswith("empty,empty,empty,empty")
