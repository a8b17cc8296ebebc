"""INI-style run configuration with strict key checking.

Sections::

    [run]        mode (sweep | trajectory), seed, output
    [lidar]      model (vlp16 | vlp32c | custom), pattern (manufacturer | uniform),
                 elevation_angles, azimuth_step, max_range, mount_x, mount_y,
                 height, mount_yaw, range_noise_sigma
    [vehicle]    length, width, height
    [lshape]     angle_step, min_dist_clamp, min_points
    [sweep]      distance_min, distance_max, distance_step, yaw_step,
                 correction, bearing, z_threshold
    [trajectory] road_heading, lateral_offset, range_min, range_max,
                 sample_step, epsilon, baseline
    [occluder NAME]  x, y, length, width, height, yaw, z_base   (repeatable)
    [render]     center_error, bbox_area_error, yaw_error, point_count  ("min, max")
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .boxfit import LShapeConfig
from .core import VehicleDims
from .experiments import SweepConfig, TrajectoryConfig
from .lidar import DEFAULT_VEHICLE, VLP16_ELEVATIONS, VLP32C_ELEVATIONS, VLP32C_UNIFORM_ELEVATIONS, Box, LidarSpec

METRICS = ("center_error", "bbox_area_error", "yaw_error", "point_count")

DEFAULT_SCALES = {
    "center_error": (0.0, 1.0),
    "bbox_area_error": (0.0, 5.0),
    "yaw_error": (0.0, 45.0),
    "point_count": (0.0, 1000.0),
}


class ConfigError(ValueError):
    def __init__(self, message: str, keys=()):
        super().__init__(message)
        self.keys = tuple(keys)


def _pos(v):
    return v > 0


def _nonneg(v):
    return v >= 0


def _any(v):
    return True


# key -> (kind, check, description of the check)
_SCHEMA = {
    "run": {"mode": ("str", None, ""), "seed": ("int", _any, ""), "output": ("str", None, "")},
    "lidar": {
        "model": ("str", None, ""),
        "pattern": ("str", None, ""),
        "elevation_angles": ("floats", None, ""),
        "azimuth_step": ("float", lambda v: 0 < v <= 10, "in (0, 10]"),
        "max_range": ("float", _pos, "> 0"),
        "mount_x": ("float", _any, ""),
        "mount_y": ("float", _any, ""),
        "height": ("float", _nonneg, ">= 0"),
        "mount_yaw": ("float", _any, ""),
        "range_noise_sigma": ("float", _nonneg, ">= 0"),
    },
    "vehicle": {
        "length": ("float", _pos, "> 0"),
        "width": ("float", _pos, "> 0"),
        "height": ("float", _pos, "> 0"),
    },
    "lshape": {
        "angle_step": ("float", lambda v: 0 < v <= 15, "in (0, 15]"),
        "min_dist_clamp": ("float", _pos, "> 0"),
        "min_points": ("int", lambda v: v >= 3, ">= 3"),
    },
    "sweep": {
        "distance_min": ("float", _nonneg, ">= 0"),
        "distance_max": ("float", _nonneg, ">= 0"),
        "distance_step": ("float", _pos, "> 0"),
        "yaw_step": ("float", lambda v: v > 0 and abs(360 / v - round(360 / v)) < 1e-9, "> 0 and dividing 360"),
        "correction": ("bool", None, ""),
        "bearing": ("float", _any, ""),
        "z_threshold": ("float", _nonneg, ">= 0"),
    },
    "trajectory": {
        "road_heading": ("float", _any, ""),
        "lateral_offset": ("float", _any, ""),
        "range_min": ("float", _any, ""),
        "range_max": ("float", _any, ""),
        "sample_step": ("float", _pos, "> 0"),
        "epsilon": ("float", _pos, "> 0"),
        "baseline": ("str", None, ""),
    },
    "occluder": {
        "x": ("float", _any, ""),
        "y": ("float", _any, ""),
        "length": ("float", _pos, "> 0"),
        "width": ("float", _pos, "> 0"),
        "height": ("float", _pos, "> 0"),
        "yaw": ("float", _any, ""),
        "z_base": ("float", _nonneg, ">= 0"),
    },
    "render": {m: ("floats", None, "") for m in METRICS},
}

_REQUIRED = {
    "run": ("mode",),
    "lidar": ("model",),
    "sweep": ("distance_min", "distance_max", "distance_step", "yaw_step"),
    "trajectory": ("range_min", "range_max", "sample_step"),
    "occluder": ("x", "y", "length", "width", "height"),
}


@dataclass
class RunConfig:
    mode: str
    sweep: SweepConfig | None = None
    trajectory: TrajectoryConfig | None = None
    seed: int = 0
    output: Path | None = None
    baseline: Path | None = None
    scales: dict = field(default_factory=lambda: dict(DEFAULT_SCALES))


def bundled_config(name: str) -> Path:
    """Path of a config shipped with the package, e.g. ``pilot_vlp16``."""
    stem = name[:-4] if name.endswith(".cfg") else name
    p = resources.files("rsloc") / "data" / f"{stem}.cfg"
    if not p.is_file():
        raise FileNotFoundError(f"no bundled config named {name!r}")
    return Path(str(p))


def bundled_file(name: str) -> Path:
    return Path(str(resources.files("rsloc") / "data" / name))


def _convert(kind: str, raw: str):
    raw = raw.strip()
    if kind == "str":
        return raw
    if kind == "int":
        return int(raw)
    if kind == "float":
        v = float(raw)
        if not math.isfinite(v):
            raise ValueError("not finite")
        return v
    if kind == "bool":
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError("not a boolean")
    if kind == "floats":
        vals = [float(x) for x in raw.replace(",", " ").split()]
        if not vals or not all(math.isfinite(v) for v in vals):
            raise ValueError("need a list of finite numbers")
        return vals
    raise AssertionError(kind)


def _read_sections(parser: configparser.ConfigParser) -> tuple[dict, list, list]:
    errors: list[tuple[str, str]] = []
    values: dict = {}
    occluders = []
    for sect in parser.sections():
        kind = "occluder" if sect.split()[0] == "occluder" else sect
        if kind not in _SCHEMA:
            errors.append((sect, f"unknown section [{sect}]"))
            continue
        schema = _SCHEMA[kind]
        got = {}
        for key, raw in parser.items(sect):
            qual = f"{sect}.{key}"
            if key not in schema:
                errors.append((qual, f"unknown key {qual!r}"))
                continue
            typ, check, desc = schema[key]
            try:
                val = _convert(typ, raw)
            except ValueError:
                errors.append((qual, f"{qual}: cannot parse {raw!r} as {typ}"))
                continue
            if check is not None and not check(val):
                errors.append((qual, f"{qual} = {raw} violates {desc}"))
                continue
            got[key] = val
        present = {k for k, _ in parser.items(sect)}
        missing = [k for k in _REQUIRED.get(kind, ()) if k not in present]
        errors.extend((f"{sect}.{k}", f"missing required key {sect}.{k}") for k in missing)
        if kind == "occluder":
            occluders.append((sect, got))
        else:
            values[sect] = got
    return values, occluders, errors


def _lidar(v: dict, errors: list) -> LidarSpec | None:
    model = v.get("model", "vlp16").lower()
    pattern = v.get("pattern", "manufacturer").lower()
    if pattern not in ("manufacturer", "uniform"):
        errors.append(("lidar.pattern", f"lidar.pattern must be manufacturer or uniform, got {pattern!r}"))
    if model == "vlp16":
        elev = VLP16_ELEVATIONS
    elif model == "vlp32c":
        elev = VLP32C_UNIFORM_ELEVATIONS if pattern == "uniform" else VLP32C_ELEVATIONS
    elif model == "custom":
        if "elevation_angles" not in v:
            errors.append(("lidar.elevation_angles", "lidar.elevation_angles required for model = custom"))
            return None
        elev = tuple(v["elevation_angles"])
    else:
        errors.append(("lidar.model", f"lidar.model must be vlp16, vlp32c or custom, got {model!r}"))
        return None
    if "elevation_angles" in v:
        elev = tuple(v["elevation_angles"])
    try:
        return LidarSpec(
            elev,
            azimuth_step=v.get("azimuth_step", 0.2),
            max_range=v.get("max_range", 100.0),
            mount=(v.get("mount_x", 0.0), v.get("mount_y", 0.0), v.get("height", 2.0)),
            mount_yaw=v.get("mount_yaw", 0.0),
            range_noise_sigma=v.get("range_noise_sigma", 0.0),
        )
    except ValueError as e:
        errors.append(("lidar.elevation_angles", f"lidar: {e}"))
        return None


def parse_config(path) -> RunConfig:
    """Read and fully validate a run configuration.

    Raises :class:`ConfigError` naming every offending key; nothing partial is
    returned.
    """
    path = Path(path)
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keep key case so typos are reported verbatim
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except configparser.Error as e:
        raise ConfigError(f"{path}: {e}") from e
    values, occ_raw, errors = _read_sections(parser)

    run = values.get("run")
    if run is None:
        errors.append(("run", "missing section [run]"))
        run = {}
    mode = run.get("mode")
    if mode is not None and mode not in ("sweep", "trajectory"):
        errors.append(("run.mode", f"run.mode must be sweep or trajectory, got {mode!r}"))
    if mode in ("sweep", "trajectory"):
        other = "trajectory" if mode == "sweep" else "sweep"
        if mode not in values:
            errors.append((mode, f"missing section [{mode}] for mode = {mode}"))
            errors.extend((f"{mode}.{k}", f"missing required key {mode}.{k}") for k in _REQUIRED[mode])
        if other in values:
            errors.append((other, f"section [{other}] given but mode = {mode}"))
    if mode == "sweep" and occ_raw:
        errors.append(("occluder", "occluders are only supported for mode = trajectory"))
    if "lidar" not in values:
        errors.append(("lidar", "missing section [lidar]"))

    lidar = _lidar(values.get("lidar", {}), errors) if "lidar" in values else None

    vv = values.get("vehicle", {})
    vehicle = DEFAULT_VEHICLE
    try:
        vehicle = VehicleDims(vv.get("length", DEFAULT_VEHICLE.length), vv.get("width", DEFAULT_VEHICLE.width),
                              vv.get("height", DEFAULT_VEHICLE.height))
    except ValueError as e:
        errors.append(("vehicle.width", f"vehicle: {e}"))

    lv = values.get("lshape", {})
    lshape = LShapeConfig(lv.get("angle_step", 1.0), lv.get("min_dist_clamp", 0.01), lv.get("min_points", 3))

    scales = dict(DEFAULT_SCALES)
    for m, pair in values.get("render", {}).items():
        if len(pair) != 2 or not pair[1] > pair[0]:
            errors.append((f"render.{m}", f"render.{m} must be 'min, max' with max > min"))
        else:
            scales[m] = (pair[0], pair[1])

    occluders = []
    for sect, ov in occ_raw:
        try:
            occluders.append(Box((ov["x"], ov["y"]), ov["length"], ov["width"], ov["height"],
                                 ov.get("yaw", 0.0), ov.get("z_base", 0.0)))
        except (KeyError, ValueError):
            pass  # already reported as missing/invalid keys

    seed = run.get("seed", 0)
    sweep = traj = None
    baseline = None
    if not errors and mode == "sweep":
        s = values["sweep"]
        if s["distance_max"] < s["distance_min"]:
            errors.append(("sweep.distance_max", "sweep.distance_max must be >= sweep.distance_min"))
        else:
            sweep = SweepConfig(
                lidar=lidar, vehicle=vehicle, distance_min=s["distance_min"], distance_max=s["distance_max"],
                distance_step=s["distance_step"], yaw_step=s["yaw_step"],
                correction_enabled=s.get("correction", False), bearing=s.get("bearing", 0.0),
                lshape=lshape, z_threshold=s.get("z_threshold", 0.05), seed=seed,
            )
    elif not errors and mode == "trajectory":
        t = values["trajectory"]
        if t["range_max"] < t["range_min"]:
            errors.append(("trajectory.range_max", "trajectory.range_max must be >= trajectory.range_min"))
        else:
            if "baseline" in t:
                baseline = Path(t["baseline"])
                if not baseline.is_absolute():
                    candidate = path.parent / baseline
                    baseline = candidate if candidate.exists() else bundled_file(t["baseline"])
            traj = TrajectoryConfig(
                lidar=lidar, vehicle=vehicle, road_heading=t.get("road_heading", 0.0),
                lateral_offset=t.get("lateral_offset", 4.0), range_min=t["range_min"], range_max=t["range_max"],
                sample_step=t["sample_step"], occluders=tuple(occluders), epsilon=t.get("epsilon", 0.1),
                lshape=lshape, seed=seed,
            )

    if errors:
        keys = [k for k, _ in errors]
        raise ConfigError(f"{path}: " + "; ".join(msg for _, msg in errors), keys)
    out = run.get("output")
    return RunConfig(mode=mode, sweep=sweep, trajectory=traj, seed=seed,
                     output=Path(out) if out else None, baseline=baseline, scales=scales)
