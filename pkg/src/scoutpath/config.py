"""Mission config files: a flat JSON object, every key optional.

Map-dependent defaults are resolved against the loaded grid:

=====================  =================================
key                    default
=====================  =================================
c_s                    sqrt(2) * resolution
goal_tolerance         c_s
w1_base                1
w2                     5
weight_gain            4
inflation_radius       1 * resolution
occupancy_threshold    0.5
max_steps              10 * (nx + ny)
stall_window           15
stall_eps              0.1 * c_s
intermediate_waypoints []  (list of [x, y] in meters)
h                      35
c_z                    1
z_max                  100
kernel                 {} (max_iterations, step_init, armijo_c,
                       backtrack_factor, grad_tol, ring_starts)
=====================  =================================
"""

from __future__ import annotations

import json
import math
from dataclasses import fields
from pathlib import Path

from scoutpath.altitude import AltitudeConfig
from scoutpath.errors import InvalidConfig, MalformedFile
from scoutpath.kernel import KernelSettings
from scoutpath.planner import PlannerConfig

PLANNER_KEYS = ("c_s", "goal_tolerance", "w1_base", "w2", "weight_gain", "inflation_radius",
                "occupancy_threshold", "max_steps", "stall_window", "stall_eps", "intermediate_waypoints")
ALTITUDE_KEYS = ("h", "c_z", "z_max")
INT_KEYS = ("max_steps", "stall_window")
KERNEL_KEYS = tuple(f.name for f in fields(KernelSettings))


def read_config(path) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedFile(f"{path}: not valid JSON ({exc.msg})") from exc
    if not isinstance(doc, dict):
        raise InvalidConfig("config must be a JSON object")
    return doc


def _number(key: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise InvalidConfig(f"{key} must be a finite number")
    if key in INT_KEYS and not float(value).is_integer():
        raise InvalidConfig(f"{key} must be an integer")
    return int(value) if key in INT_KEYS else float(value)


def resolve(doc: dict, grid, z_start: float = 0.0, z_end: float = 0.0) -> tuple[PlannerConfig, AltitudeConfig]:
    """Validate ``doc`` and fill defaults for ``grid``. Unknown keys are rejected."""
    unknown = sorted(set(doc) - set(PLANNER_KEYS) - set(ALTITUDE_KEYS) - {"kernel"})
    if unknown:
        raise InvalidConfig(f"unknown config keys: {', '.join(unknown)}")
    res = grid.resolution
    nx, ny = grid.size[:2]
    planner: dict = {}
    for key in PLANNER_KEYS:
        if key not in doc:
            continue
        if key == "intermediate_waypoints":
            wps = doc[key]
            if not isinstance(wps, list) or not all(isinstance(w, list) and len(w) == 2 for w in wps):
                raise InvalidConfig("intermediate_waypoints must be a list of [x, y] pairs")
            planner[key] = tuple((_number(key, w[0]), _number(key, w[1])) for w in wps)
        else:
            planner[key] = _number(key, doc[key])
    planner.setdefault("c_s", math.sqrt(2.0) * res)
    planner.setdefault("inflation_radius", 1.0 * res)
    planner.setdefault("max_steps", 10 * (nx + ny))

    kernel_doc = doc.get("kernel", {})
    if not isinstance(kernel_doc, dict):
        raise InvalidConfig("kernel must be an object")
    bad = sorted(set(kernel_doc) - set(KERNEL_KEYS))
    if bad:
        raise InvalidConfig(f"unknown kernel keys: {', '.join(bad)}")
    kernel_args = {}
    for k, v in kernel_doc.items():
        if k in ("max_iterations", "ring_starts"):
            if isinstance(v, bool) or not isinstance(v, int):
                raise InvalidConfig(f"kernel.{k} must be an integer")
            kernel_args[k] = v
        elif not (k == "step_init" and v is None):
            kernel_args[k] = _number(f"kernel.{k}", v)
    try:
        kernel = KernelSettings(**kernel_args)
    except ValueError as exc:
        raise InvalidConfig(f"kernel: {exc}") from exc
    pcfg = PlannerConfig(kernel=kernel, **planner)

    alt = {key: _number(key, doc[key]) for key in ALTITUDE_KEYS if key in doc}
    acfg = AltitudeConfig(z_start=z_start, z_end=z_end, **alt)
    return pcfg, acfg
