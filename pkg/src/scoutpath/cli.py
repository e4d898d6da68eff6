"""Command-line frontend.

Exit codes: 0 success, 2 usage/validation, 3 I/O, 4 planner failure,
5 check failure. Failures print one line on stderr:
``stage=<name> code=<name> detail=<text>``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from scoutpath import config as configmod
from scoutpath.altitude import solve_heights
from scoutpath.errors import (
    InvalidConfig,
    MalformedFile,
    OutOfBounds,
    PlacementFailed,
    PlannerError,
    ScoutPathError,
    StageError,
)
from scoutpath.grid import (
    OccupancyGrid2D,
    OccupancyGrid3D,
    gen_city_block,
    gen_random,
    inflate,
    load_grid,
    project_to_plane,
    save_grid,
)
from scoutpath.mission import (
    MissionSpec,
    compute_metrics,
    config_echo,
    load_trajectory,
    plan_mission,
    save_trajectory,
    segment_samples,
)
from scoutpath.render import render_svg

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_PLANNER, EXIT_CHECK = 0, 2, 3, 4, 5
TOL = 1e-9


class CliFailure(Exception):
    def __init__(self, exit_code: int, stage: str, code: str, detail: str) -> None:
        super().__init__(detail)
        self.exit_code, self.stage, self.code, self.detail = exit_code, stage, code, detail


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse's own usage errors keep exit code 2
        self.print_usage(sys.stderr)
        raise CliFailure(EXIT_USAGE, "args", "UsageError", message)


def _one_line(text: str) -> str:
    return " ".join(str(text).split())


def _load_map(path):
    try:
        return load_grid(path)
    except OSError as exc:
        raise CliFailure(EXIT_IO, "io", "IOError", f"{path}: {exc.strerror or exc}") from exc
    except MalformedFile as exc:
        raise CliFailure(EXIT_IO, "io", exc.code, f"{path}: {exc.detail}") from exc


def _load_config(path) -> dict:
    try:
        return configmod.read_config(path)
    except OSError as exc:
        raise CliFailure(EXIT_IO, "io", "IOError", f"{path}: {exc.strerror or exc}") from exc
    except MalformedFile as exc:
        raise CliFailure(EXIT_IO, "io", exc.code, exc.detail) from exc
    except InvalidConfig as exc:
        raise CliFailure(EXIT_USAGE, "config", exc.code, exc.detail) from exc


def _resolve(doc: dict, grid, z_start=0.0, z_end=0.0):
    try:
        return configmod.resolve(doc, grid, z_start, z_end)
    except InvalidConfig as exc:
        raise CliFailure(EXIT_USAGE, "config", exc.code, exc.detail) from exc


def _write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliFailure(EXIT_IO, "io", "IOError", f"{path}: {exc.strerror or exc}") from exc


def _save_grid(grid, path) -> None:
    try:
        save_grid(grid, path)
    except OSError as exc:
        raise CliFailure(EXIT_IO, "io", "IOError", f"{path}: {exc.strerror or exc}") from exc


def _planning_grid(grid, pcfg) -> tuple[OccupancyGrid2D, OccupancyGrid2D]:
    grid2 = project_to_plane(grid) if isinstance(grid, OccupancyGrid3D) else grid
    return grid2, inflate(grid2, pcfg.inflation_radius, pcfg.occupancy_threshold)


# --- commands ------------------------------------------------------------------------------------

def cmd_gen_random(args) -> int:
    nx, ny = args.size
    if nx < 1 or ny < 1:
        raise CliFailure(EXIT_USAGE, "args", "InvalidArgument", "--size values must be positive")
    if not 0.0 <= args.density <= 1.0:
        raise CliFailure(EXIT_USAGE, "args", "InvalidArgument", f"--density {args.density} must lie in [0, 1]")
    if not args.resolution > 0:
        raise CliFailure(EXIT_USAGE, "args", "InvalidArgument", "--resolution must be positive")
    _save_grid(gen_random((nx, ny), args.density, args.seed, args.resolution), args.out)
    return EXIT_OK


def cmd_gen_city(args) -> int:
    if min(args.size) < 1:
        raise CliFailure(EXIT_USAGE, "args", "InvalidArgument", "--size values must be positive")
    if args.blocks < 1:
        raise CliFailure(EXIT_USAGE, "args", "InvalidArgument", "--blocks must be at least 1")
    if not args.resolution > 0:
        raise CliFailure(EXIT_USAGE, "args", "InvalidArgument", "--resolution must be positive")
    try:
        grid = gen_city_block(tuple(args.size), args.blocks, args.seed, args.resolution, street=args.street)
    except PlacementFailed as exc:
        raise CliFailure(EXIT_USAGE, "generate", exc.code, exc.detail) from exc
    _save_grid(grid, args.out)
    return EXIT_OK


def _partial_doc(exc: PlannerError, stage: str, echo: dict) -> dict:
    return {
        "partial": True,
        "path_2d": [list(p) for p in exc.partial],
        "error": {"stage": stage, "code": exc.code, "detail": exc.detail, "leg": exc.leg},
        "config_echo": echo,
    }


def cmd_plan(args) -> int:
    grid = _load_map(args.map)
    doc = _load_config(args.config)
    pcfg, acfg = _resolve(doc, grid, args.start[2], args.target[2])
    try:
        spec = MissionSpec(tuple(args.start), tuple(args.target), pcfg, acfg)
    except (ValueError, InvalidConfig) as exc:
        raise CliFailure(EXIT_USAGE, "validate", "InvalidArgument", str(exc)) from exc
    echo = config_echo(spec, grid)
    try:
        result = plan_mission(grid, spec)
    except StageError as exc:
        cause = exc.cause
        if isinstance(cause, PlannerError):
            _write_text(str(args.out) + ".partial", json.dumps(_partial_doc(cause, exc.stage, echo), indent=1) + "\n")
            raise CliFailure(EXIT_PLANNER, exc.stage, cause.code, cause.detail) from exc
        if isinstance(cause, (OutOfBounds, InvalidConfig)):
            raise CliFailure(EXIT_USAGE, exc.stage, cause.code, cause.detail) from exc
        raise CliFailure(EXIT_PLANNER, exc.stage, cause.code, cause.detail) from exc
    try:
        save_trajectory(result.trajectory, result.metrics, args.out, echo)
    except OSError as exc:
        raise CliFailure(EXIT_IO, "io", "IOError", f"{args.out}: {exc.strerror or exc}") from exc
    if args.svg:
        grid2 = project_to_plane(grid) if isinstance(grid, OccupancyGrid3D) else grid
        traj = result.trajectory
        svg = render_svg(grid2, inflated=result.grid2, waypoints=traj.path.waypoints,
                         heights=traj.profile.heights, start=spec.start, target=spec.target,
                         intermediates=pcfg.intermediate_waypoints, z_max=acfg.z_max)
        _write_text(args.svg, svg)
    m = result.metrics
    print(f"waypoints={m.waypoint_count} length_2d={m.length_2d:.6g} length_3d={m.length_3d:.6g} "
          f"max_step_2d={m.max_step_2d:.6g} max_slope={m.max_slope:.6g} "
          f"min_clearance_value={m.min_clearance_value:.6g}")
    return EXIT_OK


def _load_traj(path):
    try:
        return load_trajectory(path)
    except OSError as exc:
        raise CliFailure(EXIT_IO, "io", "IOError", f"{path}: {exc.strerror or exc}") from exc
    except MalformedFile as exc:
        raise CliFailure(EXIT_IO, "io", exc.code, f"{path}: {exc.detail}") from exc


def check_trajectory(traj, metrics, echo: dict, grid, doc: dict) -> list[tuple[str, bool, str]]:
    """Replay every trajectory invariant; returns ``(name, passed, detail)`` rows."""
    start, target = echo.get("start"), echo.get("target")
    if not (isinstance(start, list) and isinstance(target, list) and len(start) == len(target) == 3):
        raise CliFailure(EXIT_IO, "io", "MalformedFile", "trajectory config_echo lacks start/target points")
    pcfg, acfg = _resolve(doc, grid, float(start[2]), float(target[2]))
    _, inflated = _planning_grid(grid, pcfg)
    pts = traj.points
    wps = traj.path.waypoints
    zs = traj.profile.heights
    rows: list[tuple[str, bool, str]] = []

    def add(name: str, ok: bool, detail: str) -> None:
        rows.append((name, bool(ok), detail))

    fused = len(pts) == len(wps) == len(zs) and all(
        p == (w[0], w[1], z) for p, w, z in zip(pts, wps, zs))
    add("fusion_alignment", fused, f"{len(pts)} points")
    steps = [math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(pts, pts[1:])]
    worst = max(steps, default=0.0)
    add("step_cap", worst <= pcfg.c_s + TOL, f"max step {worst!r} vs c_s {pcfg.c_s!r}")
    inside = all(grid.bounds[0] <= p[0] <= grid.bounds[1] and grid.bounds[2] <= p[1] <= grid.bounds[3]
                 for p in pts)
    add("boundary", inside, "all waypoints inside the map extent" if inside else "waypoint outside map extent")
    ends = (pts[0][0], pts[0][1]) == (start[0], start[1]) and (pts[-1][0], pts[-1][1]) == (target[0], target[1])
    add("endpoints_2d", ends, "first/last waypoint equal start/target")
    slopes = [abs(b[2] - a[2]) for a, b in zip(pts, pts[1:])]
    worst_slope = max(slopes, default=0.0)
    add("slope_cap", worst_slope <= acfg.c_z + TOL, f"max |dz| {worst_slope!r} vs c_z {acfg.c_z!r}")
    add("endpoint_heights", pts[0][2] == start[2] and pts[-1][2] == target[2], "heights at start/target")
    in_box = all(0.0 <= p[2] <= acfg.z_max for p in pts)
    add("altitude_box", in_box, f"0 <= z <= {acfg.z_max!r}")
    try:
        best = solve_heights(len(pts), acfg).heights
        gap = max(abs(a - b) for a, b in zip(best, zs))
        add("altitude_optimality", gap <= 1e-6, f"max deviation from optimal profile {gap:.3g}")
    except ScoutPathError as exc:
        add("altitude_optimality", False, exc.detail)
    occ = inflated.occupancy_at
    try:
        clearance = max(occ(p[:2]) for p in pts)
        for a, b in zip(pts, pts[1:]):
            for q in segment_samples(a, b):
                clearance = max(clearance, occ(q))
        add("clearance", clearance < pcfg.occupancy_threshold,
            f"max sampled occupancy {clearance:.6g} vs threshold {pcfg.occupancy_threshold!r}")
        fresh = compute_metrics(traj, inflated, pcfg)
        diffs = {k: abs(getattr(fresh, k) - getattr(metrics, k)) for k in fresh.__dataclass_fields__}
        bad = sorted(k for k, d in diffs.items() if not d <= TOL)
        add("metrics_consistency", not bad, "stored metrics reproduced" if not bad else f"differs: {', '.join(bad)}")
    except OutOfBounds as exc:
        add("clearance", False, exc.detail)
        add("metrics_consistency", False, "trajectory leaves the map")
    add("length_order", metrics.length_3d >= metrics.length_2d, "length_3d >= length_2d")
    add("metric_step_cap", metrics.max_step_2d <= pcfg.c_s + TOL, "stored max_step_2d within c_s")
    return rows


def cmd_check(args) -> int:
    traj, metrics, echo = _load_traj(args.traj)
    grid = _load_map(args.map)
    doc = _load_config(args.config)
    rows = check_trajectory(traj, metrics, echo, grid, doc)
    width = max(len(name) for name, _, _ in rows)
    for name, ok, detail in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {detail}")
    failed = [name for name, ok, _ in rows if not ok]
    if failed:
        raise CliFailure(EXIT_CHECK, "check", "InvariantViolation", ",".join(failed))
    return EXIT_OK


def _overlay_from_echo(grid, echo: dict):
    planner = echo.get("planner", {}) if isinstance(echo, dict) else {}
    radius = planner.get("inflation_radius", grid.resolution)
    threshold = planner.get("occupancy_threshold", 0.5)
    try:
        return planner, inflate(grid, float(radius), float(threshold))
    except (TypeError, ValueError) as exc:
        raise CliFailure(EXIT_IO, "io", "MalformedFile", f"bad inflation settings in config_echo: {exc}") from exc


def cmd_render(args) -> int:
    grid = _load_map(args.map)
    grid2 = project_to_plane(grid) if isinstance(grid, OccupancyGrid3D) else grid
    kwargs: dict = {}
    if args.traj:
        traj, _, echo = _load_traj(args.traj)
        planner, inflated = _overlay_from_echo(grid2, echo)
        kwargs = dict(inflated=inflated, waypoints=traj.path.waypoints, heights=traj.profile.heights,
                      start=traj.points[0], target=traj.points[-1],
                      intermediates=[tuple(w) for w in planner.get("intermediate_waypoints", [])],
                      z_max=echo.get("altitude", {}).get("z_max"))
    _write_text(args.out, render_svg(grid2, **kwargs))
    return EXIT_OK


def cmd_report(args) -> int:
    from scoutpath.report import write_report

    grid = _load_map(args.map)
    traj, _, echo = _load_traj(args.traj)
    grid2 = project_to_plane(grid) if isinstance(grid, OccupancyGrid3D) else grid
    _, inflated = _overlay_from_echo(grid2, echo)
    try:
        files = write_report(traj.points, grid2, inflated, args.out_dir, echo.get("altitude", {}).get("h"))
    except OSError as exc:
        raise CliFailure(EXIT_IO, "io", "IOError", f"{args.out_dir}: {exc.strerror or exc}") from exc
    for f in files:
        print(f)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scoutpath", description="Two-stage UAV scouting path planner.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-random", help="random binary 2D occupancy grid")
    p.add_argument("--size", nargs=2, type=int, required=True, metavar=("NX", "NY"))
    p.add_argument("--density", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--resolution", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_random)

    p = sub.add_parser("gen-city", help="synthetic 3D city-block occupancy grid")
    p.add_argument("--size", nargs=3, type=int, required=True, metavar=("NX", "NY", "NZ"))
    p.add_argument("--blocks", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--resolution", type=float, default=1.0)
    p.add_argument("--street", type=int, default=None, help="minimum free cells between blocks")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_city)

    p = sub.add_parser("plan", help="plan a 3D mission on a map")
    p.add_argument("--map", required=True)
    p.add_argument("--start", nargs=3, type=float, required=True, metavar=("X", "Y", "Z"))
    p.add_argument("--target", nargs=3, type=float, required=True, metavar=("X", "Y", "Z"))
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--svg", default=None)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("check", help="re-verify a planned trajectory")
    p.add_argument("--traj", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("render", help="render a map (and trajectory) to SVG")
    p.add_argument("--map", required=True)
    p.add_argument("--traj", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("report", help="CSV table and PNG figures for a trajectory")
    p.add_argument("--map", required=True)
    p.add_argument("--traj", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except CliFailure as exc:
        failure = exc
    except MalformedFile as exc:
        failure = CliFailure(EXIT_IO, "io", exc.code, exc.detail)
    except OSError as exc:
        failure = CliFailure(EXIT_IO, "io", "IOError", str(exc))
    except ScoutPathError as exc:
        # anything not mapped by a command is treated as a validation problem
        failure = CliFailure(EXIT_USAGE, "validate", exc.code, exc.detail)
    print(f"stage={failure.stage} code={failure.code} detail={_one_line(failure.detail)}", file=sys.stderr)
    return failure.exit_code


if __name__ == "__main__":
    sys.exit(main())
