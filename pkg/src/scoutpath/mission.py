"""End-to-end mission: project, inflate, plan in 2D, solve heights, fuse, measure."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

from scoutpath.altitude import AltitudeConfig, AltitudeProfile, solve_heights
from scoutpath.errors import MalformedFile, OutOfBounds, ScoutPathError, StageError
from scoutpath.grid import (
    OccupancyGrid2D,
    OccupancyGrid3D,
    PlanarPoint,
    grid_to_dict,
    inflate,
    project_to_plane,
)
from scoutpath.planner import Path2D, PlannerConfig, plan_path

log = logging.getLogger(__name__)

STAGES = ("project", "inflate", "plan2d", "altitude", "fuse")
CLEARANCE_SAMPLES = 10


@dataclass(frozen=True)
class MissionSpec:
    start: tuple[float, float, float]
    target: tuple[float, float, float]
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    altitude: AltitudeConfig = field(default_factory=AltitudeConfig)

    def __post_init__(self) -> None:
        start = tuple(float(c) for c in self.start)
        target = tuple(float(c) for c in self.target)
        if len(start) != 3 or len(target) != 3:
            raise ValueError("start and target must be 3D points")
        if start == target:
            raise ValueError("start and target coincide")
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "target", target)
        # endpoint heights always come from the mission points
        alt = self.altitude
        object.__setattr__(self, "altitude", AltitudeConfig(alt.h, alt.c_z, start[2], target[2], alt.z_max))


@dataclass
class Trajectory3D:
    points: list[tuple[float, float, float]]
    path: Path2D
    profile: AltitudeProfile


@dataclass(frozen=True)
class TrajectoryMetrics:
    length_2d: float
    length_3d: float
    max_step_2d: float
    max_slope: float
    min_clearance_value: float
    waypoint_count: int


@dataclass
class MissionResult:
    trajectory: Trajectory3D
    metrics: TrajectoryMetrics
    grid2: OccupancyGrid2D  # the inflated planning grid
    stage_log: list[str]


def fuse(path: Path2D, profile: AltitudeProfile) -> Trajectory3D:
    if len(path.waypoints) != len(profile.heights):
        raise ValueError("path and profile lengths differ")
    points = [(w[0], w[1], z) for w, z in zip(path.waypoints, profile.heights)]
    return Trajectory3D(points, path, profile)


def segment_samples(a, b, count: int = CLEARANCE_SAMPLES) -> list[tuple[float, float]]:
    """``count`` evenly spaced points strictly inside the segment ``a -> b``."""
    return [(a[0] + (b[0] - a[0]) * k / (count + 1), a[1] + (b[1] - a[1]) * k / (count + 1))
            for k in range(1, count + 1)]


def compute_metrics(traj: Trajectory3D, grid2_inflated: OccupancyGrid2D,
                    cfg: PlannerConfig | None = None) -> TrajectoryMetrics:
    pts = traj.points
    steps2 = [math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(pts, pts[1:])]
    steps3 = [math.sqrt((b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2 + (b[2] - a[2]) ** 2)
              for a, b in zip(pts, pts[1:])]
    slopes = [abs(b[2] - a[2]) for a, b in zip(pts, pts[1:])]
    occ = grid2_inflated.occupancy_at
    clearance = max(occ(p[:2]) for p in pts)
    for a, b in zip(pts, pts[1:]):
        for q in segment_samples(a, b):
            clearance = max(clearance, occ(q))
    return TrajectoryMetrics(
        length_2d=math.fsum(steps2),
        length_3d=math.fsum(steps3),
        max_step_2d=max(steps2, default=0.0),
        max_slope=max(slopes, default=0.0),
        min_clearance_value=clearance,
        waypoint_count=len(pts),
    )


def _stage(stage: str, stage_log: list[str]):
    stage_log.append(stage)
    log.info("stage %s", stage)
    return stage


def planning_grid(grid, cfg: PlannerConfig, stage_log: list[str] | None = None) -> OccupancyGrid2D:
    """Projected (if 3D) and inflated grid the planner steps on."""
    stage_log = stage_log if stage_log is not None else []
    stage = _stage("project", stage_log)
    try:
        grid2 = project_to_plane(grid) if isinstance(grid, OccupancyGrid3D) else grid
        stage = _stage("inflate", stage_log)
        return inflate(grid2, cfg.inflation_radius, cfg.occupancy_threshold)
    except ScoutPathError as exc:
        raise StageError(stage, exc) from exc


def plan_mission(grid: OccupancyGrid3D | OccupancyGrid2D, spec: MissionSpec) -> MissionResult:
    """Run the full pipeline; failures are re-raised as :class:`StageError` naming the stage.

    A 2D grid skips the projection (it is treated as already projected).
    """
    stage_log: list[str] = []
    b = grid.bounds
    for name, p in (("start", spec.start), ("target", spec.target)):
        inside = b[0] <= p[0] <= b[1] and b[2] <= p[1] <= b[3]
        if isinstance(grid, OccupancyGrid3D):
            inside = inside and b[4] <= p[2] <= b[5]
        if not inside:
            raise StageError("validate", OutOfBounds(f"{name} {p} outside grid world box {b}"))
    grid2 = planning_grid(grid, spec.planner, stage_log)
    stage = _stage("plan2d", stage_log)
    try:
        path = plan_path(grid2, spec.start[:2], spec.target[:2], spec.planner)
        stage = _stage("altitude", stage_log)
        profile = solve_heights(len(path.waypoints), spec.altitude)
        stage = _stage("fuse", stage_log)
        traj = fuse(path, profile)
    except ScoutPathError as exc:
        raise StageError(stage, exc) from exc
    return MissionResult(traj, compute_metrics(traj, grid2, spec.planner), grid2, stage_log)


# --- trajectory files --------------------------------------------------------------------------

def config_echo(spec: MissionSpec, grid) -> dict:
    meta = grid_to_dict(grid)
    del meta["values"]
    return {
        "start": list(spec.start),
        "target": list(spec.target),
        "planner": spec.planner.to_dict(),
        "kernel": asdict(spec.planner.kernel),
        "altitude": spec.altitude.to_dict(),
        "map": meta,
    }


def trajectory_to_dict(traj: Trajectory3D, metrics: TrajectoryMetrics, echo: dict | None = None) -> dict:
    return {
        "points": [list(p) for p in traj.points],
        "path_2d": [list(w) for w in traj.path.waypoints],
        "heights": list(traj.profile.heights),
        "objective_values": list(traj.path.objective_values),
        "metrics": asdict(metrics),
        "config_echo": echo or {},
    }


def save_trajectory(traj: Trajectory3D, metrics: TrajectoryMetrics, path, echo: dict | None = None) -> None:
    Path(path).write_text(json.dumps(trajectory_to_dict(traj, metrics, echo), indent=1) + "\n",
                          encoding="utf-8")


def _number_rows(rows, width: int, name: str) -> list[tuple[float, ...]]:
    if not isinstance(rows, list):
        raise MalformedFile(f"{name} must be a list")
    out = []
    for row in rows:
        if (not isinstance(row, list) or len(row) != width
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)
                           for v in row)):
            raise MalformedFile(f"{name} entries must be lists of {width} finite numbers")
        out.append(tuple(float(v) for v in row))
    return out


def trajectory_from_dict(doc) -> tuple[Trajectory3D, TrajectoryMetrics, dict]:
    if not isinstance(doc, dict):
        raise MalformedFile("trajectory document must be a JSON object")
    for key in ("points", "path_2d", "heights", "metrics"):
        if key not in doc:
            raise MalformedFile(f"missing field {key!r}")
    points = _number_rows(doc["points"], 3, "points")
    path2 = [PlanarPoint(*w) for w in _number_rows(doc["path_2d"], 2, "path_2d")]
    if not isinstance(doc["heights"], list):
        raise MalformedFile("heights must be a list")
    heights = [row[0] for row in _number_rows([[h] for h in doc["heights"]], 1, "heights")]
    if not (len(points) == len(path2) == len(heights)):
        raise MalformedFile(f"length mismatch: {len(points)} points, {len(path2)} path waypoints, "
                            f"{len(heights)} heights")
    if len(points) < 2:
        raise MalformedFile("a trajectory needs at least two points")
    for t, (p, w, z) in enumerate(zip(points, path2, heights)):
        if p != (w[0], w[1], z):
            raise MalformedFile(f"point {t} does not match its path waypoint and height")
    raw = doc["metrics"]
    names = [f for f in TrajectoryMetrics.__dataclass_fields__]
    if not isinstance(raw, dict) or set(raw) != set(names):
        raise MalformedFile(f"metrics must have exactly the fields {names}")
    metrics = TrajectoryMetrics(**raw)
    objective_values = doc.get("objective_values", [])
    traj = Trajectory3D(points, Path2D(path2, list(objective_values)), AltitudeProfile(heights))
    return traj, metrics, doc.get("config_echo", {})


def load_trajectory(path) -> tuple[Trajectory3D, TrajectoryMetrics, dict]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedFile(f"{path}: not valid JSON ({exc.msg})") from exc
    return trajectory_from_dict(doc)
