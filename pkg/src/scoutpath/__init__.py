"""Two-stage scouting-UAV path planner: greedy 2D waypoints, then an optimal height profile."""

from scoutpath.altitude import (
    AltitudeConfig,
    AltitudeProfile,
    reachable_envelope,
    solve_heights,
    solve_heights_iterative,
)
from scoutpath.grid import (
    OccupancyGrid2D,
    OccupancyGrid3D,
    PlanarPoint,
    gen_city_block,
    gen_random,
    inflate,
    load_grid,
    project_to_plane,
    save_grid,
)
from scoutpath.kernel import DiskBoxRegion, KernelSettings, ObjectiveField, minimize, project_feasible
from scoutpath.mission import MissionSpec, Trajectory3D, TrajectoryMetrics, compute_metrics, plan_mission
from scoutpath.planner import PlannerConfig, Weights, plan_leg, plan_path, step_objective, weight_schedule

__all__ = [
    "AltitudeConfig", "AltitudeProfile", "DiskBoxRegion", "KernelSettings", "MissionSpec",
    "ObjectiveField", "OccupancyGrid2D", "OccupancyGrid3D", "PlanarPoint", "PlannerConfig",
    "Trajectory3D", "TrajectoryMetrics", "Weights", "compute_metrics", "gen_city_block", "gen_random",
    "inflate", "load_grid", "minimize", "plan_leg", "plan_mission", "plan_path", "project_feasible",
    "project_to_plane", "reachable_envelope", "save_grid", "solve_heights", "solve_heights_iterative",
    "step_objective", "weight_schedule",
]
