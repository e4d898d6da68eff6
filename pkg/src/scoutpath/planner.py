"""Greedy one-step-at-a-time waypoint planning on an inflated 2D occupancy grid."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, fields

import numpy as np

from scoutpath.errors import (
    InvalidConfig,
    MaxStepsExceeded,
    PlannerError,
    StallDetected,
    StartOccupied,
    TargetOccupied,
)
from scoutpath.grid import OccupancyGrid2D, PlanarPoint
from scoutpath.kernel import DiskBoxRegion, KernelSettings, ObjectiveField, minimize

@dataclass(frozen=True)
class Weights:
    w1: float  # goal attraction
    w2: float  # obstacle avoidance

    def __post_init__(self) -> None:
        if self.w1 < 0 or self.w2 < 0 or not self.w1 + self.w2 > 0:
            raise ValueError("weights must be non-negative with a positive sum")


@dataclass(frozen=True)
class PlannerConfig:
    """Tunables of the 2D planner. Distances are in meters.

    ``goal_tolerance`` and ``stall_eps`` default to ``c_s`` and ``0.1 * c_s``.
    """

    c_s: float = math.sqrt(2.0)
    w1_base: float = 1.0
    w2: float = 5.0
    weight_gain: float = 4.0
    inflation_radius: float = 1.0
    occupancy_threshold: float = 0.5
    goal_tolerance: float | None = None
    max_steps: int = 1000
    stall_window: int = 15
    stall_eps: float | None = None
    intermediate_waypoints: tuple[PlanarPoint, ...] = ()
    kernel: KernelSettings = field(default_factory=KernelSettings)

    def __post_init__(self) -> None:
        if self.goal_tolerance is None:
            object.__setattr__(self, "goal_tolerance", self.c_s)
        if self.stall_eps is None:
            object.__setattr__(self, "stall_eps", 0.1 * self.c_s)
        object.__setattr__(self, "intermediate_waypoints",
                           tuple(PlanarPoint(float(p[0]), float(p[1])) for p in self.intermediate_waypoints))
        problems = []
        if not (self.c_s > 0 and math.isfinite(self.c_s)):
            problems.append("c_s must be positive")
        if not 0 < self.goal_tolerance <= self.c_s:
            problems.append("goal_tolerance must lie in (0, c_s]")
        if self.max_steps < 1:
            problems.append("max_steps must be at least 1")
        if self.stall_window < 2:
            problems.append("stall_window must be at least 2")
        if not self.stall_eps > 0:
            problems.append("stall_eps must be positive")
        if self.inflation_radius < 0:
            problems.append("inflation_radius must be non-negative")
        if not 0 < self.occupancy_threshold < 1:
            problems.append("occupancy_threshold must lie in (0, 1)")
        if min(self.w1_base, self.w2, self.weight_gain) < 0 or not self.w1_base + self.w2 > 0:
            problems.append("weights must be non-negative with w1_base + w2 > 0")
        if problems:
            raise InvalidConfig("; ".join(problems))

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "kernel"}
        out["intermediate_waypoints"] = [list(p) for p in self.intermediate_waypoints]
        return out


@dataclass(frozen=True)
class StepRecord:
    index: int
    weights: Weights
    center: PlanarPoint  # position the step started from
    objective_before: float
    objective_after: float
    displacement: float


@dataclass
class Path2D:
    waypoints: list[PlanarPoint]
    objective_values: list[float] = field(default_factory=list)
    steps: list[StepRecord] = field(default_factory=list)

    def step_lengths(self) -> list[float]:
        w = self.waypoints
        return [math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(w, w[1:])]


def step_objective(grid2: OccupancyGrid2D, target, weights: Weights, d0: float) -> ObjectiveField:
    """Normalized weighted objective: goal distance squared over ``d0**2`` plus occupancy."""
    if not d0 > 0:
        raise ValueError("d0 must be positive")
    tx, ty = float(target[0]), float(target[1])
    a = weights.w1 / (d0 * d0)
    w2 = weights.w2
    occ = grid2.occupancy_at
    occ_grad = grid2.occupancy_gradient

    def value(p) -> float:
        dx, dy = p[0] - tx, p[1] - ty
        return a * (dx * dx + dy * dy) + w2 * occ(p)

    def grad(p) -> tuple[float, float]:
        gx, gy = occ_grad(p)
        return 2.0 * a * (p[0] - tx) + w2 * gx, 2.0 * a * (p[1] - ty) + w2 * gy

    return ObjectiveField(value, grad, anchor=PlanarPoint(tx, ty))


def weight_schedule(d_current: float, d0: float, config: PlannerConfig) -> Weights:
    """Goal weight grows affinely as the remaining distance shrinks; obstacle weight is fixed."""
    progress = max(0.0, 1.0 - d_current / d0)
    return Weights(config.w1_base * (1.0 + config.weight_gain * progress), config.w2)


def _dist(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def plan_leg(grid2: OccupancyGrid2D, start, target, config: PlannerConfig) -> Path2D:
    """Step from ``start`` toward ``target`` one bounded move at a time.

    ``grid2`` is expected to be already inflated. Each step minimizes the
    weighted objective over the disk of radius ``c_s`` around the previous
    waypoint, clipped to the grid extent. Once within ``goal_tolerance`` the
    target itself is appended.
    """
    start = PlanarPoint(float(start[0]), float(start[1]))
    target = PlanarPoint(float(target[0]), float(target[1]))
    for name, p, exc in (("start", start, StartOccupied), ("target", target, TargetOccupied)):
        if not grid2.contains(p):
            raise exc(f"{name} ({p.x!r}, {p.y!r}) lies outside the grid", partial=[start])
        value = grid2.occupancy_at(p)
        if value >= config.occupancy_threshold:
            raise exc(f"{name} occupancy {value:.6g} >= threshold {config.occupancy_threshold}",
                      partial=[start])

    box = grid2.bounds
    d0 = _dist(start, target)
    path = Path2D([start])
    if d0 == 0.0:
        return Path2D([start, target])
    p = start
    window: deque[PlanarPoint] = deque([start], maxlen=config.stall_window + 1)
    for t in range(1, config.max_steps + 1):
        weights = weight_schedule(_dist(p, target), d0, config)
        objective = step_objective(grid2, target, weights, d0)
        region = DiskBoxRegion(p, config.c_s, box)
        report = minimize(objective, region, config.kernel)
        before = objective.eval(p)
        nxt = report.argmin
        path.steps.append(StepRecord(t, weights, p, before, report.value, _dist(p, nxt)))
        p = nxt
        path.objective_values.append(report.value)
        if _dist(p, target) <= config.goal_tolerance:
            if p != target:
                path.waypoints.append(p)
            path.waypoints.append(target)
            return path
        path.waypoints.append(p)
        window.append(p)
        if len(window) == window.maxlen and _dist(window[0], window[-1]) < config.stall_eps:
            raise StallDetected(
                f"net displacement {_dist(window[0], window[-1]):.3g} m over the last "
                f"{config.stall_window} steps is below {config.stall_eps:.3g} m",
                partial=path.waypoints, steps=path.steps)
    raise MaxStepsExceeded(f"target not reached within {config.max_steps} steps",
                           partial=path.waypoints, steps=path.steps)


def plan_path(grid2: OccupancyGrid2D, start, target, config: PlannerConfig) -> Path2D:
    """Chain :func:`plan_leg` through the configured intermediate waypoints."""
    stops = [start, *config.intermediate_waypoints, target]
    for k, w in enumerate(config.intermediate_waypoints, start=1):
        if not grid2.contains(w) or grid2.occupancy_at(w) >= config.occupancy_threshold:
            raise TargetOccupied(f"intermediate waypoint {k} ({w.x!r}, {w.y!r}) is not in free space",
                                 partial=[PlanarPoint(float(start[0]), float(start[1]))], leg=k - 1)
    out: Path2D | None = None
    for leg, (a, b) in enumerate(zip(stops, stops[1:])):
        try:
            part = plan_leg(grid2, a, b, config)
        except PlannerError as exc:
            done = out.waypoints[:-1] if out is not None else []
            exc.partial = done + exc.partial
            exc.leg = leg
            exc.detail = f"leg {leg}: {exc.detail}"
            exc.args = (exc.detail,)
            raise
        if out is None:
            out = part
            continue
        offset = out.steps[-1].index if out.steps else 0
        out.waypoints.extend(part.waypoints[1:])
        out.objective_values.extend(part.objective_values)
        out.steps.extend(StepRecord(s.index + offset, s.weights, s.center, s.objective_before,
                                    s.objective_after, s.displacement) for s in part.steps)
    assert out is not None
    return out


def feasibility_oracle(grid2: OccupancyGrid2D, start, target, threshold: float) -> bool:
    """Whether the cells holding ``start`` and ``target`` are 4-connected through free cells."""
    free = np.asarray(grid2.values) < threshold
    si, sj, _ = grid2.cell_of(start)
    ti, tj, _ = grid2.cell_of(target)
    if not (free[si, sj] and free[ti, tj]):
        return False
    nx, ny = free.shape
    seen = np.zeros_like(free)
    seen[si, sj] = True
    queue = deque([(si, sj)])
    while queue:
        i, j = queue.popleft()
        if (i, j) == (ti, tj):
            return True
        for a, b in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)):
            if 0 <= a < nx and 0 <= b < ny and free[a, b] and not seen[a, b]:
                seen[a, b] = True
                queue.append((a, b))
    return False
