"""Multi-start projected gradient descent over a disk intersected with a box.

This is the per-step subproblem of the planner: find the best point within one
step of the current position without leaving the environment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from scoutpath.errors import NonFiniteObjective
from scoutpath.grid import PlanarPoint

Vec = tuple[float, float]

# axis directions are only tried once the gradient step had to shrink below this fraction
AXIS_TRIGGER = 0.125
# an accepted step that improves the objective by less than this (relative) ends a run
F_RTOL = 1e-13


@dataclass(frozen=True)
class ObjectiveField:
    """Smooth scalar field on the plane.

    ``eval`` and ``grad`` must be deterministic and free of side effects.
    ``anchor`` optionally names the unconstrained minimizer of the field's
    quadratic part; its feasible projection is used as an extra start.
    """

    eval: Callable[[Vec], float]
    grad: Callable[[Vec], Vec]
    anchor: PlanarPoint | None = None


@dataclass(frozen=True)
class DiskBoxRegion:
    center: PlanarPoint
    radius: float
    box: tuple[float, float, float, float]  # x_min, x_max, y_min, y_max

    def __post_init__(self) -> None:
        x_min, x_max, y_min, y_max = self.box
        if not (x_min < x_max and y_min < y_max):
            raise ValueError("box is degenerate")
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError("radius must be positive and finite")
        cx, cy = self.center
        if not (x_min <= cx <= x_max and y_min <= cy <= y_max):
            raise ValueError("region center must lie inside the box")

    def contains(self, p: Vec, tol: float = 1e-9) -> bool:
        x_min, x_max, y_min, y_max = self.box
        return (math.hypot(p[0] - self.center[0], p[1] - self.center[1]) <= self.radius + tol
                and x_min - tol <= p[0] <= x_max + tol and y_min - tol <= p[1] <= y_max + tol)


@dataclass(frozen=True)
class KernelSettings:
    max_iterations: int = 200
    step_init: float | None = None  # meters; None means the region radius
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    grad_tol: float = 1e-8
    ring_starts: int = 8

    def __post_init__(self) -> None:
        if self.max_iterations < 1 or self.ring_starts < 0:
            raise ValueError("max_iterations must be >= 1 and ring_starts >= 0")
        if self.step_init is not None and not self.step_init > 0:
            raise ValueError("step_init must be positive")
        if not (0 < self.armijo_c < 1 and 0 < self.backtrack_factor < 1):
            raise ValueError("armijo_c and backtrack_factor must lie in (0, 1)")
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")


@dataclass(frozen=True)
class SolveReport:
    argmin: PlanarPoint
    value: float
    iterations: int
    converged: bool
    starts_tried: int


def _project_disk(p: Vec, c: Vec, r: float) -> Vec:
    dx, dy = p[0] - c[0], p[1] - c[1]
    d = math.hypot(dx, dy)
    if d <= r:
        return p
    s = r / d
    return (c[0] + dx * s, c[1] + dy * s)


def _project_box(p: Vec, box: tuple[float, float, float, float]) -> Vec:
    return (min(max(p[0], box[0]), box[1]), min(max(p[1], box[2]), box[3]))


def _crossings(c: Vec, r: float, box) -> list[Vec]:
    # circle/box-line crossings plus the box corners
    x_min, x_max, y_min, y_max = box
    pts: list[Vec] = []
    for x in (x_min, x_max):
        dx = x - c[0]
        if abs(dx) <= r:
            h = math.sqrt(max(r * r - dx * dx, 0.0))
            pts.extend([(x, c[1] - h), (x, c[1] + h)])
    for y in (y_min, y_max):
        dy = y - c[1]
        if abs(dy) <= r:
            h = math.sqrt(max(r * r - dy * dy, 0.0))
            pts.extend([(c[0] - h, y), (c[0] + h, y)])
    pts.extend([(x_min, y_min), (x_min, y_max), (x_max, y_min), (x_max, y_max)])
    return pts


def project_feasible(p: Vec, region: DiskBoxRegion) -> PlanarPoint:
    """Euclidean projection of ``p`` onto the disk/box intersection.

    The nearest feasible point of an infeasible ``p`` lies on the boundary of
    the intersection: on the circle (radial projection), on a box edge
    (clamped edge projection) or at a crossing of the two. All candidates are
    enumerated and the closest feasible one wins.
    """
    c, r, box = region.center, region.radius, region.box
    q = (float(p[0]), float(p[1]))
    if (box[0] <= q[0] <= box[1] and box[2] <= q[1] <= box[3]
            and math.hypot(q[0] - c[0], q[1] - c[1]) <= r):
        return PlanarPoint(*q)
    # nearest point of one set that happens to lie in the other is the answer
    on_disk = _project_disk(q, c, r)
    if region.contains(on_disk, tol=0.0):
        return PlanarPoint(*on_disk)
    on_box = _project_box(q, box)
    if region.contains(on_box, tol=0.0):
        return PlanarPoint(*on_box)
    x_min, x_max, y_min, y_max = box
    cands: list[Vec] = [on_disk, on_box]
    for x in (x_min, x_max):
        dx = x - c[0]
        if abs(dx) <= r:
            h = math.sqrt(max(r * r - dx * dx, 0.0))
            lo, hi = max(c[1] - h, y_min), min(c[1] + h, y_max)
            if lo <= hi:
                cands.append((x, min(max(q[1], lo), hi)))
    for y in (y_min, y_max):
        dy = y - c[1]
        if abs(dy) <= r:
            h = math.sqrt(max(r * r - dy * dy, 0.0))
            lo, hi = max(c[0] - h, x_min), min(c[0] + h, x_max)
            if lo <= hi:
                cands.append((min(max(q[0], lo), hi), y))
    cands.extend(_crossings(c, r, box))
    best: Vec = (float(c[0]), float(c[1]))
    best_d = math.hypot(c[0] - q[0], c[1] - q[1])
    for cand in cands:
        if not region.contains(cand, tol=1e-12):
            continue
        d = math.hypot(cand[0] - q[0], cand[1] - q[1])
        if d < best_d:
            best, best_d = cand, d
    # strip rounding excess so the disk and box constraints hold exactly
    best = _project_box(_project_disk(best, c, r), box)
    return PlanarPoint(*best)


def _checked(field: ObjectiveField, p: Vec) -> float:
    value = field.eval(p)
    if not math.isfinite(value):
        raise NonFiniteObjective(f"objective is {value!r} at ({p[0]!r}, {p[1]!r})")
    return value


def _line_search(field: ObjectiveField, region: DiskBoxRegion, x: Vec, fx: float, g: Vec,
                 d: Vec, t: float, settings: KernelSettings, t_min: float) -> tuple[Vec, float, float] | None:
    # projected Armijo backtracking along the unit direction d, starting at length t
    while t >= t_min:
        y = project_feasible((x[0] + t * d[0], x[1] + t * d[1]), region)
        if (y[0], y[1]) != (x[0], x[1]):
            fy = _checked(field, y)
            if fy <= fx + settings.armijo_c * (g[0] * (y[0] - x[0]) + g[1] * (y[1] - x[1])):
                return (y[0], y[1]), fy, t
        t *= settings.backtrack_factor
    return None


def _descend(field: ObjectiveField, region: DiskBoxRegion, x: Vec, fx: float,
             settings: KernelSettings, step_init: float) -> tuple[Vec, float, int, bool]:
    # Trial steps are lengths in meters along unit directions, so the first
    # trial spans the disk however small the gradient is. Besides the
    # steepest-descent direction, the two axis directions are tried: the
    # bilinear occupancy term has axis-aligned kinks, and on such a seam the
    # full gradient zigzags while one axis direction still slides along it.
    t_min = 1e-10 * step_init
    t = step_init
    for it in range(1, settings.max_iterations + 1):
        g = field.grad(x)
        gnorm = math.hypot(g[0], g[1])
        if not math.isfinite(gnorm):
            raise NonFiniteObjective(f"gradient is not finite at ({x[0]!r}, {x[1]!r})")
        if gnorm == 0.0:
            return x, fx, it, True
        gm = project_feasible((x[0] - g[0], x[1] - g[1]), region)
        if math.hypot(x[0] - gm[0], x[1] - gm[1]) < settings.grad_tol:
            return x, fx, it, True
        t0 = min(step_init, 2.0 * t)
        best = _line_search(field, region, x, fx, g, (-g[0] / gnorm, -g[1] / gnorm), t0, settings, t_min)
        if best is not None and best[2] >= AXIS_TRIGGER * t0:
            gain = fx - best[1]
            x, fx, t = best
            if gain <= F_RTOL * max(1.0, abs(fx)):
                return x, fx, it, True
            continue
        for d in ((-math.copysign(1.0, g[0]), 0.0), (0.0, -math.copysign(1.0, g[1]))):
            if g[0] * d[0] + g[1] * d[1] == 0.0:
                continue
            cand = _line_search(field, region, x, fx, g, d, t0, settings, t_min)
            if cand is not None and (best is None or cand[1] < best[1]):
                best = cand
        if best is None:
            return x, fx, it, True
        gain = fx - best[1]
        x, fx, t = best
        if gain <= F_RTOL * max(1.0, abs(fx)):
            return x, fx, it, True
    return x, fx, settings.max_iterations, False


def start_points(field: ObjectiveField, region: DiskBoxRegion, ring_starts: int) -> list[PlanarPoint]:
    cx, cy = region.center
    starts = [PlanarPoint(float(cx), float(cy))]
    for k in range(ring_starts):
        a = 2.0 * math.pi * k / ring_starts
        ring = (cx + region.radius * math.cos(a), cy + region.radius * math.sin(a))
        starts.append(project_feasible(ring, region))
    if field.anchor is not None:
        starts.append(project_feasible(field.anchor, region))
    return starts


def minimize(field: ObjectiveField, region: DiskBoxRegion,
             settings: KernelSettings | None = None) -> SolveReport:
    """Best feasible point over projected-gradient runs from several starts.

    Starts are the region center, ``ring_starts`` points spread evenly on the
    disk boundary and, if the field has an anchor, its feasible projection.
    The lowest final value wins; ties keep the earliest start.
    """
    settings = settings or KernelSettings()
    step_init = settings.step_init if settings.step_init is not None else region.radius
    best: tuple[Vec, float] | None = None
    iterations = 0
    converged = True
    starts = start_points(field, region, settings.ring_starts)
    for s in starts:
        x, fx, its, ok = _descend(field, region, (s[0], s[1]), _checked(field, s), settings, step_init)
        iterations += its
        if best is None or fx < best[1]:
            best = (x, fx)
            converged = ok
    assert best is not None
    return SolveReport(PlanarPoint(*best[0]), best[1], iterations, converged, len(starts))


def gradient_check(field: ObjectiveField, p: Vec, h: float) -> float:
    """Relative error between ``field.grad`` and central differences with step ``h``."""
    x, y = float(p[0]), float(p[1])
    fd_x = (field.eval((x + h, y)) - field.eval((x - h, y))) / (2.0 * h)
    fd_y = (field.eval((x, y + h)) - field.eval((x, y - h))) / (2.0 * h)
    gx, gy = field.grad((x, y))
    return math.hypot(gx - fd_x, gy - fd_y) / max(1.0, math.hypot(gx, gy))
