"""Height profile along a fixed sequence of waypoints.

Minimizes the summed squared deviation from the scouting height ``h`` subject
to a per-step climb/descent cap ``c_z``, fixed endpoint heights and the box
``[0, z_max]``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from scoutpath.errors import Infeasible, InvalidConfig, MaxSweepsExceeded


@dataclass(frozen=True)
class AltitudeConfig:
    h: float = 35.0
    c_z: float = 1.0
    z_start: float = 0.0
    z_end: float = 0.0
    z_max: float = 100.0

    def __post_init__(self) -> None:
        if not self.c_z > 0:
            raise InvalidConfig("c_z must be positive")
        for name in ("h", "z_start", "z_end"):
            value = getattr(self, name)
            if not 0.0 <= value <= self.z_max:
                raise InvalidConfig(f"{name}={value!r} must lie in [0, z_max={self.z_max!r}]")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Envelope:
    lower: np.ndarray
    upper: np.ndarray


@dataclass(frozen=True)
class AltitudeProfile:
    heights: list[float]

    def objective(self, h: float) -> float:
        return float(sum((z - h) ** 2 for z in self.heights))


def reachable_envelope(n: int, cfg: AltitudeConfig) -> Envelope:
    """Per-waypoint height bounds implied by the slope cap, endpoints and box."""
    if n < 2:
        raise ValueError("need at least two waypoints")
    if abs(cfg.z_end - cfg.z_start) > cfg.c_z * (n - 1):
        raise Infeasible(
            f"height change {abs(cfg.z_end - cfg.z_start)!r} exceeds {n - 1} steps of {cfg.c_z!r}")
    t = np.arange(n, dtype=np.float64)
    back = (n - 1) - t
    lower = np.maximum.reduce([cfg.z_start - cfg.c_z * t, cfg.z_end - cfg.c_z * back, np.zeros(n)])
    upper = np.minimum.reduce([cfg.z_start + cfg.c_z * t, cfg.z_end + cfg.c_z * back,
                               np.full(n, float(cfg.z_max))])
    # endpoints are pinned exactly; the formulas above can be off by rounding there
    lower[0] = upper[0] = cfg.z_start
    lower[-1] = upper[-1] = cfg.z_end
    if np.any(lower > upper):
        raise Infeasible("reachable height interval is empty at some waypoint")
    return Envelope(lower, upper)


def solve_heights(n: int, cfg: AltitudeConfig) -> AltitudeProfile:
    """Optimal heights: the scouting height clamped into the reachable envelope.

    Both envelope bounds change by at most ``c_z`` per step, so the clamped
    sequence respects the slope cap, and every coordinate attains its own
    best reachable value, so no feasible profile does better.
    """
    env = reachable_envelope(n, cfg)
    return AltitudeProfile(np.clip(cfg.h, env.lower, env.upper).tolist())


def solve_heights_iterative(n: int, cfg: AltitudeConfig, tol: float = 1e-12,
                            max_sweeps: int = 100_000) -> AltitudeProfile:
    """Cyclic coordinate descent on the same program, used to cross-check :func:`solve_heights`.

    Starts from the straight ramp between the endpoints and, sweep after
    sweep, moves each interior height to ``h`` clamped by its neighbours'
    slope windows and the box.
    """
    reachable_envelope(n, cfg)  # raises on infeasible instances
    c, zmax, h = cfg.c_z, cfg.z_max, cfg.h
    z = np.linspace(cfg.z_start, cfg.z_end, n).tolist()
    z[0], z[-1] = cfg.z_start, cfg.z_end
    for _ in range(max_sweeps):
        change = 0.0
        for t in range(1, n - 1):
            lo = max(z[t - 1] - c, z[t + 1] - c, 0.0)
            hi = min(z[t - 1] + c, z[t + 1] + c, zmax)
            new = min(max(h, lo), hi)
            change = max(change, abs(new - z[t]))
            z[t] = new
        if change < tol:
            return AltitudeProfile(z)
    raise MaxSweepsExceeded(f"coordinate descent did not settle within {max_sweeps} sweeps")
