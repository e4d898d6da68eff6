"""Acceptance criteria 1-8. Each test prints one PASS/FAIL line (also repeated in the summary)."""

import json
import math
import random
import time

import numpy as np
import pytest

from conftest import REPO
from oracles import dense_best, dense_disk_samples, direct_objective, grid_search_heights
from scoutpath.altitude import AltitudeConfig, solve_heights, solve_heights_iterative
from scoutpath.cli import main
from scoutpath.errors import PlannerError
from scoutpath.grid import gen_random, inflate
from scoutpath.kernel import DiskBoxRegion, gradient_check, minimize
from scoutpath.planner import PlannerConfig, Weights, feasibility_oracle, plan_path, step_objective

pytestmark = pytest.mark.acceptance

SQRT2 = math.sqrt(2.0)
SCENARIO = REPO / "scenarios" / "city_block.json"


def _pair(grid, rng):
    free = np.argwhere(grid.values < 0.5)
    while True:
        a, b = free[rng.choice(len(free), 2, replace=False)]
        s, t = grid.cell_center(*a), grid.cell_center(*b)
        if math.dist(s, t) > 10.0 and feasibility_oracle(grid, s, t, 0.5):
            return s, t


@pytest.fixture(scope="module")
def random_runs():
    """Criterion-1 workload: 100 seeded 50x50 maps, density 0.15, one feasible pair each.

    Runs ending in a stall keep their partial path; those steps were still
    planned and accepted, so they count for the step-cap and descent checks.
    """
    cfg = PlannerConfig()
    runs = []
    t0 = time.perf_counter()
    for seed in range(100):
        grid = inflate(gen_random((50, 50), 0.15, seed), cfg.inflation_radius, cfg.occupancy_threshold)
        s, t = _pair(grid, np.random.default_rng(seed))
        try:
            path = plan_path(grid, s, t, cfg)
            runs.append(("reached", path.waypoints, path.steps))
        except PlannerError as exc:
            runs.append((type(exc).__name__, exc.partial, exc.steps))
    return runs, time.perf_counter() - t0


def test_c1_step_cap(random_runs, criterion_log):
    runs, elapsed = random_runs
    worst = max(math.dist(a, b) for _, wps, _ in runs for a, b in zip(wps, wps[1:]))
    reached = sum(r[0] == "reached" for r in runs)
    ok = worst <= SQRT2 + 1e-9 and elapsed < 60.0
    criterion_log("C1 step cap", ok, f"max step {worst:.12f} (cap {SQRT2 + 1e-9:.12f}), "
                  f"{reached}/100 reached, {elapsed:.1f} s")
    assert worst <= SQRT2 + 1e-9
    assert elapsed < 60.0


def test_c2_altitude_reference(criterion_log):
    t0 = time.perf_counter()
    cfg = AltitudeConfig(h=35.0, c_z=1.0, z_start=5.0, z_end=5.0, z_max=100.0)
    z = solve_heights(200, cfg).heights
    zi = solve_heights_iterative(200, cfg).heights
    elapsed = time.perf_counter() - t0
    ramp = all(z[t + 1] - z[t] == 1.0 for t in range(30))
    plateau = all(v == 35.0 for v in z[30:170])
    symmetric = z == z[::-1]
    agree = max(abs(a - b) for a, b in zip(z, zi))
    ok = ramp and plateau and symmetric and agree <= 1e-6 and elapsed < 1.0
    criterion_log("C2 altitude reference profile", ok,
                  f"ramp={ramp} plateau={plateau} symmetric={symmetric} solver gap={agree:.1e}, {elapsed:.2f} s")
    assert ok


def test_c3_altitude_oracle(criterion_log):
    pitch = 1e-3
    rng = random.Random(2024)
    worst_obj, worst_gap = -math.inf, 0.0
    t0 = time.perf_counter()
    for _ in range(200):
        n = rng.randint(2, 20)
        c_z = pitch * rng.randint(200, 3000)
        z_max = pitch * rng.randint(5000, 20000)
        top = int(round(z_max / pitch))
        k0 = rng.randint(0, top)
        reach = int(round(c_z / pitch)) * (n - 1)
        k1 = min(max(k0 + rng.randint(-reach, reach), 0), top)
        cfg = AltitudeConfig(h=pitch * rng.randint(0, top), c_z=c_z, z_start=pitch * k0, z_end=pitch * k1,
                             z_max=z_max)
        closed = solve_heights(n, cfg)
        dense = grid_search_heights(n, cfg.h, c_z, cfg.z_start, cfg.z_end, z_max, pitch=pitch)
        worst_obj = max(worst_obj, closed.objective(cfg.h) - dense)
        it = solve_heights_iterative(n, cfg).heights
        worst_gap = max(worst_gap, max(abs(a - b) for a, b in zip(closed.heights, it)))
    elapsed = time.perf_counter() - t0
    ok = worst_obj <= 1e-6 and worst_gap <= 1e-6 and elapsed < 30.0
    criterion_log("C3 altitude oracle", ok, f"max (closed - dense) {worst_obj:.2e}, "
                  f"max |closed - iterative| {worst_gap:.1e}, {elapsed:.1f} s")
    assert ok


def test_c4_gradient(criterion_log):
    rng = np.random.default_rng(4)
    worst = 0.0
    t0 = time.perf_counter()
    for g in range(20):
        grid = inflate(gen_random((30, 30), 0.2, seed=100 + g), 1.0, 0.5)
        # smooth the binary map a little so the occupancy term has nonzero slopes everywhere
        soft = type(grid)(np.clip(grid.values * 0.7 + rng.random(grid.values.shape) * 0.3, 0, 1))
        target = tuple(rng.uniform(0, 30, 2))
        w = Weights(rng.uniform(0.5, 5.0), rng.uniform(1.0, 8.0))
        f = step_objective(soft, target, w, rng.uniform(5.0, 40.0))
        for _ in range(50):
            # interior points at least 0.1 cell from every seam of the center lattice
            i, j = rng.integers(0, 29, 2)
            p = (i + 0.5 + rng.uniform(0.1, 0.9), j + 0.5 + rng.uniform(0.1, 0.9))
            worst = max(worst, gradient_check(f, p, 1e-6))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-5 and elapsed < 10.0
    criterion_log("C4 gradient vs central differences", ok, f"1000 points, max rel err {worst:.2e}, {elapsed:.2f} s")
    assert ok


def test_c5_descent(random_runs, criterion_log):
    runs, _ = random_runs
    steps = [s for _, _, st in runs for s in st]
    violations = sum(s.objective_after > s.objective_before for s in steps)
    criterion_log("C5 per-step descent", violations == 0, f"{violations} violations over {len(steps)} steps")
    assert violations == 0


def test_c6_one_step_oracle(criterion_log):
    worst = -math.inf
    t0 = time.perf_counter()
    for seed in range(50):
        rng = np.random.default_rng(seed)
        grid = inflate(gen_random((20, 20), 0.2, seed=seed), 1.0, 0.5)
        center = tuple(rng.uniform(1, 19, 2))
        target = tuple(rng.uniform(0, 20, 2))
        d0 = max(math.dist(center, target), 1.0) * rng.uniform(1.0, 2.0)
        w = Weights(rng.uniform(0.5, 5.0), rng.uniform(1.0, 8.0))
        region = DiskBoxRegion(center, SQRT2, grid.bounds)
        rep = minimize(step_objective(grid, target, w, d0), region)
        samples = dense_disk_samples(center, SQRT2, region.box, count=10_000, seed=seed)
        best = dense_best(lambda p: direct_objective(grid.values, 1.0, (0.0, 0.0), target, w.w1, w.w2, d0, p),
                          samples)
        worst = max(worst, rep.value - best)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-3 and elapsed < 30.0
    criterion_log("C6 one-step oracle", ok, f"max (kernel - dense best) {worst:.2e}, {elapsed:.1f} s")
    assert ok


def _city_run(workdir, capsys):
    m, traj, svg = workdir / "city.json", workdir / "traj.json", workdir / "city.svg"
    assert main(["gen-city", "--size", "100", "100", "50", "--blocks", "12", "--seed", "11", "--out", str(m)]) == 0
    t0 = time.perf_counter()
    plan_code = main(["plan", "--map", str(m), "--start", "3.5", "3.5", "5", "--target", "96.5", "96.5", "5",
                      "--config", str(SCENARIO), "--out", str(traj), "--svg", str(svg)])
    check_code = main(["check", "--traj", str(traj), "--map", str(m), "--config", str(SCENARIO)])
    elapsed = time.perf_counter() - t0
    capsys.readouterr()
    return plan_code, check_code, traj, svg, elapsed


def test_c7_city_mission(tmp_path, capsys, criterion_log):
    plan_code, check_code, traj, _, elapsed = _city_run(tmp_path, capsys)
    doc = json.loads(traj.read_text()) if plan_code == 0 else {"metrics": {}, "heights": []}
    clearance = doc["metrics"].get("min_clearance_value", math.inf)
    plateau = max(doc["heights"], default=None)
    ok = plan_code == 0 and check_code == 0 and clearance < 0.5 and plateau == 35.0 and elapsed < 10.0
    criterion_log("C7 city-block mission", ok, f"plan exit {plan_code}, check exit {check_code}, "
                  f"min_clearance_value {clearance:.4f}, plateau {plateau}, {elapsed:.1f} s")
    assert ok


def test_c8_determinism(tmp_path, capsys, criterion_log):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir()
    b.mkdir()
    first, second = _city_run(a, capsys), _city_run(b, capsys)
    same_traj = first[2].read_bytes() == second[2].read_bytes()
    same_svg = first[3].read_bytes() == second[3].read_bytes()
    ok = first[0] == second[0] == 0 and same_traj and same_svg
    criterion_log("C8 determinism", ok, f"trajectory identical={same_traj}, svg identical={same_svg}")
    assert ok
