import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import direct_objective, uf_connected
from scoutpath.errors import (
    InvalidConfig,
    MaxStepsExceeded,
    StallDetected,
    StartOccupied,
    TargetOccupied,
)
from scoutpath.grid import OccupancyGrid2D, PlanarPoint, gen_random, inflate
from scoutpath.kernel import gradient_check
from scoutpath.planner import (
    PlannerConfig,
    Weights,
    feasibility_oracle,
    plan_leg,
    plan_path,
    step_objective,
    weight_schedule,
)

SQRT2 = math.sqrt(2.0)


def empty(n=20):
    return OccupancyGrid2D(np.zeros((n, n)))


def wall_grid():
    """30x30 map with a wall at column 15 blocking rows 0..24; the gap is at the top."""
    v = np.zeros((30, 30))
    v[15, :25] = 1.0
    return inflate(OccupancyGrid2D(v), 1.0, 0.5)


# --- objective and weights -------------------------------------------------------------------------

def test_step_objective_matches_direct_sum():
    rng = np.random.default_rng(3)
    g = OccupancyGrid2D(rng.random((8, 6)), 0.5, (1.0, -2.0))
    target, w, d0 = (3.1, -0.4), Weights(2.0, 3.0), 4.0
    f = step_objective(g, target, w, d0)
    for _ in range(50):
        p = (rng.uniform(1.0, 5.0), rng.uniform(-2.0, 1.0))
        ref = direct_objective(g.values, 0.5, (1.0, -2.0), target, 2.0, 3.0, d0, p)
        assert f.eval(p) == pytest.approx(ref, rel=1e-12, abs=1e-12)


def test_step_objective_at_target_on_empty_grid_is_zero():
    f = step_objective(empty(), (5.0, 5.0), Weights(1.0, 5.0), 3.0)
    assert f.eval((5.0, 5.0)) == 0.0
    # one d0 away costs exactly w1
    assert f.eval((8.0, 5.0)) == pytest.approx(1.0)
    assert f.anchor == PlanarPoint(5.0, 5.0)


def test_step_objective_gradient_off_seams():
    rng = np.random.default_rng(5)
    g = OccupancyGrid2D(rng.random((10, 10)))
    f = step_objective(g, (7.0, 2.0), Weights(1.5, 4.0), 6.0)
    for _ in range(100):
        # keep 0.1 cell away from the lattice of cell centers
        p = (rng.integers(0, 9) + 0.5 + rng.uniform(0.1, 0.9), rng.integers(0, 9) + 0.5 + rng.uniform(0.1, 0.9))
        assert gradient_check(f, p, 1e-6) <= 1e-5


def test_step_objective_rejects_bad_d0():
    with pytest.raises(ValueError):
        step_objective(empty(), (1, 1), Weights(1, 1), 0.0)


def test_weight_schedule_examples():
    cfg = PlannerConfig(w1_base=1.0, w2=5.0, weight_gain=4.0)
    assert weight_schedule(10.0, 10.0, cfg) == Weights(1.0, 5.0)
    assert weight_schedule(5.0, 10.0, cfg) == Weights(3.0, 5.0)
    assert weight_schedule(0.0, 10.0, cfg) == Weights(5.0, 5.0)
    # farther than the initial distance does not drop below the base weight
    assert weight_schedule(15.0, 10.0, cfg) == Weights(1.0, 5.0)


@given(st.floats(0, 50), st.floats(0, 50), st.floats(0.1, 50))
def test_weight_schedule_monotone(d_a, d_b, d0):
    cfg = PlannerConfig()
    wa, wb = weight_schedule(d_a, d0, cfg), weight_schedule(d_b, d0, cfg)
    if d_a <= d_b:
        assert wa.w1 >= wb.w1
    assert wa.w2 == wb.w2 == cfg.w2


@pytest.mark.parametrize("kwargs", [
    {"c_s": 0.0}, {"w2": -1.0}, {"occupancy_threshold": 1.5}, {"max_steps": 0},
    {"stall_window": 0}, {"inflation_radius": -1.0},
])
def test_config_validation(kwargs):
    with pytest.raises(InvalidConfig):
        PlannerConfig(**kwargs)


def test_config_derived_defaults():
    cfg = PlannerConfig(c_s=2.0)
    assert cfg.goal_tolerance == 2.0
    assert cfg.stall_eps == pytest.approx(0.2)


# --- single leg ------------------------------------------------------------------------------------

def test_adjacent_target_snaps_in_one_step():
    path = plan_leg(empty(), (5.5, 5.5), (6.5, 5.5), PlannerConfig())
    assert path.waypoints == [(5.5, 5.5), (6.5, 5.5)]
    assert len(path.steps) == 1
    assert len(path.objective_values) == 1


def test_empty_grid_path_is_collinear():
    start, target = (1.5, 2.5), (17.0, 13.0)
    path = plan_leg(empty(), start, target, PlannerConfig())
    ux, uy = target[0] - start[0], target[1] - start[1]
    norm = math.hypot(ux, uy)
    for p in path.waypoints:
        lateral = abs((p[0] - start[0]) * uy - (p[1] - start[1]) * ux) / norm
        assert lateral <= 1e-6
    # full-length steps except the last one
    lengths = path.step_lengths()
    assert all(length == pytest.approx(SQRT2, abs=1e-9) for length in lengths[:-2])


def test_endpoints_bit_exact():
    start, target = (0.3, 0.7), (18.9, 19.1)
    path = plan_leg(empty(), start, target, PlannerConfig())
    assert path.waypoints[0] == start
    assert path.waypoints[-1] == target


def test_path_invariants_on_random_map():
    g = inflate(gen_random((30, 30), 0.1, seed=4), 1.0, 0.5)
    cfg = PlannerConfig()
    start, target = None, None
    free = [(i, j) for i in range(30) for j in range(30) if g.values[i, j] < 0.5]
    rng = np.random.default_rng(0)
    while True:
        a, b = (free[k] for k in rng.choice(len(free), 2, replace=False))
        start, target = g.cell_center(*a), g.cell_center(*b)
        if math.dist(start, target) > 10 and feasibility_oracle(g, start, target, 0.5):
            break
    try:
        path = plan_leg(g, start, target, cfg)
        waypoints, steps = path.waypoints, path.steps
        assert waypoints[-1] == target
        assert len(path.objective_values) == len(steps)
    except StallDetected as exc:
        waypoints, steps = exc.partial, exc.steps
    assert waypoints[0] == start
    for a, b in zip(waypoints, waypoints[1:]):
        assert math.dist(a, b) <= cfg.c_s + 1e-9
    for p in waypoints:
        assert g.contains(p)
    for s in steps:
        assert s.objective_after <= s.objective_before
        assert s.displacement <= cfg.c_s + 1e-9


def test_step_records_replay():
    g = inflate(gen_random((25, 25), 0.1, seed=9), 1.0, 0.5)
    start, target = (1.5, 1.5), (22.5, 20.5)
    if not feasibility_oracle(g, start, target, 0.5) or g.occupancy_at(start) >= 0.5:
        pytest.skip("seeded map does not connect the endpoints")
    cfg = PlannerConfig()
    try:
        path = plan_leg(g, start, target, cfg)
        steps, waypoints = path.steps, path.waypoints
    except StallDetected as exc:
        steps, waypoints = exc.steps, exc.partial
    d0 = math.dist(start, target)
    for t, s in enumerate(steps):
        assert s.index == t + 1
        assert s.center == waypoints[t]
        assert s.weights == weight_schedule(math.dist(s.center, target), d0, cfg)
        f = step_objective(g, target, s.weights, d0)
        assert s.objective_before == f.eval(s.center)


def test_start_occupied():
    v = np.zeros((10, 10))
    v[2, 2] = 1.0
    with pytest.raises(StartOccupied) as info:
        plan_leg(OccupancyGrid2D(v), (2.5, 2.5), (8.5, 8.5), PlannerConfig())
    assert info.value.partial == [(2.5, 2.5)]


def test_target_occupied():
    v = np.zeros((10, 10))
    v[8, 8] = 1.0
    with pytest.raises(TargetOccupied):
        plan_leg(OccupancyGrid2D(v), (2.5, 2.5), (8.5, 8.5), PlannerConfig())


def test_wall_stalls_with_partial_path():
    g = wall_grid()
    assert feasibility_oracle(g, (5.5, 5.5), (25.5, 5.5), 0.5)
    with pytest.raises(StallDetected) as info:
        plan_leg(g, (5.5, 5.5), (25.5, 5.5), PlannerConfig())
    exc = info.value
    assert exc.partial[0] == (5.5, 5.5)
    assert len(exc.partial) == len(exc.steps) + 1
    assert all(p[0] < 15.0 for p in exc.partial)


def test_max_steps_exceeded():
    with pytest.raises(MaxStepsExceeded) as info:
        plan_leg(empty(), (1.5, 1.5), (18.5, 18.5), PlannerConfig(max_steps=3))
    assert len(info.value.partial) == 4


# --- chained legs ----------------------------------------------------------------------------------

def test_intermediate_waypoint_dedup_and_visit():
    cfg = PlannerConfig(intermediate_waypoints=((10.0, 15.0),))
    path = plan_path(empty(), (2.0, 2.0), (18.0, 2.0), cfg)
    assert (10.0, 15.0) in path.waypoints
    assert path.waypoints.count((10.0, 15.0)) == 1
    assert all(a != b for a, b in zip(path.waypoints, path.waypoints[1:]))
    assert [s.index for s in path.steps] == list(range(1, len(path.steps) + 1))
    # each leg may add one snap point that has no step of its own
    assert len(path.steps) + 1 <= len(path.waypoints) <= len(path.steps) + 3


def test_intermediate_waypoint_routes_around_wall():
    g = wall_grid()
    cfg = PlannerConfig(intermediate_waypoints=((15.5, 27.5),))
    path = plan_path(g, (5.5, 5.5), (25.5, 5.5), cfg)
    assert path.waypoints[-1] == (25.5, 5.5)
    assert max(g.occupancy_at(p) for p in path.waypoints) < 0.5


def test_failure_in_later_leg_reports_leg_and_prefix():
    g = wall_grid()
    cfg = PlannerConfig(intermediate_waypoints=((5.5, 15.5),))
    with pytest.raises(StallDetected) as info:
        plan_path(g, (5.5, 5.5), (25.5, 15.5), cfg)
    exc = info.value
    assert exc.leg == 1
    assert exc.detail.startswith("leg 1:")
    assert exc.partial[0] == (5.5, 5.5)
    assert (5.5, 15.5) in exc.partial


def test_occupied_intermediate_waypoint():
    g = wall_grid()
    cfg = PlannerConfig(intermediate_waypoints=((15.5, 5.5),))
    with pytest.raises(TargetOccupied):
        plan_path(g, (5.5, 5.5), (25.5, 5.5), cfg)


# --- feasibility oracle ----------------------------------------------------------------------------

def test_feasibility_full_wall_is_false():
    v = np.zeros((10, 10))
    v[5, :] = 1.0
    assert not feasibility_oracle(OccupancyGrid2D(v), (1.5, 1.5), (8.5, 8.5), 0.5)


def test_feasibility_gap_is_true():
    v = np.zeros((10, 10))
    v[5, :9] = 1.0
    assert feasibility_oracle(OccupancyGrid2D(v), (1.5, 1.5), (8.5, 1.5), 0.5)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.1, 0.6))
def test_feasibility_matches_union_find(seed, density):
    g = gen_random((12, 9), density, seed)
    rng = np.random.default_rng(seed)
    a = (int(rng.integers(12)), int(rng.integers(9)))
    b = (int(rng.integers(12)), int(rng.integers(9)))
    free = g.values < 0.5
    assert feasibility_oracle(g, g.cell_center(*a), g.cell_center(*b), 0.5) == uf_connected(free, a, b)


def test_city_scenario_direct_stalls_chained_succeeds():
    from scoutpath.grid import gen_city_block, project_to_plane

    g = inflate(project_to_plane(gen_city_block((100, 100, 50), 12, seed=11)), 1.0, 0.5)
    start, target = (3.5, 3.5), (96.5, 96.5)
    with pytest.raises(StallDetected):
        plan_path(g, start, target, PlannerConfig())
    path = plan_path(g, start, target, PlannerConfig(intermediate_waypoints=((97.5, 75.5),)))
    assert path.waypoints[0] == start and path.waypoints[-1] == target
    assert max(g.occupancy_at(p) for p in path.waypoints) < 0.5
