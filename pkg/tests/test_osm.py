import heapq
import math

import numpy as np
import pytest

from crowdkit.floorfield import FloorField, ScalarGrid, rasterize_speed, solve_eikonal
from crowdkit.geometry import Circle, Point2, Rectangle
from crowdkit.models.osm import (OsmAgent, OsmModel, agent_potential,
                                 aggregate_potential, ca_next_position,
                                 next_position, obstacle_potential,
                                 sample_step_length, step_duration)
from crowdkit.scenario import AgentAttributes, OsmParams, Topography
from crowdkit.engine import SimulationState

from oracles import brute_force_disc_argmin

RNG = np.random.default_rng(12345)
PARAMS = OsmParams(sigma=0.0)


def make_agent(agent_id, x, y, step=1.0288, v0=1.34, r=0.2, target="t"):
    return OsmAgent(id=agent_id, position=Point2(x, y), torso_radius=r,
                    free_flow_speed=v0, target_id=target, spawn_time=0.0,
                    step_length=step, next_event_time=0.0)


def planar_field(width=30.0, height=10.0, h=0.1, slope_x=1.0):
    """u = slope_x * x, built directly (exact, no solver error)."""
    nx, ny = int(width / h), int(height / h)
    grid = ScalarGrid(Point2(0, 0), h, nx, ny, np.zeros((nx, ny)))
    xs, _ = grid.cell_centers()
    grid.values = slope_x * xs
    return FloorField(grid=grid)


def open_topo(width=30.0, height=10.0, obstacles=()):
    return Topography(bounds=Rectangle(Point2(0, 0), width, height),
                      obstacles=tuple(obstacles))


# ----------------------------------------------------------------- step length

def test_step_length_degenerate_constants():
    p = OsmParams(beta0=0.5, beta1=0.0, sigma=0.0)
    assert sample_step_length(2.71, p, RNG) == 0.5


def test_step_length_default_constants():
    s = sample_step_length(1.34, PARAMS, RNG)
    assert s == pytest.approx(0.4625 + 0.4226 * 1.34, abs=1e-12)
    assert s == pytest.approx(1.0288, abs=1e-3)


def test_step_length_monte_carlo_mean():
    p = OsmParams(sigma=0.2)
    rng = np.random.default_rng(99)
    n = 100_000
    draws = [sample_step_length(1.34, p, rng) for _ in range(n)]
    expected = p.beta0 + p.beta1 * 1.34
    se = p.sigma / math.sqrt(n)
    assert abs(np.mean(draws) - expected) <= 3 * se


def test_step_length_clamped_nonnegative():
    p = OsmParams(beta0=0.11, beta1=0.001, sigma=5.0)
    rng = np.random.default_rng(5)
    assert min(sample_step_length(1.0, p, rng) for _ in range(300)) >= 0.1


# --------------------------------------------------------------- step duration

def test_step_duration_arithmetic():
    assert step_duration(make_agent(1, 0, 0, step=1.0, v0=2.0)) == 0.5
    assert step_duration(make_agent(1, 0, 0, step=1.0288, v0=1.34)) \
        == pytest.approx(0.76776, abs=1e-4)


def test_step_duration_unchanged_by_crowding():
    # crowding shortens steps, never the returned duration
    agent = make_agent(1, 5, 5)
    before = step_duration(agent)
    agent.position = Point2(5.1, 5.0)  # moved a shortened step
    assert step_duration(agent) == before


# ------------------------------------------------------------ agent potential

def test_agent_potential_zero_beyond_personal_space():
    a, b = make_agent(1, 0, 0), make_agent(2, 0, 0)
    for d in (PARAMS.delta_per, PARAMS.delta_per + 0.1, 5.0):
        assert agent_potential(Point2(d, 0), a, b, PARAMS) == 0.0


def test_agent_potential_torso_zone_dominates():
    a, b = make_agent(1, 0, 0), make_agent(2, 0, 0)
    torso = agent_potential(Point2(0.4 - 1e-6, 0), a, b, PARAMS)
    intimate = agent_potential(Point2(PARAMS.delta_int - 1e-6, 0), a, b, PARAMS)
    assert torso > intimate
    assert torso - intimate >= PARAMS.h_tor - PARAMS.h_int - PARAMS.h_per


def test_agent_potential_monotone_nonincreasing():
    rng = np.random.default_rng(17)
    for _ in range(100):
        p = OsmParams(
            sigma=0.0,
            delta_int=float(rng.uniform(0.4, 0.8)),
            delta_per=float(rng.uniform(0.9, 2.0)),
            h_per=float(rng.uniform(0.5, 2)),
            h_int=float(rng.uniform(5, 40)),
            h_tor=float(rng.uniform(100, 2000)),
        )
        a, b = make_agent(1, 0, 0), make_agent(2, 0, 0)
        ds = np.linspace(0.0, p.delta_per + 0.5, 200)
        vals = [agent_potential(Point2(d, 0), a, b, p) for d in ds]
        assert all(v1 >= v2 - 1e-12 for v1, v2 in zip(vals, vals[1:]))


# --------------------------------------------------------- obstacle potential

def test_obstacle_potential_far_is_zero():
    topo = open_topo(obstacles=[Rectangle(Point2(10, 4), 2, 2)])
    assert obstacle_potential(Point2(2.0, 2.0), topo, PARAMS, 0.2) == 0.0


def test_obstacle_potential_inside_is_infinite():
    topo = open_topo(obstacles=[Rectangle(Point2(10, 4), 2, 2)])
    assert math.isinf(obstacle_potential(Point2(11, 5), topo, PARAMS, 0.2))
    # within a torso radius of the boundary is blocked too
    assert math.isinf(obstacle_potential(Point2(9.9, 5), topo, PARAMS, 0.2))


def test_obstacle_potential_is_max_not_sum():
    o1 = Rectangle(Point2(4.0, 4.0), 1, 2)
    o2 = Rectangle(Point2(5.6, 4.0), 1, 2)
    topo_both = open_topo(obstacles=[o1, o2])
    x = Point2(5.3, 5.0)  # between the two walls
    p1 = obstacle_potential(x, open_topo(obstacles=[o1]), PARAMS, 0.2)
    p2 = obstacle_potential(x, open_topo(obstacles=[o2]), PARAMS, 0.2)
    both = obstacle_potential(x, topo_both, PARAMS, 0.2)
    assert p1 > 0 and p2 > 0
    assert both == max(p1, p2)
    assert both < p1 + p2


# -------------------------------------------------------- aggregate potential

def test_aggregate_reduces_to_floor_field_alone():
    ff = planar_field()
    topo = open_topo()
    agent = make_agent(1, 12.0, 5.0)
    x = Point2(11.0, 5.3)
    assert aggregate_potential(x, agent, [], ff, topo, PARAMS) \
        == pytest.approx(ff.sample(x), abs=1e-12)


def test_aggregate_additive_over_neighbors():
    ff = planar_field()
    topo = open_topo()
    agent = make_agent(1, 12.0, 5.0)
    na = make_agent(2, 11.5, 5.2)
    nb = make_agent(3, 12.3, 4.8)
    x = Point2(11.8, 5.0)
    base = aggregate_potential(x, agent, [], ff, topo, PARAMS)
    with_a = aggregate_potential(x, agent, [na], ff, topo, PARAMS)
    with_b = aggregate_potential(x, agent, [nb], ff, topo, PARAMS)
    with_ab = aggregate_potential(x, agent, [na, nb], ff, topo, PARAMS)
    assert with_ab == pytest.approx(with_a + with_b - base, abs=1e-9)


def test_aggregate_overlap_exceeds_clear_point_by_torso_height():
    ff = planar_field()
    topo = open_topo()
    agent = make_agent(1, 12.0, 5.0)
    other = make_agent(2, 11.0, 5.0)
    overlapping = aggregate_potential(Point2(11.1, 5.0), agent, [other], ff,
                                      topo, PARAMS)
    one_diameter_away = aggregate_potential(Point2(11.0 + 0.8, 5.0), agent,
                                            [other], ff, topo, PARAMS)
    assert overlapping - one_diameter_away >= PARAMS.h_tor


# --------------------------------------------------------------- next position

def test_next_position_descends_planar_field():
    ff = planar_field()
    topo = open_topo()
    agent = make_agent(1, 15.0, 5.0)
    chosen = next_position(agent, [], ff, topo, PARAMS)
    assert math.hypot(chosen.x - (15.0 - agent.step_length),
                      chosen.y - 5.0) <= 1e-9


def test_next_position_encircled_stays_put():
    # six touching neighbors; stride short enough that every moving
    # candidate overlaps one of them
    ff = planar_field()
    topo = open_topo()
    agent = make_agent(1, 15.0, 5.0, step=0.6)
    ring = [make_agent(2 + k,
                       15.0 + 0.4 * math.cos(k * math.pi / 3),
                       5.0 + 0.4 * math.sin(k * math.pi / 3))
            for k in range(6)]
    chosen = next_position(agent, ring, ff, topo, PARAMS)
    assert chosen == agent.position


def test_next_position_never_overlaps_or_leaves_disc():
    rng = np.random.default_rng(31)
    ff = planar_field()
    topo = open_topo(obstacles=[Rectangle(Point2(13.0, 3.0), 1.0, 4.0)])
    for _ in range(30):
        agent = make_agent(1, float(rng.uniform(8, 20)), float(rng.uniform(1, 9)))
        neighbors = [make_agent(2 + k, agent.position.x + float(rng.uniform(-2, 2)),
                                agent.position.y + float(rng.uniform(-2, 2)))
                     for k in range(8)]
        neighbors = [n for n in neighbors
                     if math.hypot(n.position.x - agent.position.x,
                                   n.position.y - agent.position.y) >= 0.4]
        if math.isinf(aggregate_potential(agent.position, agent, neighbors,
                                          ff, topo, PARAMS)):
            continue
        chosen = next_position(agent, neighbors, ff, topo, PARAMS)
        step = math.hypot(chosen.x - agent.position.x, chosen.y - agent.position.y)
        assert step <= agent.step_length + 1e-9
        for n in neighbors:
            if chosen != agent.position:
                assert math.hypot(chosen.x - n.position.x,
                                  chosen.y - n.position.y) >= 0.4 - 1e-12


def test_next_position_potential_never_increases():
    rng = np.random.default_rng(77)
    ff = planar_field()
    topo = open_topo()
    for _ in range(20):
        agent = make_agent(1, float(rng.uniform(5, 25)), float(rng.uniform(1, 9)))
        neighbors = [make_agent(2 + k, float(rng.uniform(5, 25)),
                                float(rng.uniform(1, 9))) for k in range(6)]
        before = aggregate_potential(agent.position, agent, neighbors, ff,
                                     topo, PARAMS)
        chosen = next_position(agent, neighbors, ff, topo, PARAMS)
        after = aggregate_potential(chosen, agent, neighbors, ff, topo, PARAMS)
        assert after <= before + 1e-9


def test_next_position_matches_brute_force_oracle():
    rng = np.random.default_rng(4242)
    topo = open_topo(obstacles=[Rectangle(Point2(16.0, 4.0), 1.5, 3.0)])
    speed = rasterize_speed(topo, 0.1)
    ff = solve_eikonal(speed, [Rectangle(Point2(0.0, 0.0), 0.2, 10.0)])
    for _ in range(3):
        agent = make_agent(1, float(rng.uniform(12, 20)), float(rng.uniform(2, 8)))
        neighbors = []
        for k in range(6):
            q = Point2(agent.position.x + float(rng.uniform(-1.5, 1.5)),
                       agent.position.y + float(rng.uniform(-1.5, 1.5)))
            if math.hypot(q.x - agent.position.x, q.y - agent.position.y) >= 0.4:
                neighbors.append(make_agent(2 + k, q.x, q.y))
        if math.isinf(aggregate_potential(agent.position, agent, neighbors,
                                          ff, topo, PARAMS)):
            continue
        chosen = next_position(agent, neighbors, ff, topo, PARAMS)
        engine_value = aggregate_potential(chosen, agent, neighbors, ff, topo, PARAMS)
        brute_value, _, max_step, _ = brute_force_disc_argmin(
            agent, neighbors, ff, topo, PARAMS)
        gap = _candidate_gap(agent.step_length, PARAMS)
        spacing = 2 * agent.step_length / 199
        tolerance = max_step * math.ceil(gap / spacing)
        assert engine_value <= brute_value + tolerance


def _candidate_gap(step, params):
    """Worst-case distance from a disc point to the nearest ring candidate."""
    radial = step / params.rings / 2
    arc = step * math.pi / params.points_per_ring
    return math.hypot(radial, arc)


# ------------------------------------------------------------------- CA mimic

def test_ca_von_neumann_descends_exactly():
    ff = planar_field()
    topo = open_topo()
    agent = make_agent(1, 15.0, 5.0)
    p = OsmParams(sigma=0.0, ca_mode="vonNeumann")
    chosen = ca_next_position(agent, [], ff, topo, p)
    assert chosen == Point2(15.0 - agent.step_length, 5.0)


def test_ca_all_candidates_occupied_stays():
    ff = planar_field()
    topo = open_topo()
    p = OsmParams(sigma=0.0, ca_mode="moore")
    agent = make_agent(1, 15.0, 5.0, step=0.5)
    s = agent.step_length
    occupied = []
    for k, (dx, dy) in enumerate([(1, 0), (-1, 0), (0, 1), (0, -1),
                                  (1, 1), (1, -1), (-1, 1), (-1, -1)]):
        occupied.append(make_agent(2 + k, 15.0 + dx * s, 5.0 + dy * s))
    chosen = ca_next_position(agent, occupied, ff, topo, p)
    assert chosen == agent.position


def test_ca_moore_uses_diagonals():
    # diagonal target direction: the diagonal lattice point wins
    nx = ny = 100
    grid = ScalarGrid(Point2(0, 0), 0.1, nx, ny, np.zeros((nx, ny)))
    xs, ys = grid.cell_centers()
    grid.values = (10 - xs) + (10 - ys)  # decreasing toward upper right
    ff = FloorField(grid=grid)
    topo = open_topo(10, 10)
    p = OsmParams(sigma=0.0, ca_mode="moore")
    agent = make_agent(1, 5.0, 5.0, step=0.5)
    chosen = ca_next_position(agent, [], ff, topo, p)
    assert chosen == Point2(5.5, 5.5)


# ------------------------------------------------------------ event-driven run

class _RecordingModel(OsmModel):
    """Keeps agents in place and records the event execution order."""

    def __init__(self, params):
        super().__init__(params)
        self.executed = []

    def _decide(self, agent, state):
        self.executed.append((agent.id, agent.next_event_time))
        return agent.position


def _bare_state():
    topo = open_topo()
    return SimulationState(topography=topo, floor_fields={}, rng=RNG,
                           agent_attributes=AgentAttributes(), targets={})


def test_event_queue_order_with_spawn_order_ties():
    model = _RecordingModel(PARAMS)
    state = _bare_state()
    a = make_agent(1, 1, 1, step=0.5, v0=1.0)   # duration 0.5
    b = make_agent(2, 2, 2, step=1.0, v0=1.0)   # duration 1.0
    a.next_event_time, b.next_event_time = 0.5, 1.0
    state.add_agent(a)
    state.add_agent(b)
    model.pre_loop(state)
    model.update(state, 2.0)
    assert model.executed == [(1, 0.5), (1, 1.0), (2, 1.0), (1, 1.5),
                              (1, 2.0), (2, 2.0)]


def test_update_empty_queue_is_noop():
    model = _RecordingModel(PARAMS)
    state = _bare_state()
    model.pre_loop(state)
    model.update(state, 100.0)
    assert model.executed == []


def test_update_ignores_events_beyond_until():
    model = _RecordingModel(PARAMS)
    state = _bare_state()
    a = make_agent(1, 1, 1, step=1.0, v0=1.0)
    a.next_event_time = 0.9
    state.add_agent(a)
    model.pre_loop(state)
    model.update(state, 0.5)
    assert model.executed == []
    model.update(state, 1.0)
    assert model.executed == [(1, 0.9)]


def test_free_flow_speed_emerges_over_step_windows():
    # isolated agent: any window of >= 5 steps averages to v0 within 2%
    topo = open_topo(60.0, 4.0)
    speed = rasterize_speed(topo, 0.1)
    ff = solve_eikonal(speed, [Rectangle(Point2(59.8, 0), 0.2, 4.0)])
    state = SimulationState(topography=topo, floor_fields={"t": ff}, rng=RNG,
                            agent_attributes=AgentAttributes(), targets={})
    model = OsmModel(PARAMS)
    agent = make_agent(1, 2.0, 2.0)
    agent.next_event_time = step_duration(agent)
    state.add_agent(agent)
    model.pre_loop(state)
    positions = [(0.0, agent.position)]
    t = 0.0
    for _ in range(12):
        t = agent.next_event_time
        model.update(state, t + 1e-12)
        positions.append((t, agent.position))
    for w in range(5, 12):
        for start in range(len(positions) - w):
            t0, p0 = positions[start]
            t1, p1 = positions[start + w]
            path = sum(math.hypot(positions[i + 1][1].x - positions[i][1].x,
                                  positions[i + 1][1].y - positions[i][1].y)
                       for i in range(start, start + w))
            mean_speed = path / (t1 - t0)
            assert mean_speed == pytest.approx(1.34, rel=0.02)
