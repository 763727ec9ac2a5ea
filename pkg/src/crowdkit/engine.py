"""Simulation loop, source/target controllers, clock and seeded randomness.

The loop advances in fixed increments of the output time step. Each
iteration runs: source controller (spawn due agents), model update,
target controller (absorb arrived agents), output processors. Stepping
models drain their event queues up to the loop time; the social force
model sub-steps internally. A single master generator seeded from the
scenario drives every random draw in a documented order, making runs
byte-reproducible.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .floorfield import FloorField, ScalarGrid, compute_density, rasterize_speed, solve_eikonal
from .geometry import Point2, distance_to_shape, euclidean_distance
from .models import LocomotionModel, make_model
from .scenario import (Scenario, ScenarioValidationError, Target,
                       validate_scenario)

SPAWN_ATTEMPTS = 1000
_EPS = 1e-9


class SimulationError(RuntimeError):
    pass


@dataclass
class RunSummary:
    wall_time: float
    final_sim_time: float
    spawned: int
    absorbed: int
    remaining: int
    deferred: int


@dataclass
class SimulationState:
    topography: object
    floor_fields: dict[str, FloorField]
    rng: np.random.Generator
    agent_attributes: object
    targets: dict[str, Target]
    sim_time: float = 0.0
    step_count: int = 0
    agents: dict = field(default_factory=dict)          # id -> AgentState, id order
    absorbed: dict = field(default_factory=dict)        # id -> (spawn, absorption)
    spawned_count: int = 0
    next_agent_id: int = 1

    def add_agent(self, agent) -> None:
        assert agent.id not in self.agents, "agent ids are never reused"
        self.agents[agent.id] = agent
        self.spawned_count += 1

    def remove_agent(self, agent_id: int, absorption_time: float) -> None:
        agent = self.agents.pop(agent_id)
        self.absorbed[agent_id] = (agent.spawn_time, absorption_time)


class _SourceProgress:
    """Per-source spawn bookkeeping: scheduled ordinal + deferred times."""

    def __init__(self, source):
        self.source = source
        self.scheduled = 0           # how many due times have been generated
        self.pending: list[float] = []  # due times waiting for free space

    def due_times(self, until: float):
        src = self.source
        while self.scheduled < src.spawn_number:
            t = src.first_spawn_time + self.scheduled * src.inter_spawn_time
            if t > until + _EPS:
                break
            self.pending.append(t)
            self.scheduled += 1

    def exhausted(self) -> bool:
        return self.scheduled >= self.source.spawn_number and not self.pending


def _sample_free_flow_speed(attribs, rng) -> float:
    """Normal draw truncated to [speedMin, speedMax] by rejection."""
    if attribs.speed_sd == 0:
        return min(max(attribs.speed_mean, attribs.speed_min), attribs.speed_max)
    for _ in range(1000):
        v = rng.normal(attribs.speed_mean, attribs.speed_sd)
        if attribs.speed_min <= v <= attribs.speed_max:
            return float(v)
    return attribs.speed_mean


def _placement_free(state: SimulationState, p: Point2, radius: float) -> bool:
    topo = state.topography
    if not topo.bounds.contains(p):
        return False
    for obs in topo.obstacles:
        if distance_to_shape(p, obs) < radius:
            return False
    for other in state.agents.values():
        if euclidean_distance(p, other.position) < radius + other.torso_radius:
            return False
    return True


def source_controller(state: SimulationState, progress: list[_SourceProgress],
                      model: LocomotionModel, until: float) -> None:
    """Spawn due agents at collision-free points inside their source.

    Placement uses rejection sampling in the source's bounding box; after
    SPAWN_ATTEMPTS failures the spawn is deferred to the next update
    (the spawn counter is retained, nothing is dropped). Sources are
    processed in declaration order so the RNG consumption is fixed.
    """
    radius = state.agent_attributes.torso_radius
    for prog in progress:
        prog.due_times(until)
        if not prog.pending:
            continue
        src = prog.source
        x0, y0, x1, y1 = src.shape.bounding_box()
        still_pending = []
        for due in prog.pending:
            placed = None
            for _ in range(SPAWN_ATTEMPTS):
                p = Point2(state.rng.uniform(x0, x1), state.rng.uniform(y0, y1))
                if src.shape.contains(p) and _placement_free(state, p, radius):
                    placed = p
                    break
            if placed is None:
                still_pending.append(due)
                continue
            v0 = _sample_free_flow_speed(state.agent_attributes, state.rng)
            agent_id = state.next_agent_id
            state.next_agent_id += 1
            model.spawn_agent(state, agent_id, placed, src.target_ids[0],
                              v0, due, state.rng, source_id=src.id)
        prog.pending = still_pending


def target_controller(state: SimulationState) -> None:
    """Remove agents whose center lies inside their absorbing target."""
    for agent_id in list(state.agents):
        agent = state.agents[agent_id]
        target = state.targets.get(agent.target_id)
        if (target is not None and target.absorbing
                and target.shape.contains(agent.position)):
            state.remove_agent(agent_id, state.sim_time)


def build_floor_fields(scenario: Scenario,
                       density: ScalarGrid | None = None) -> dict[str, FloorField]:
    """One arrival-time field per target over the rasterized speed grid."""
    speed = rasterize_speed(scenario.topography, scenario.floor_field_cell_size,
                            density=density, params=scenario.floor_field)
    fields = {}
    for target in scenario.topography.targets:
        ff = solve_eikonal(speed, [target.shape])
        ff.target_id = target.id
        fields[target.id] = ff
    return fields


def _spawn_initial_agents(state: SimulationState, scenario: Scenario,
                          model: LocomotionModel) -> None:
    # ids in declaration order starting at 1
    for agent in scenario.topography.initial_agents:
        v0 = _sample_free_flow_speed(state.agent_attributes, state.rng)
        agent_id = state.next_agent_id
        state.next_agent_id += 1
        model.spawn_agent(state, agent_id, agent.position, agent.target_id,
                          v0, 0.0, state.rng)


def run_simulation(scenario: Scenario, outputs=None,
                   model: LocomotionModel | None = None) -> RunSummary:
    """Execute a scenario to completion, feeding each output instant to
    `outputs` (an object with start/record_instant/finish, see outputs.py).

    Stops at finishTime, or earlier once every agent is absorbed and no
    spawn is outstanding. Raises ScenarioValidationError if the scenario
    has validation errors.
    """
    diagnostics = validate_scenario(scenario)
    errors = [d for d in diagnostics if d.severity == "error"]
    if errors:
        raise ScenarioValidationError(errors)

    wall_start = time.perf_counter()
    rng = np.random.default_rng(scenario.seed)
    model = model or make_model(scenario.model_name)
    model.initialize(scenario)

    state = SimulationState(
        topography=scenario.topography,
        floor_fields={},
        rng=rng,
        agent_attributes=scenario.agent_attributes,
        targets={t.id: t for t in scenario.topography.targets},
    )
    _spawn_initial_agents(state, scenario, model)

    dynamic = scenario.floor_field.mode == "dynamic"
    density_grid = None
    if dynamic:
        base = rasterize_speed(scenario.topography, scenario.floor_field_cell_size,
                               params=scenario.floor_field)
        positions = [(a.position.x, a.position.y) for a in state.agents.values()]
        density_grid = compute_density(positions, base,
                                       scenario.floor_field.kernel_radius)
    state.floor_fields = build_floor_fields(scenario, density=density_grid)
    last_recompute = 0.0

    progress = [_SourceProgress(src) for src in scenario.topography.sources]
    model.pre_loop(state)
    if outputs is not None:
        outputs.start(scenario)

    dt = scenario.output_time_step
    k = 0
    while True:
        t = (k + 1) * dt
        if t > scenario.finish_time + _EPS:
            break
        k += 1
        if dynamic and t - last_recompute >= scenario.floor_field.recompute_interval - _EPS:
            positions = [(a.position.x, a.position.y) for a in state.agents.values()]
            grid_like = next(iter(state.floor_fields.values())).grid
            density_grid = compute_density(positions, grid_like,
                                           scenario.floor_field.kernel_radius)
            state.floor_fields = build_floor_fields(scenario, density=density_grid)
            last_recompute = t
        source_controller(state, progress, model, t)
        model.update(state, t)
        state.sim_time = t
        state.step_count = k
        target_controller(state)
        if outputs is not None:
            outputs.record_instant(k, t, state)
        if not state.agents and all(p.exhausted() for p in progress):
            break

    model.post_loop(state)
    if outputs is not None:
        outputs.finish(state)
    deferred = sum(len(p.pending) for p in progress)
    return RunSummary(
        wall_time=time.perf_counter() - wall_start,
        final_sim_time=state.sim_time,
        spawned=state.spawned_count,
        absorbed=len(state.absorbed),
        remaining=len(state.agents),
        deferred=deferred,
    )
