"""Social force model: continuous motion from superposed accelerations.

A driving term relaxes each agent's velocity toward its free-flow speed
along the floor-field descent direction; exponential repulsions push
agents apart and away from obstacles; an optional fluctuation adds
seeded noise. Velocities are clamped to a maximum speed and integrated
with explicit Euler at a fixed internal step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..floorfield import FloorField
from ..geometry import Point2, contains_point, distance_to_shape
from ..scenario import SfmParams, Topography
from .base import AgentState, LocomotionModel, ModelError


@dataclass
class SfmAgent(AgentState):
    velocity: tuple[float, float] = (0.0, 0.0)


def target_direction(ff: FloorField, x: Point2) -> tuple[float, float]:
    """Unit descent direction of the arrival-time field; the zero vector
    on the target plateau signals arrival."""
    return ff.descent_direction(x)


def driving_force(agent: SfmAgent, e: tuple[float, float],
                  params: SfmParams) -> tuple[float, float]:
    """(v0 * e - velocity) / tau: relax toward the desired velocity."""
    vx, vy = agent.velocity
    return ((agent.free_flow_speed * e[0] - vx) / params.tau,
            (agent.free_flow_speed * e[1] - vy) / params.tau)


def _pair_direction(id_a: int, id_b: int) -> tuple[float, float]:
    """Deterministic pseudo-random unit vector for coincident centers,
    derived from the agent-id pair so reruns stay reproducible."""
    lo, hi = (id_a, id_b) if id_a < id_b else (id_b, id_a)
    mix = ((lo * 73856093) ^ (hi * 19349663)) % 4294967296
    ang = 2.0 * math.pi * mix / 4294967296.0
    d = (math.cos(ang), math.sin(ang))
    return d if id_a < id_b else (-d[0], -d[1])


def agent_repulsion(agent: SfmAgent, other: SfmAgent,
                    params: SfmParams) -> tuple[float, float]:
    """Exponential repulsion A * exp((r_sum - d) / B) pointing away from
    the other agent."""
    dx = agent.position.x - other.position.x
    dy = agent.position.y - other.position.y
    d = math.hypot(dx, dy)
    r_sum = agent.torso_radius + other.torso_radius
    if d < 1e-12:
        ux, uy = _pair_direction(agent.id, other.id)
        return (params.repulsion_a * ux, params.repulsion_a * uy)
    mag = params.repulsion_a * math.exp((r_sum - d) / params.repulsion_b)
    return (mag * dx / d, mag * dy / d)


def obstacle_repulsion(agent: SfmAgent, topo: Topography,
                       params: SfmParams) -> tuple[float, float]:
    """Summed exponential wall repulsion, directed from the closest
    boundary point toward the agent."""
    fx = fy = 0.0
    for obs in topo.obstacles:
        if contains_point(obs, agent.position):
            raise ModelError(
                f"agent {agent.id} is inside an obstacle at "
                f"({agent.position.x:g}, {agent.position.y:g})")
        d = distance_to_shape(agent.position, obs)
        q = obs.closest_boundary_point(agent.position)
        nx, ny = agent.position.x - q.x, agent.position.y - q.y
        norm = math.hypot(nx, ny)
        if norm < 1e-12:
            continue
        mag = params.obstacle_a * math.exp(
            (agent.torso_radius - d) / params.obstacle_b)
        fx += mag * nx / norm
        fy += mag * ny / norm
    return (fx, fy)


def sfm_step(agents: list[SfmAgent], floor_fields, topo: Topography,
             params: SfmParams, rng, dt: float) -> None:
    """One explicit Euler step for all agents.

    Forces are computed from the pre-step state for every agent, then
    positions/velocities commit in id order (so the result does not
    depend on intra-step scheduling). A step that would land inside an
    obstacle or outside the domain is rolled back with velocity zeroed.
    """
    forces = []
    for agent in agents:
        e = target_direction(floor_fields[agent.target_id], agent.position)
        fx, fy = driving_force(agent, e, params)
        for other in agents:
            if other.id != agent.id:
                rx, ry = agent_repulsion(agent, other, params)
                fx += rx
                fy += ry
        ox, oy = obstacle_repulsion(agent, topo, params)
        forces.append((fx + ox, fy + oy))

    v_max = [params.v_max_factor * a.free_flow_speed for a in agents]
    noise = None
    if params.fluctuation_sd > 0:
        noise = rng.normal(0.0, params.fluctuation_sd, size=(len(agents), 2))
    for i, agent in enumerate(agents):
        fx, fy = forces[i]
        if noise is not None:
            fx += noise[i, 0]
            fy += noise[i, 1]
        wx = agent.velocity[0] + dt * fx
        wy = agent.velocity[1] + dt * fy
        speed = math.hypot(wx, wy)
        if speed > v_max[i]:
            scale = v_max[i] / speed
            wx *= scale
            wy *= scale
        new = Point2(agent.position.x + dt * wx, agent.position.y + dt * wy)
        if not topo.bounds.contains(new) or any(
                contains_point(obs, new) for obs in topo.obstacles):
            agent.velocity = (0.0, 0.0)  # rollback, stay put
            continue
        agent.velocity = (wx, wy)
        agent.position = new


class SfmModel(LocomotionModel):
    name = "sfm"

    def __init__(self, params: SfmParams | None = None):
        self.params = params or SfmParams()
        self._rng = None

    def initialize(self, scenario) -> None:
        self.params = scenario.model_params.sfm

    def spawn_agent(self, state, agent_id, position, target_id,
                    free_flow_speed, spawn_time, rng,
                    source_id: str | None = None) -> SfmAgent:
        agent = SfmAgent(
            id=agent_id, position=position,
            torso_radius=state.agent_attributes.torso_radius,
            free_flow_speed=free_flow_speed, target_id=target_id,
            spawn_time=spawn_time, velocity=(0.0, 0.0))
        state.add_agent(agent)
        return agent

    def update(self, state, sim_time: float) -> None:
        span = sim_time - state.sim_time
        if span <= 0 or not state.agents:
            return
        n_sub = max(1, round(span / self.params.dt))
        dt = span / n_sub
        agents = list(state.agents.values())
        for _ in range(n_sub):
            sfm_step(agents, state.floor_fields, state.topography,
                     self.params, state.rng, dt)
