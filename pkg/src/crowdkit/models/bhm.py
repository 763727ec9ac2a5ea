"""Behavioral heuristics model: rule-based discrete steps.

Agents either take a full stride toward the target or wait when that
stride would collide (step-or-wait); the tangential-evasion variant
additionally tries a left, then a right, sidestep before waiting.
Steps share the event timing of the optimal-steps machinery, so the two
stepping models are directly comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..floorfield import FloorField
from ..geometry import (Point2, point_segment_distance, segment_shape_distance)
from ..scenario import BhmParams, Topography
from .base import AgentState, SteppingModel
from .osm import MIN_STEP_LENGTH

STEP_OR_WAIT = "stepOrWait"
TANGENTIAL = "tangentialEvasion"


@dataclass
class BhmAgent(AgentState):
    step_length: float = 0.0
    next_event_time: float = 0.0
    heuristic: str = STEP_OR_WAIT


def collision_free(start: Point2, end: Point2, radius: float,
                   neighbors, topo: Topography) -> bool:
    """True iff a disc of the given radius swept from start to end keeps
    clear of every neighbor torso and obstacle, and ends inside bounds."""
    if not topo.bounds.contains(end):
        return False
    for other in neighbors:
        if point_segment_distance(other.position, start, end) \
                < other.torso_radius + radius:
            return False
    for obs in topo.obstacles:
        if segment_shape_distance(start, end, obs) < radius:
            return False
    return True


def bhm_next_position(agent: BhmAgent, neighbors, ff: FloorField,
                      topo: Topography, heuristic: str) -> Point2:
    """Next position by heuristic rule; waiting (staying put) is the
    fallback whenever every tested step collides."""
    dx, dy = ff.descent_direction(agent.position)
    if dx == 0.0 and dy == 0.0:
        return agent.position  # on the target plateau
    pos = agent.position
    s = agent.step_length
    desired = Point2(pos.x + s * dx, pos.y + s * dy)
    others = [n for n in neighbors if n.id != agent.id]
    if collision_free(pos, desired, agent.torso_radius, others, topo):
        return desired
    if heuristic == TANGENTIAL:
        # left sidestep first, then right
        for ex, ey in ((-dy, dx), (dy, -dx)):
            evade = Point2(pos.x + s * ex, pos.y + s * ey)
            if collision_free(pos, evade, agent.torso_radius, others, topo):
                return evade
    return pos


class BhmModel(SteppingModel):
    name = "bhm"

    def __init__(self, params: BhmParams | None = None):
        super().__init__()
        self.params = params or BhmParams()
        self._source_heuristics: dict[str, str] = {}

    def initialize(self, scenario) -> None:
        self.params = scenario.model_params.bhm

    def spawn_agent(self, state, agent_id, position, target_id,
                    free_flow_speed, spawn_time, rng,
                    source_id: str | None = None) -> BhmAgent:
        p = self.params
        stride = p.beta0 + p.beta1 * free_flow_speed
        if p.sigma > 0:
            stride += rng.normal(0.0, p.sigma)
        stride = max(stride, MIN_STEP_LENGTH)
        heuristic = (p.heuristic_for_source(source_id)
                     if source_id is not None else p.heuristic)
        agent = BhmAgent(
            id=agent_id, position=position,
            torso_radius=state.agent_attributes.torso_radius,
            free_flow_speed=free_flow_speed, target_id=target_id,
            spawn_time=spawn_time, step_length=stride,
            next_event_time=spawn_time + stride / free_flow_speed,
            heuristic=heuristic)
        state.add_agent(agent)
        self._enqueue(agent)
        return agent

    def _decide(self, agent: BhmAgent, state) -> Point2:
        ff = state.floor_fields[agent.target_id]
        neighbors = [a for a in state.agents.values() if a.id != agent.id]
        return bhm_next_position(agent, neighbors, ff, state.topography,
                                 agent.heuristic)
