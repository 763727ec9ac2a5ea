"""Optimal steps model: footsteps chosen by minimizing a potential.

Each agent performs discrete instantaneous steps. The next foot position
minimizes an aggregated potential (arrival time toward the target +
repulsion from other agents' proximity zones + obstacle repulsion) over
a disc whose radius is the agent's stride length. A restricted candidate
set on lattice offsets mimics cellular-automaton motion (von Neumann or
Moore neighborhoods).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..floorfield import FloorField
from ..geometry import Point2, distance_to_shape, euclidean_distance
from ..scenario import OsmParams, Topography
from .base import AgentState, SteppingModel

INF = math.inf
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_REFINE_ITERS = 16
MIN_STEP_LENGTH = 0.1  # m, guards against negative normal samples


@dataclass
class OsmAgent(AgentState):
    step_length: float = 0.0
    next_event_time: float = 0.0


def sample_step_length(v0: float, params: OsmParams, rng) -> float:
    """Stride length beta0 + beta1 * v0 + eps, eps ~ N(0, sigma^2).

    Drawn once per agent at spawn; the stride is an agent property.
    """
    s = params.beta0 + params.beta1 * v0
    if params.sigma > 0:
        s += rng.normal(0.0, params.sigma)
    return max(s, MIN_STEP_LENGTH)


def step_duration(agent: OsmAgent) -> float:
    """Time between steps, stride / free-flow speed; crowding shortens
    steps but never this duration."""
    return agent.step_length / agent.free_flow_speed


def _bump(d: float, width: float, height: float) -> float:
    """Smooth compact-support kernel: height at d=0, 0 for d >= width."""
    if d >= width or width <= 0:
        return 0.0
    d2 = d * d
    return height * math.exp(2.0 * d2 / (d2 - width * width))


def _bump_np(d: np.ndarray, width, height: float) -> np.ndarray:
    active = d < width
    d2 = d * d
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        val = height * np.exp(2.0 * d2 / (d2 - np.asarray(width) ** 2))
    return np.where(active, val, 0.0)


def agent_potential(x: Point2, agent: OsmAgent, other: OsmAgent,
                    params: OsmParams) -> float:
    """Proximity cost of placing `agent` at x next to `other`.

    Nested zones: personal space, intimate space, torso overlap; each
    inner zone stacks its kernel on top of the outer ones. The personal
    and intimate kernels fade out smoothly at their zone radii (the
    potential is continuous outside the torso zone); the torso term never
    drops below its height inside the torso zone, so any overlapping
    placement costs at least h_tor more than any non-overlapping one.
    """
    d = euclidean_distance(other.position, x)
    r_sum = agent.torso_radius + other.torso_radius
    total = (_bump(d, params.delta_per, params.h_per)
             + _bump(d, params.delta_int, params.h_int))
    if d < r_sum:
        total += params.h_tor + _bump(d, r_sum, params.h_tor)
    return total


def obstacle_potential(x: Point2, topo: Topography, params: OsmParams,
                       torso_radius: float) -> float:
    """Max over obstacles of a hard-core kernel of boundary distance:
    +inf closer than the torso radius, smooth decay to 0 at deltaObs."""
    best = 0.0
    for obs in topo.obstacles:
        d = distance_to_shape(x, obs)
        if d < torso_radius:
            return INF
        w = params.delta_obs - torso_radius
        p = _bump(d - torso_radius, w, params.h_obs) if w > 0 else 0.0
        if p > best:
            best = p
    return best


def aggregate_potential(x: Point2, agent: OsmAgent, neighbors, ff: FloorField,
                        topo: Topography, params: OsmParams) -> float:
    """Target arrival time + summed agent repulsions + obstacle repulsion."""
    u = ff.sample(x)
    if math.isinf(u):
        return INF
    p = obstacle_potential(x, topo, params, agent.torso_radius)
    if math.isinf(p):
        return INF
    total = u + p
    for other in neighbors:
        if other.id != agent.id:
            total += agent_potential(x, agent, other, params)
    return total


class _DecisionEvaluator:
    """Vectorized aggregated potential over candidate positions.

    Candidates out of the domain, overlapping a neighbor torso, or closer
    than the torso radius to an obstacle evaluate to +inf (rejected)."""

    def __init__(self, agent: OsmAgent, neighbors, ff: FloorField,
                 topo: Topography, params: OsmParams):
        self.agent = agent
        self.ff = ff
        self.topo = topo
        self.params = params
        reach = agent.step_length + max(params.delta_per,
                                        2 * agent.torso_radius) + 1e-9
        close = [n for n in neighbors
                 if n.id != agent.id
                 and euclidean_distance(n.position, agent.position) <= reach
                 + n.torso_radius]
        if close:
            self.nbr_x = np.array([n.position.x for n in close])
            self.nbr_y = np.array([n.position.y for n in close])
            self.nbr_rsum = np.array([n.torso_radius + agent.torso_radius
                                      for n in close])
        else:
            self.nbr_x = None

    def __call__(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        p = self.params
        pot = self.ff.sample_batch(xs, ys)
        inside = self.topo.bounds.contains_batch(xs, ys)
        pot = np.where(inside, pot, INF)
        if self.nbr_x is not None:
            d = np.hypot(xs[:, None] - self.nbr_x[None, :],
                         ys[:, None] - self.nbr_y[None, :])
            overlap = (d < self.nbr_rsum[None, :]).any(axis=1)
            rep = (_bump_np(d, p.delta_per, p.h_per)
                   + _bump_np(d, p.delta_int, p.h_int)
                   + _bump_np(d, self.nbr_rsum[None, :], p.h_tor)).sum(axis=1)
            pot = np.where(overlap, INF, pot + rep)
        if self.topo.obstacles:
            r = self.agent.torso_radius
            w = p.delta_obs - r
            obs_term = np.zeros(pot.shape)
            blocked = np.zeros(pot.shape, dtype=bool)
            for obs in self.topo.obstacles:
                d = obs.distance_batch(xs, ys)
                blocked |= d < r
                if w > 0:  # max over obstacles, not a sum
                    obs_term = np.maximum(obs_term, _bump_np(d - r, w, p.h_obs))
            pot = np.where(blocked, INF, pot + obs_term)
        return pot

    def evaluate_point(self, x: float, y: float) -> float:
        return float(self(np.array([x]), np.array([y]))[0])


def _ring_candidates(position: Point2, step: float, rings: int,
                     points_per_ring: int):
    """Current position plus concentric rings of equally spaced points."""
    xs = [position.x]
    ys = [position.y]
    for k in range(1, rings + 1):
        radius = step * k / rings
        for j in range(points_per_ring):
            ang = 2.0 * math.pi * j / points_per_ring
            xs.append(position.x + radius * math.cos(ang))
            ys.append(position.y + radius * math.sin(ang))
    return np.array(xs), np.array(ys)


def next_position(agent: OsmAgent, neighbors, ff: FloorField,
                  topo: Topography, params: OsmParams) -> Point2:
    """Argmin of the aggregated potential over the step disc.

    Deterministic: fixed candidate rings, ties broken by smallest
    candidate index (the current position is candidate 0, so staying put
    is always legal), then one golden-section pass along the best
    candidate's direction refines the step radius.
    """
    evaluator = _DecisionEvaluator(agent, neighbors, ff, topo, params)
    xs, ys = _ring_candidates(agent.position, agent.step_length,
                              params.rings, params.points_per_ring)
    pots = evaluator(xs, ys)
    best = int(np.argmin(pots))
    best_pot = float(pots[best])
    if best == 0:
        return agent.position
    ang = math.atan2(ys[best] - agent.position.y, xs[best] - agent.position.x)
    cos_a, sin_a = math.cos(ang), math.sin(ang)

    def along(radius: float) -> float:
        return evaluator.evaluate_point(agent.position.x + radius * cos_a,
                                        agent.position.y + radius * sin_a)

    lo, hi = 0.0, agent.step_length
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = along(c), along(d)
    for _ in range(_REFINE_ITERS):
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = along(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = along(d)
    mid = 0.5 * (lo + hi)
    refined_pot = along(mid)
    if refined_pot < best_pot:
        return Point2(agent.position.x + mid * cos_a,
                      agent.position.y + mid * sin_a)
    return Point2(float(xs[best]), float(ys[best]))


_CA_OFFSETS_VN = ((1, 0), (-1, 0), (0, 1), (0, -1))
_CA_OFFSETS_DIAG = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def ca_next_position(agent: OsmAgent, neighbors, ff: FloorField,
                     topo: Topography, params: OsmParams) -> Point2:
    """Cellular-automaton mimic: optimization restricted to lattice offsets.

    Von Neumann mode offers the 4 axis points at the stride radius; Moore
    mode adds the 4 diagonal lattice points (radius stride * sqrt(2))."""
    assert params.ca_mode in ("vonNeumann", "moore")
    s = agent.step_length
    offsets = _CA_OFFSETS_VN + (_CA_OFFSETS_DIAG if params.ca_mode == "moore" else ())
    xs = np.array([agent.position.x] + [agent.position.x + dx * s for dx, _ in offsets])
    ys = np.array([agent.position.y] + [agent.position.y + dy * s for _, dy in offsets])
    evaluator = _DecisionEvaluator(agent, neighbors, ff, topo, params)
    pots = evaluator(xs, ys)
    best = int(np.argmin(pots))
    return Point2(float(xs[best]), float(ys[best]))


class OsmModel(SteppingModel):
    name = "osm"

    def __init__(self, params: OsmParams | None = None):
        super().__init__()
        self.params = params or OsmParams()

    def initialize(self, scenario) -> None:
        params = scenario.model_params.osm
        if scenario.model_name == "osm-ca" and params.ca_mode == "none":
            params = replace(params, ca_mode="vonNeumann")
        self.params = params

    def spawn_agent(self, state, agent_id, position, target_id,
                    free_flow_speed, spawn_time, rng,
                    source_id: str | None = None) -> OsmAgent:
        stride = sample_step_length(free_flow_speed, self.params, rng)
        agent = OsmAgent(
            id=agent_id, position=position,
            torso_radius=state.agent_attributes.torso_radius,
            free_flow_speed=free_flow_speed, target_id=target_id,
            spawn_time=spawn_time, step_length=stride,
            next_event_time=spawn_time + stride / free_flow_speed)
        state.add_agent(agent)
        self._enqueue(agent)
        return agent

    def _decide(self, agent: OsmAgent, state) -> Point2:
        ff = state.floor_fields[agent.target_id]
        neighbors = [a for a in state.agents.values() if a.id != agent.id]
        if self.params.ca_mode != "none":
            return ca_next_position(agent, neighbors, ff, state.topography,
                                    self.params)
        return next_position(agent, neighbors, ff, state.topography, self.params)
