"""Common locomotion-model interface and shared agent/event machinery.

Every model implements the same four lifecycle methods (initialize,
pre_loop, update, post_loop); the engine drives them without knowing the
concrete model. Footstep-based models additionally share an event queue
that executes timestamped steps in (time, agent id) order.
"""

from __future__ import annotations

import heapq
from abc import ABC, abstractmethod
from dataclasses import dataclass

from ..geometry import Point2


@dataclass
class AgentState:
    id: int
    position: Point2
    torso_radius: float
    free_flow_speed: float
    target_id: str
    spawn_time: float


class ModelError(RuntimeError):
    pass


class LocomotionModel(ABC):
    """Four-method model interface driven by the simulation loop."""

    name = "abstract"

    @abstractmethod
    def initialize(self, scenario) -> None:
        """Configure the model from the scenario (replaces a constructor)."""

    def pre_loop(self, state) -> None:
        """Called once before the simulation loop starts."""

    @abstractmethod
    def update(self, state, sim_time: float) -> None:
        """Advance the model's agents up to sim_time."""

    def post_loop(self, state) -> None:
        """Called once after the simulation loop has finished."""

    @abstractmethod
    def spawn_agent(self, state, agent_id: int, position: Point2,
                    target_id: str, free_flow_speed: float,
                    spawn_time: float, rng,
                    source_id: str | None = None) -> AgentState:
        """Materialize a model-specific agent (engine spawn hook)."""


class SteppingModel(LocomotionModel):
    """Event-driven stepping base: discrete instantaneous footsteps.

    Events are executed in (time, agent id) order; equal-time events run
    in agent spawn order, which keeps runs reproducible. Each executed
    step re-enqueues the agent one step duration later; the duration
    (step length / free-flow speed) never changes over an agent's life.
    """

    def __init__(self):
        self._queue: list[tuple[float, int]] = []

    def pre_loop(self, state) -> None:
        self._queue = [(a.next_event_time, a.id) for a in state.agents.values()]
        heapq.heapify(self._queue)

    def _enqueue(self, agent) -> None:
        heapq.heappush(self._queue, (agent.next_event_time, agent.id))

    def update(self, state, sim_time: float) -> None:
        queue = self._queue
        while queue and queue[0][0] <= sim_time + 1e-9:
            event_time, agent_id = heapq.heappop(queue)
            agent = state.agents.get(agent_id)
            if agent is None or event_time < agent.next_event_time - 1e-9:
                continue  # removed agent or stale entry
            agent.position = self._decide(agent, state)
            if self._absorbed(agent, state):
                state.remove_agent(agent_id, sim_time)
                continue
            agent.next_event_time = event_time + agent.step_length / agent.free_flow_speed
            self._enqueue(agent)

    def _absorbed(self, agent, state) -> bool:
        target = state.targets.get(agent.target_id)
        return (target is not None and target.absorbing
                and target.shape.contains(agent.position))

    @abstractmethod
    def _decide(self, agent, state) -> Point2:
        """Choose the agent's next position at its step event."""
