"""Output processors: trajectory, density, flow and evacuation-time files.

The trajectory file is the canonical simulation output: a plain-text
table `timeStep pedestrianId x y`, one row per present agent per output
instant, openable with any third-party tool. Reproducibility metadata
(seed, build identifier, parameter digest) goes into a JSON sidecar so
the data files stay purely tabular. Measurement processors write one CSV
each and are pure functions of the recorded state sequence.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import math
import os
from dataclasses import dataclass

from ._build import build_identifier
from .geometry import Point2, Shape, contains_point
from .scenario import (DensityProcessorConfig, EvacuationTimeProcessorConfig,
                       FlowProcessorConfig, Scenario, serialize_scenario)

COORD_FORMAT = ".12g"  # 12 significant digits
TRAJECTORY_HEADER = "timeStep pedestrianId x y"


def format_trajectory_row(time_step: int, pedestrian_id: int,
                          x: float, y: float) -> str:
    return f"{time_step} {pedestrian_id} {x:{COORD_FORMAT}} {y:{COORD_FORMAT}}"


@dataclass(frozen=True)
class MeasurementArea:
    id: str
    shape: Shape
    area: float

    @staticmethod
    def from_shape(area_id: str, shape: Shape) -> "MeasurementArea":
        return MeasurementArea(area_id, shape, shape.area())


def count_density(positions, area: MeasurementArea) -> float:
    """Agents whose center lies inside the area, per square meter."""
    inside = sum(1 for p in positions if contains_point(area.shape, p))
    return inside / area.area


def _crossing_sign(a: Point2, b: Point2, p0: Point2, p1: Point2):
    """+1/-1 if the open segment p0->p1 properly crosses line segment ab
    (sign from the crossing direction), else None."""
    def orient(p, q, r):
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    o1, o2 = orient(a, b, p0), orient(a, b, p1)
    o3, o4 = orient(p0, p1, a), orient(p0, p1, b)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return 1 if o2 > 0 else -1
    return None


class DensityProcessor:
    """Counting density over a fixed measurement area, one row per instant."""

    header = "timeStep,simTime,density"

    def __init__(self, config: DensityProcessorConfig, stream):
        self.area = MeasurementArea.from_shape(config.id, config.measurement_area)
        self.stream = stream
        stream.write(self.header + "\n")

    def record(self, time_step: int, sim_time: float, state) -> None:
        d = count_density([a.position for a in state.agents.values()], self.area)
        self.stream.write(f"{time_step},{sim_time:{COORD_FORMAT}},{d:{COORD_FORMAT}}\n")

    def finish(self, state) -> None:
        pass


class FlowProcessor:
    """Signed crossings of a measurement line within a sliding window.

    Oscillating back and forth cancels (+1 then -1), so flow measures net
    throughput in persons per second.
    """

    header = "timeStep,simTime,flow"

    def __init__(self, config: FlowProcessorConfig, stream):
        self.a = config.line_a
        self.b = config.line_b
        self.window = config.window_seconds
        self.stream = stream
        self._last_pos: dict[int, Point2] = {}
        self._crossings: list[tuple[float, int]] = []  # (time, sign)
        stream.write(self.header + "\n")

    def record(self, time_step: int, sim_time: float, state) -> None:
        for agent in state.agents.values():
            prev = self._last_pos.get(agent.id)
            if prev is not None and prev != agent.position:
                sign = _crossing_sign(self.a, self.b, prev, agent.position)
                if sign is not None:
                    self._crossings.append((sim_time, sign))
            self._last_pos[agent.id] = agent.position
        lo = sim_time - self.window
        self._crossings = [(t, s) for t, s in self._crossings if t > lo]
        flow = sum(s for _, s in self._crossings) / self.window
        self.stream.write(f"{time_step},{sim_time:{COORD_FORMAT}},{flow:{COORD_FORMAT}}\n")

    def finish(self, state) -> None:
        pass


class EvacuationTimeProcessor:
    """Per-agent evacuation times (absorption - spawn), written at run end;
    agents still present are reported as not evacuated."""

    header = "pedestrianId,spawnTime,absorptionTime,evacuationTime,evacuated"

    def __init__(self, config: EvacuationTimeProcessorConfig, stream):
        self.stream = stream

    def record(self, time_step: int, sim_time: float, state) -> None:
        pass

    def finish(self, state) -> None:
        self.stream.write(self.header + "\n")
        rows = evacuation_times(state)
        for agent_id in sorted(rows):
            spawn, absorb = rows[agent_id]
            if absorb is None:
                self.stream.write(f"{agent_id},{spawn:{COORD_FORMAT}},,,false\n")
            else:
                self.stream.write(
                    f"{agent_id},{spawn:{COORD_FORMAT}},{absorb:{COORD_FORMAT}},"
                    f"{absorb - spawn:{COORD_FORMAT}},true\n")


def evacuation_times(state) -> dict[int, tuple[float, float | None]]:
    """id -> (spawn time, absorption time or None if still present)."""
    rows: dict[int, tuple[float, float | None]] = {}
    for agent_id, (spawn, absorb) in state.absorbed.items():
        rows[agent_id] = (spawn, absorb)
    for agent_id, agent in state.agents.items():
        rows[agent_id] = (agent.spawn_time, None)
    return rows


def max_evacuation_time(state) -> float | None:
    times = [absorb - spawn for spawn, absorb in evacuation_times(state).values()
             if absorb is not None]
    return max(times) if times else None


def run_metadata(scenario: Scenario, timestamp: str | None = None) -> dict:
    digest = hashlib.sha256(serialize_scenario(scenario).encode()).hexdigest()
    return {
        "scenarioName": scenario.name,
        "seed": scenario.seed,
        "buildIdentifier": build_identifier(),
        "startTimestamp": timestamp or
        _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        "parameterDigest": digest,
    }


class OutputManager:
    """Writes all configured output files for one run into a directory."""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self._streams = []
        self.trajectory_path = None
        self.metadata_path = None
        self._trajectory = None
        self._processors = []

    def start(self, scenario: Scenario) -> None:
        os.makedirs(self.out_dir, exist_ok=True)
        name = scenario.name
        self.metadata_path = os.path.join(self.out_dir, f"{name}.meta.json")
        with open(self.metadata_path, "w", encoding="utf-8") as f:
            json.dump(run_metadata(scenario), f, indent=2)
            f.write("\n")
        self.trajectory_path = os.path.join(self.out_dir, f"{name}.trajectories")
        self._trajectory = open(self.trajectory_path, "w", encoding="utf-8",
                                newline="\n")
        self._streams.append(self._trajectory)
        self._trajectory.write(TRAJECTORY_HEADER + "\n")
        for config in scenario.processors:
            stream = open(os.path.join(self.out_dir, f"{config.id}.csv"),
                          "w", encoding="utf-8", newline="\n")
            self._streams.append(stream)
            if isinstance(config, DensityProcessorConfig):
                self._processors.append(DensityProcessor(config, stream))
            elif isinstance(config, FlowProcessorConfig):
                self._processors.append(FlowProcessor(config, stream))
            elif isinstance(config, EvacuationTimeProcessorConfig):
                self._processors.append(EvacuationTimeProcessor(config, stream))

    def record_instant(self, time_step: int, sim_time: float, state) -> None:
        for agent in state.agents.values():  # id order
            self._trajectory.write(format_trajectory_row(
                time_step, agent.id, agent.position.x, agent.position.y) + "\n")
        for proc in self._processors:
            proc.record(time_step, sim_time, state)

    def finish(self, state) -> None:
        for proc in self._processors:
            proc.finish(state)
        for stream in self._streams:
            stream.close()
        self._streams.clear()
