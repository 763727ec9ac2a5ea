"""Declarative scenario model, its JSON representation, and validation.

A scenario file (`*.scenario.json`, UTF-8 JSON) fully determines a
simulation run: topography, locomotion model + parameters, seed and
output configuration. The schema is strict — unknown keys are errors,
so typos surface instead of being silently ignored. Field-by-field
documentation lives in docs/scenario-schema.md.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from typing import Any

from .geometry import (Circle, GeometryError, Point2, Polygon, Rectangle,
                       Shape, contains_point, distance_to_shape,
                       segment_shape_distance, shape_shape_distance)

MODEL_NAMES = ("osm", "osm-ca", "sfm", "bhm")
BHM_HEURISTICS = ("stepOrWait", "tangentialEvasion")
CA_MODES = ("none", "vonNeumann", "moore")


class ScenarioError(ValueError):
    """Base class for scenario reading/validation failures."""


class ScenarioSyntaxError(ScenarioError):
    def __init__(self, msg: str, line: int, column: int):
        super().__init__(f"JSON syntax error at line {line}, column {column}: {msg}")
        self.line = line
        self.column = column


class ScenarioSchemaError(ScenarioError):
    def __init__(self, path: str, msg: str):
        super().__init__(f"{path or '<root>'}: {msg}")
        self.path = path


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    element_id: str = ""

    def __str__(self):
        where = f" [{self.element_id}]" if self.element_id else ""
        return f"{self.severity}: {self.message}{where}"


class ScenarioValidationError(ScenarioError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        lines = "; ".join(str(d) for d in self.diagnostics if d.severity == "error")
        super().__init__(f"scenario is not runnable: {lines}")


@dataclass(frozen=True)
class AgentAttributes:
    torso_radius: float = 0.2
    speed_mean: float = 1.34
    speed_sd: float = 0.26
    speed_min: float = 0.5
    speed_max: float = 2.2


@dataclass(frozen=True)
class Source:
    id: str
    shape: Shape
    spawn_number: int
    target_ids: tuple[str, ...]
    inter_spawn_time: float = 1.0
    first_spawn_time: float = 0.0


@dataclass(frozen=True)
class Target:
    id: str
    shape: Shape
    absorbing: bool = True


@dataclass(frozen=True)
class InitialAgent:
    position: Point2
    target_id: str = ""


@dataclass(frozen=True)
class Topography:
    bounds: Rectangle
    obstacles: tuple[Shape, ...] = ()
    sources: tuple[Source, ...] = ()
    targets: tuple[Target, ...] = ()
    initial_agents: tuple[InitialAgent, ...] = ()


@dataclass(frozen=True)
class OsmParams:
    beta0: float = 0.4625        # step-length intercept, m
    beta1: float = 0.4226        # step-length slope, s
    sigma: float = 0.1           # step-length noise sd, m
    delta_int: float = 0.45      # intimate-space radius, m
    delta_per: float = 1.2       # personal-space radius, m
    h_tor: float = 1000.0
    h_int: float = 20.0
    h_per: float = 1.0
    h_obs: float = 6.0
    delta_obs: float = 0.8       # obstacle repulsion range, m
    rings: int = 3
    points_per_ring: int = 16
    ca_mode: str = "none"        # none | vonNeumann | moore


@dataclass(frozen=True)
class SfmParams:
    tau: float = 0.5
    v_max_factor: float = 1.3
    repulsion_a: float = 2.1     # agent repulsion strength, m/s^2
    repulsion_b: float = 0.3     # agent repulsion range, m
    obstacle_a: float = 10.0
    obstacle_b: float = 0.2
    fluctuation_sd: float = 0.0
    dt: float = 0.01


@dataclass(frozen=True)
class BhmParams:
    heuristic: str = "stepOrWait"
    beta0: float = 0.4625
    beta1: float = 0.4226
    sigma: float = 0.1
    per_source: tuple[tuple[str, str], ...] = ()  # (source id, heuristic), sorted

    def heuristic_for_source(self, source_id: str) -> str:
        for sid, h in self.per_source:
            if sid == source_id:
                return h
        return self.heuristic


@dataclass(frozen=True)
class ModelParams:
    osm: OsmParams = field(default_factory=OsmParams)
    sfm: SfmParams = field(default_factory=SfmParams)
    bhm: BhmParams = field(default_factory=BhmParams)


@dataclass(frozen=True)
class FloorFieldParams:
    mode: str = "static"             # static | dynamic
    recompute_interval: float = 0.4  # s of simulated time (dynamic mode)
    min_speed: float = 0.2           # floor of the density-lowered wave speed
    density_slope: float = 0.4       # m^2/person, speed drop per unit density
    kernel_radius: float = 0.7       # m, density estimation kernel
    cell_count_cap: int = 4_000_000


@dataclass(frozen=True)
class DensityProcessorConfig:
    id: str
    measurement_area: Shape


@dataclass(frozen=True)
class FlowProcessorConfig:
    id: str
    line_a: Point2
    line_b: Point2
    window_seconds: float = 10.0


@dataclass(frozen=True)
class EvacuationTimeProcessorConfig:
    id: str


ProcessorConfig = DensityProcessorConfig | FlowProcessorConfig | EvacuationTimeProcessorConfig


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    finish_time: float
    topography: Topography
    model_name: str = "osm"
    output_time_step: float = 0.4
    floor_field_cell_size: float = 0.1
    agent_attributes: AgentAttributes = field(default_factory=AgentAttributes)
    model_params: ModelParams = field(default_factory=ModelParams)
    floor_field: FloorFieldParams = field(default_factory=FloorFieldParams)
    processors: tuple[ProcessorConfig, ...] = ()


# --------------------------------------------------------------------------
# strict JSON reading


def _type_name(v) -> str:
    return type(v).__name__


def _expect_object(v, path) -> dict:
    if not isinstance(v, dict):
        raise ScenarioSchemaError(path, f"expected object, got {_type_name(v)}")
    return v


def _expect_list(v, path) -> list:
    if not isinstance(v, list):
        raise ScenarioSchemaError(path, f"expected array, got {_type_name(v)}")
    return v


def _expect_number(v, path) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioSchemaError(path, f"expected number, got {_type_name(v)}")
    return float(v)


def _expect_int(v, path) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScenarioSchemaError(path, f"expected integer, got {_type_name(v)}")
    return v


def _expect_str(v, path) -> str:
    if not isinstance(v, str):
        raise ScenarioSchemaError(path, f"expected string, got {_type_name(v)}")
    return v


def _expect_bool(v, path) -> bool:
    if not isinstance(v, bool):
        raise ScenarioSchemaError(path, f"expected boolean, got {_type_name(v)}")
    return v


def _expect_point(v, path) -> Point2:
    lst = _expect_list(v, path)
    if len(lst) != 2:
        raise ScenarioSchemaError(path, "expected [x, y]")
    return Point2(_expect_number(lst[0], f"{path}[0]"), _expect_number(lst[1], f"{path}[1]"))


def _check_keys(obj: dict, allowed, path):
    extra = set(obj) - set(allowed)
    if extra:
        key = sorted(extra)[0]
        raise ScenarioSchemaError(f"{path}.{key}" if path else key, "unknown field")


def _shape_from_dict(obj, path) -> Shape:
    obj = _expect_object(obj, path)
    kind = _expect_str(obj.get("type", ""), f"{path}.type")
    try:
        if kind == "rectangle":
            _check_keys(obj, ("type", "origin", "width", "height"), path)
            return Rectangle(_expect_point(obj["origin"], f"{path}.origin"),
                             _expect_number(obj["width"], f"{path}.width"),
                             _expect_number(obj["height"], f"{path}.height"))
        if kind == "circle":
            _check_keys(obj, ("type", "center", "radius"), path)
            return Circle(_expect_point(obj["center"], f"{path}.center"),
                          _expect_number(obj["radius"], f"{path}.radius"))
        if kind == "polygon":
            _check_keys(obj, ("type", "vertices"), path)
            verts = [_expect_point(v, f"{path}.vertices[{i}]")
                     for i, v in enumerate(_expect_list(obj["vertices"], f"{path}.vertices"))]
            return Polygon(verts)
    except KeyError as e:
        raise ScenarioSchemaError(path, f"missing field {e.args[0]!r}") from None
    except GeometryError as e:
        raise ScenarioSchemaError(path, str(e)) from None
    raise ScenarioSchemaError(f"{path}.type", f"unknown shape type {kind!r}")


def _shape_to_dict(s: Shape) -> dict:
    if isinstance(s, Rectangle):
        return {"type": "rectangle", "origin": [s.origin.x, s.origin.y],
                "width": s.width, "height": s.height}
    if isinstance(s, Circle):
        return {"type": "circle", "center": [s.center.x, s.center.y], "radius": s.radius}
    return {"type": "polygon", "vertices": [[v.x, v.y] for v in s.vertices]}


def _params_from_dict(cls, obj, path, key_map):
    obj = _expect_object(obj, path)
    _check_keys(obj, key_map, path)
    kwargs = {}
    for json_key, (attr, reader) in key_map.items():
        if json_key in obj:
            kwargs[attr] = reader(obj[json_key], f"{path}.{json_key}")
    return cls(**kwargs)


_OSM_KEYS = {
    "beta0": ("beta0", _expect_number), "beta1": ("beta1", _expect_number),
    "sigma": ("sigma", _expect_number),
    "deltaInt": ("delta_int", _expect_number), "deltaPer": ("delta_per", _expect_number),
    "hTor": ("h_tor", _expect_number), "hInt": ("h_int", _expect_number),
    "hPer": ("h_per", _expect_number), "hObs": ("h_obs", _expect_number),
    "deltaObs": ("delta_obs", _expect_number),
    "rings": ("rings", _expect_int), "pointsPerRing": ("points_per_ring", _expect_int),
    "caMode": ("ca_mode", _expect_str),
}

_SFM_KEYS = {
    "tau": ("tau", _expect_number), "vMaxFactor": ("v_max_factor", _expect_number),
    "repulsionA": ("repulsion_a", _expect_number), "repulsionB": ("repulsion_b", _expect_number),
    "obstacleA": ("obstacle_a", _expect_number), "obstacleB": ("obstacle_b", _expect_number),
    "fluctuationSd": ("fluctuation_sd", _expect_number), "dt": ("dt", _expect_number),
}

_FF_KEYS = {
    "mode": ("mode", _expect_str),
    "recomputeInterval": ("recompute_interval", _expect_number),
    "minSpeed": ("min_speed", _expect_number),
    "densitySlope": ("density_slope", _expect_number),
    "kernelRadius": ("kernel_radius", _expect_number),
    "cellCountCap": ("cell_count_cap", _expect_int),
}


def _bhm_from_dict(obj, path) -> BhmParams:
    obj = _expect_object(obj, path)
    _check_keys(obj, ("heuristic", "beta0", "beta1", "sigma", "perSource"), path)
    kwargs: dict[str, Any] = {}
    if "heuristic" in obj:
        kwargs["heuristic"] = _expect_str(obj["heuristic"], f"{path}.heuristic")
    for k in ("beta0", "beta1", "sigma"):
        if k in obj:
            kwargs[k] = _expect_number(obj[k], f"{path}.{k}")
    if "perSource" in obj:
        per = _expect_object(obj["perSource"], f"{path}.perSource")
        kwargs["per_source"] = tuple(sorted(
            (sid, _expect_str(h, f"{path}.perSource.{sid}")) for sid, h in per.items()))
    return BhmParams(**kwargs)


def _agent_attributes_from_dict(obj, path) -> AgentAttributes:
    keys = {
        "torsoRadius": ("torso_radius", _expect_number),
        "speedMean": ("speed_mean", _expect_number),
        "speedSd": ("speed_sd", _expect_number),
        "speedMin": ("speed_min", _expect_number),
        "speedMax": ("speed_max", _expect_number),
    }
    return _params_from_dict(AgentAttributes, obj, path, keys)


def _source_from_dict(obj, path) -> Source:
    obj = _expect_object(obj, path)
    _check_keys(obj, ("id", "shape", "spawnNumber", "interSpawnTime",
                      "firstSpawnTime", "targetIds"), path)
    for req in ("id", "shape", "spawnNumber", "targetIds"):
        if req not in obj:
            raise ScenarioSchemaError(path, f"missing field {req!r}")
    return Source(
        id=_expect_str(obj["id"], f"{path}.id"),
        shape=_shape_from_dict(obj["shape"], f"{path}.shape"),
        spawn_number=_expect_int(obj["spawnNumber"], f"{path}.spawnNumber"),
        target_ids=tuple(_expect_str(t, f"{path}.targetIds[{i}]")
                         for i, t in enumerate(_expect_list(obj["targetIds"], f"{path}.targetIds"))),
        inter_spawn_time=_expect_number(obj["interSpawnTime"], f"{path}.interSpawnTime")
        if "interSpawnTime" in obj else 1.0,
        first_spawn_time=_expect_number(obj["firstSpawnTime"], f"{path}.firstSpawnTime")
        if "firstSpawnTime" in obj else 0.0,
    )


def _target_from_dict(obj, path) -> Target:
    obj = _expect_object(obj, path)
    _check_keys(obj, ("id", "shape", "absorbing"), path)
    for req in ("id", "shape"):
        if req not in obj:
            raise ScenarioSchemaError(path, f"missing field {req!r}")
    return Target(
        id=_expect_str(obj["id"], f"{path}.id"),
        shape=_shape_from_dict(obj["shape"], f"{path}.shape"),
        absorbing=_expect_bool(obj["absorbing"], f"{path}.absorbing")
        if "absorbing" in obj else True,
    )


def _initial_agent_from_dict(obj, path) -> InitialAgent:
    obj = _expect_object(obj, path)
    _check_keys(obj, ("position", "targetId"), path)
    if "position" not in obj:
        raise ScenarioSchemaError(path, "missing field 'position'")
    return InitialAgent(
        position=_expect_point(obj["position"], f"{path}.position"),
        target_id=_expect_str(obj["targetId"], f"{path}.targetId") if "targetId" in obj else "",
    )


def _topography_from_dict(obj, path) -> Topography:
    obj = _expect_object(obj, path)
    _check_keys(obj, ("bounds", "obstacles", "sources", "targets", "initialAgents"), path)
    if "bounds" not in obj:
        raise ScenarioSchemaError(path, "missing field 'bounds'")
    b = _expect_object(obj["bounds"], f"{path}.bounds")
    _check_keys(b, ("origin", "width", "height"), f"{path}.bounds")
    try:
        bounds = Rectangle(_expect_point(b.get("origin", [0.0, 0.0]), f"{path}.bounds.origin"),
                           _expect_number(b["width"], f"{path}.bounds.width"),
                           _expect_number(b["height"], f"{path}.bounds.height"))
    except KeyError as e:
        raise ScenarioSchemaError(f"{path}.bounds", f"missing field {e.args[0]!r}") from None
    except GeometryError as e:
        raise ScenarioSchemaError(f"{path}.bounds", str(e)) from None
    return Topography(
        bounds=bounds,
        obstacles=tuple(_shape_from_dict(o, f"{path}.obstacles[{i}]")
                        for i, o in enumerate(_expect_list(obj.get("obstacles", []), f"{path}.obstacles"))),
        sources=tuple(_source_from_dict(s, f"{path}.sources[{i}]")
                      for i, s in enumerate(_expect_list(obj.get("sources", []), f"{path}.sources"))),
        targets=tuple(_target_from_dict(t, f"{path}.targets[{i}]")
                      for i, t in enumerate(_expect_list(obj.get("targets", []), f"{path}.targets"))),
        initial_agents=tuple(_initial_agent_from_dict(a, f"{path}.initialAgents[{i}]")
                             for i, a in enumerate(_expect_list(obj.get("initialAgents", []),
                                                                f"{path}.initialAgents"))),
    )


def _processor_from_dict(obj, path) -> ProcessorConfig:
    obj = _expect_object(obj, path)
    kind = _expect_str(obj.get("type", ""), f"{path}.type")
    if kind == "density":
        _check_keys(obj, ("type", "id", "measurementArea"), path)
        if "measurementArea" not in obj:
            raise ScenarioSchemaError(path, "missing field 'measurementArea'")
        return DensityProcessorConfig(
            id=_expect_str(obj.get("id", "density"), f"{path}.id"),
            measurement_area=_shape_from_dict(obj["measurementArea"], f"{path}.measurementArea"))
    if kind == "flow":
        _check_keys(obj, ("type", "id", "line", "windowSeconds"), path)
        if "line" not in obj:
            raise ScenarioSchemaError(path, "missing field 'line'")
        line = _expect_object(obj["line"], f"{path}.line")
        _check_keys(line, ("a", "b"), f"{path}.line")
        if "a" not in line or "b" not in line:
            raise ScenarioSchemaError(f"{path}.line", "needs endpoints 'a' and 'b'")
        return FlowProcessorConfig(
            id=_expect_str(obj.get("id", "flow"), f"{path}.id"),
            line_a=_expect_point(line["a"], f"{path}.line.a"),
            line_b=_expect_point(line["b"], f"{path}.line.b"),
            window_seconds=_expect_number(obj["windowSeconds"], f"{path}.windowSeconds")
            if "windowSeconds" in obj else 10.0)
    if kind == "evacuationTime":
        _check_keys(obj, ("type", "id"), path)
        return EvacuationTimeProcessorConfig(
            id=_expect_str(obj.get("id", "evacuationTime"), f"{path}.id"))
    raise ScenarioSchemaError(f"{path}.type", f"unknown processor type {kind!r}")


def scenario_from_dict(data: dict) -> Scenario:
    """Build a Scenario from parsed JSON, applying defaults; strict keys."""
    data = _expect_object(data, "")
    _check_keys(data, ("name", "seed", "finishTime", "outputTimeStep", "modelName",
                       "modelParams", "agentAttributes", "topography", "processors",
                       "floorFieldCellSize", "floorField"), "")
    for req in ("name", "seed", "finishTime", "topography"):
        if req not in data:
            raise ScenarioSchemaError("", f"missing field {req!r}")
    mp = _expect_object(data.get("modelParams", {}), "modelParams")
    _check_keys(mp, ("osm", "sfm", "bhm"), "modelParams")
    model_params = ModelParams(
        osm=_params_from_dict(OsmParams, mp.get("osm", {}), "modelParams.osm", _OSM_KEYS),
        sfm=_params_from_dict(SfmParams, mp.get("sfm", {}), "modelParams.sfm", _SFM_KEYS),
        bhm=_bhm_from_dict(mp.get("bhm", {}), "modelParams.bhm"),
    )
    return Scenario(
        name=_expect_str(data["name"], "name"),
        seed=_expect_int(data["seed"], "seed"),
        finish_time=_expect_number(data["finishTime"], "finishTime"),
        output_time_step=_expect_number(data["outputTimeStep"], "outputTimeStep")
        if "outputTimeStep" in data else 0.4,
        model_name=_expect_str(data.get("modelName", "osm"), "modelName"),
        model_params=model_params,
        agent_attributes=_agent_attributes_from_dict(data.get("agentAttributes", {}),
                                                     "agentAttributes"),
        topography=_topography_from_dict(data["topography"], "topography"),
        processors=tuple(_processor_from_dict(p, f"processors[{i}]")
                         for i, p in enumerate(_expect_list(data.get("processors", []),
                                                            "processors"))),
        floor_field_cell_size=_expect_number(data["floorFieldCellSize"], "floorFieldCellSize")
        if "floorFieldCellSize" in data else 0.1,
        floor_field=_params_from_dict(FloorFieldParams, data.get("floorField", {}),
                                      "floorField", _FF_KEYS),
    )


def scenario_to_dict(s: Scenario) -> dict:
    """Canonical dict form: fixed key order, every default made explicit."""
    return {
        "name": s.name,
        "seed": s.seed,
        "finishTime": s.finish_time,
        "outputTimeStep": s.output_time_step,
        "modelName": s.model_name,
        "floorFieldCellSize": s.floor_field_cell_size,
        "agentAttributes": {
            "torsoRadius": s.agent_attributes.torso_radius,
            "speedMean": s.agent_attributes.speed_mean,
            "speedSd": s.agent_attributes.speed_sd,
            "speedMin": s.agent_attributes.speed_min,
            "speedMax": s.agent_attributes.speed_max,
        },
        "modelParams": {
            "osm": {
                "beta0": s.model_params.osm.beta0,
                "beta1": s.model_params.osm.beta1,
                "sigma": s.model_params.osm.sigma,
                "deltaInt": s.model_params.osm.delta_int,
                "deltaPer": s.model_params.osm.delta_per,
                "hTor": s.model_params.osm.h_tor,
                "hInt": s.model_params.osm.h_int,
                "hPer": s.model_params.osm.h_per,
                "hObs": s.model_params.osm.h_obs,
                "deltaObs": s.model_params.osm.delta_obs,
                "rings": s.model_params.osm.rings,
                "pointsPerRing": s.model_params.osm.points_per_ring,
                "caMode": s.model_params.osm.ca_mode,
            },
            "sfm": {
                "tau": s.model_params.sfm.tau,
                "vMaxFactor": s.model_params.sfm.v_max_factor,
                "repulsionA": s.model_params.sfm.repulsion_a,
                "repulsionB": s.model_params.sfm.repulsion_b,
                "obstacleA": s.model_params.sfm.obstacle_a,
                "obstacleB": s.model_params.sfm.obstacle_b,
                "fluctuationSd": s.model_params.sfm.fluctuation_sd,
                "dt": s.model_params.sfm.dt,
            },
            "bhm": {
                "heuristic": s.model_params.bhm.heuristic,
                "beta0": s.model_params.bhm.beta0,
                "beta1": s.model_params.bhm.beta1,
                "sigma": s.model_params.bhm.sigma,
                "perSource": {sid: h for sid, h in s.model_params.bhm.per_source},
            },
        },
        "floorField": {
            "mode": s.floor_field.mode,
            "recomputeInterval": s.floor_field.recompute_interval,
            "minSpeed": s.floor_field.min_speed,
            "densitySlope": s.floor_field.density_slope,
            "kernelRadius": s.floor_field.kernel_radius,
            "cellCountCap": s.floor_field.cell_count_cap,
        },
        "topography": {
            "bounds": {
                "origin": [s.topography.bounds.origin.x, s.topography.bounds.origin.y],
                "width": s.topography.bounds.width,
                "height": s.topography.bounds.height,
            },
            "obstacles": [_shape_to_dict(o) for o in s.topography.obstacles],
            "sources": [{
                "id": src.id,
                "shape": _shape_to_dict(src.shape),
                "spawnNumber": src.spawn_number,
                "interSpawnTime": src.inter_spawn_time,
                "firstSpawnTime": src.first_spawn_time,
                "targetIds": list(src.target_ids),
            } for src in s.topography.sources],
            "targets": [{
                "id": t.id,
                "shape": _shape_to_dict(t.shape),
                "absorbing": t.absorbing,
            } for t in s.topography.targets],
            "initialAgents": [{
                "position": [a.position.x, a.position.y],
                "targetId": a.target_id,
            } for a in s.topography.initial_agents],
        },
        "processors": [_processor_to_dict(p) for p in s.processors],
    }


def _processor_to_dict(p: ProcessorConfig) -> dict:
    if isinstance(p, DensityProcessorConfig):
        return {"type": "density", "id": p.id,
                "measurementArea": _shape_to_dict(p.measurement_area)}
    if isinstance(p, FlowProcessorConfig):
        return {"type": "flow", "id": p.id,
                "line": {"a": [p.line_a.x, p.line_a.y], "b": [p.line_b.x, p.line_b.y]},
                "windowSeconds": p.window_seconds}
    return {"type": "evacuationTime", "id": p.id}


def parse_scenario(text: str, validate: bool = True) -> Scenario:
    """Parse scenario JSON text; raises on syntax, schema or semantic errors.

    With validate=False only syntax and schema are enforced (used by the
    `validate` CLI command, which reports semantic diagnostics itself).
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioSyntaxError(e.msg, e.lineno, e.colno) from None
    scenario = scenario_from_dict(data)
    if validate:
        diagnostics = validate_scenario(scenario)
        errors = [d for d in diagnostics if d.severity == "error"]
        if errors:
            raise ScenarioValidationError(errors)
    return scenario


def serialize_scenario(s: Scenario) -> str:
    """Deterministic JSON text: same Scenario value => byte-identical output."""
    return json.dumps(scenario_to_dict(s), indent=2) + "\n"


def load_scenario(path, validate: bool = True) -> Scenario:
    with open(path, encoding="utf-8") as f:
        return parse_scenario(f.read(), validate=validate)


# --------------------------------------------------------------------------
# semantic validation


def _shape_inside_bounds(shape: Shape, bounds: Rectangle) -> bool:
    x0, y0, x1, y1 = shape.bounding_box()
    return (bounds.origin.x <= x0 and bounds.origin.y <= y0
            and x1 <= bounds.x_max and y1 <= bounds.y_max)


def validate_scenario(s: Scenario) -> list[Diagnostic]:
    """Pure semantic check; empty result means the scenario is runnable."""
    out: list[Diagnostic] = []
    err = lambda msg, eid="": out.append(Diagnostic("error", msg, eid))
    warn = lambda msg, eid="": out.append(Diagnostic("warning", msg, eid))

    topo = s.topography
    bounds = topo.bounds
    target_ids = [t.id for t in topo.targets]

    if s.model_name not in MODEL_NAMES:
        err(f"unknown model {s.model_name!r}, expected one of {', '.join(MODEL_NAMES)}")
    if s.finish_time <= 0:
        err("finishTime must be > 0")
    if s.output_time_step <= 0:
        err("outputTimeStep must be > 0")
    elif s.output_time_step > s.finish_time:
        err("outputTimeStep must not exceed finishTime")
    if s.floor_field_cell_size <= 0:
        err("floorFieldCellSize must be > 0")
    if s.floor_field.mode not in ("static", "dynamic"):
        err(f"unknown floor field mode {s.floor_field.mode!r}")

    a = s.agent_attributes
    if a.torso_radius <= 0:
        err("torsoRadius must be > 0")
    if a.speed_sd < 0:
        err("speedSd must be >= 0")
    if a.speed_min <= 0:
        err("speedMin must be > 0")
    if not (a.speed_min <= a.speed_mean <= a.speed_max):
        err("speed bounds must satisfy speedMin <= speedMean <= speedMax")

    # id uniqueness over sources + targets
    seen: set[str] = set()
    for eid in [src.id for src in topo.sources] + target_ids:
        if eid in seen:
            err("duplicate element id", eid)
        seen.add(eid)

    for src in topo.sources:
        if not src.target_ids:
            err("source has no target", src.id)
        for t in src.target_ids:
            if t not in target_ids:
                err(f"source references missing target {t!r}", src.id)
        if src.spawn_number < 0:
            err("spawnNumber must be >= 0", src.id)
        if src.inter_spawn_time <= 0:
            err("interSpawnTime must be > 0", src.id)
        if src.first_spawn_time < 0:
            err("firstSpawnTime must be >= 0", src.id)
        if not _shape_inside_bounds(src.shape, bounds):
            err("source shape extends outside topography bounds", src.id)
        for j, obs in enumerate(topo.obstacles):
            if shape_shape_distance(src.shape, obs) == 0.0:
                warn(f"source shape overlaps obstacle {j}; agents spawn in the free part",
                     src.id)

    for tgt in topo.targets:
        if not _shape_inside_bounds(tgt.shape, bounds):
            err("target shape extends outside topography bounds", tgt.id)
        for j, obs in enumerate(topo.obstacles):
            if shape_shape_distance(tgt.shape, obs) == 0.0:
                warn(f"target shape overlaps obstacle {j}", tgt.id)

    for i, agent in enumerate(topo.initial_agents):
        aid = f"agent {i + 1}"
        if not agent.target_id:
            err("pedestrian is defined without a target", aid)
        elif agent.target_id not in target_ids:
            err(f"references missing target {agent.target_id!r}", aid)
        if not bounds.contains(agent.position):
            err("initial position outside topography bounds", aid)
        for j, obs in enumerate(topo.obstacles):
            if distance_to_shape(agent.position, obs) < a.torso_radius:
                err(f"initial position overlaps obstacle {j}", aid)
        for k in range(i):
            other = topo.initial_agents[k]
            dx = agent.position.x - other.position.x
            dy = agent.position.y - other.position.y
            if (dx * dx + dy * dy) ** 0.5 < 2 * a.torso_radius:
                err(f"initial position overlaps agent {k + 1}", aid)

    # model parameter invariants
    osm = s.model_params.osm
    if s.model_name in ("osm", "osm-ca", "bhm"):
        bp = (osm.beta0, osm.beta1, osm.sigma) if s.model_name != "bhm" else \
             (s.model_params.bhm.beta0, s.model_params.bhm.beta1, s.model_params.bhm.sigma)
        if bp[0] <= 0 or bp[1] <= 0:
            err("step-length coefficients beta0, beta1 must be > 0")
        if bp[2] < 0:
            err("sigma must be >= 0")
    if s.model_name in ("osm", "osm-ca"):
        if not (2 * a.torso_radius <= osm.delta_int < osm.delta_per):
            err("need 2*torsoRadius <= deltaInt < deltaPer")
        if not (osm.h_tor > osm.h_int > osm.h_per > 0):
            err("potential heights must satisfy hTor > hInt > hPer > 0")
        if osm.h_obs <= 0 or osm.delta_obs <= 0:
            err("obstacle potential height and range must be > 0")
        if osm.rings < 1 or osm.points_per_ring < 4:
            err("candidate set needs rings >= 1 and pointsPerRing >= 4")
        if osm.ca_mode not in CA_MODES:
            err(f"unknown caMode {osm.ca_mode!r}")
    if s.model_name == "sfm":
        sfm = s.model_params.sfm
        for name, v in (("tau", sfm.tau), ("vMaxFactor", sfm.v_max_factor),
                        ("repulsionA", sfm.repulsion_a), ("repulsionB", sfm.repulsion_b),
                        ("obstacleA", sfm.obstacle_a), ("obstacleB", sfm.obstacle_b),
                        ("dt", sfm.dt)):
            if v <= 0:
                err(f"sfm parameter {name} must be > 0")
        if sfm.fluctuation_sd < 0:
            err("sfm fluctuationSd must be >= 0")
    if s.model_name == "bhm":
        bhm = s.model_params.bhm
        if bhm.heuristic not in BHM_HEURISTICS:
            err(f"unknown heuristic {bhm.heuristic!r}")
        source_ids = {src.id for src in topo.sources}
        for sid, h in bhm.per_source:
            if sid not in source_ids:
                err(f"perSource entry references missing source {sid!r}")
            if h not in BHM_HEURISTICS:
                err(f"unknown heuristic {h!r} for source {sid!r}")

    for p in s.processors:
        if isinstance(p, FlowProcessorConfig):
            if p.line_a == p.line_b:
                err("flow measurement line is degenerate", p.id)
            if p.window_seconds <= 0:
                err("flow window must be > 0", p.id)

    # grid-resolution warning: h should resolve the narrowest positive gap
    gap = _smallest_gap(topo)
    if gap is not None and s.floor_field_cell_size > gap + 1e-12:
        warn(f"floorFieldCellSize {s.floor_field_cell_size:g} m exceeds the narrowest "
             f"obstacle gap {gap:.3g} m; passages may not be resolved")

    return out


def _smallest_gap(topo: Topography):
    """Narrowest strictly-positive gap between obstacles (and domain walls)."""
    obstacles = topo.obstacles
    gaps = []
    for i in range(len(obstacles)):
        for j in range(i + 1, len(obstacles)):
            d = shape_shape_distance(obstacles[i], obstacles[j])
            if d > 0:
                gaps.append(d)
    x0, y0, x1, y1 = topo.bounds.bounding_box()
    walls = [(Point2(x0, y0), Point2(x1, y0)), (Point2(x1, y0), Point2(x1, y1)),
             (Point2(x1, y1), Point2(x0, y1)), (Point2(x0, y1), Point2(x0, y0))]
    for obs in obstacles:
        for a, b in walls:
            d = segment_shape_distance(a, b, obs)
            if d > 0:
                gaps.append(d)
    return min(gaps) if gaps else None
