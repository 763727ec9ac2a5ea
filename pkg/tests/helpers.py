"""Shared builders for test scenarios (plain dicts, tweak then parse)."""

from __future__ import annotations

import copy

from crowdkit.scenario import Scenario, scenario_from_dict


def corridor_dict(length=42.0, height=2.0, model="osm", finish=40.0,
                  seed=7, cell=0.1, agents=((1.0, 1.0),)) -> dict:
    """Straight corridor with an absorbing target strip at the right end."""
    return {
        "name": "corridor",
        "seed": seed,
        "finishTime": finish,
        "outputTimeStep": 0.4,
        "modelName": model,
        "modelParams": {"osm": {"sigma": 0.0}, "bhm": {"sigma": 0.0}},
        "agentAttributes": {"speedSd": 0.0},
        "floorFieldCellSize": cell,
        "topography": {
            "bounds": {"origin": [0.0, 0.0], "width": length, "height": height},
            "targets": [{"id": "exit", "shape": {
                "type": "rectangle", "origin": [length - 1.0, 0.0],
                "width": 1.0, "height": height}}],
            "initialAgents": [{"position": [x, y], "targetId": "exit"}
                              for x, y in agents],
        },
    }


def source_corridor_dict(spawn_number=5, inter=1.0, first=0.0, **kw) -> dict:
    doc = corridor_dict(agents=(), **kw)
    doc["topography"]["sources"] = [{
        "id": "entry",
        "shape": {"type": "rectangle", "origin": [0.5, 0.5],
                  "width": 1.0, "height": 1.0},
        "spawnNumber": spawn_number,
        "interSpawnTime": inter,
        "firstSpawnTime": first,
        "targetIds": ["exit"],
    }]
    return doc


def bottleneck_dict(n_agents=50, model="osm", seed=3, finish=60.0) -> dict:
    """Room draining through a 1.2 m gap into an absorbing exit strip."""
    width, height, gap = 16.0, 10.0, 1.2
    wall_x = 10.0
    wall_w = 0.4
    side = (height - gap) / 2
    return {
        "name": "bottleneck",
        "seed": seed,
        "finishTime": finish,
        "outputTimeStep": 0.4,
        "modelName": model,
        "agentAttributes": {"speedSd": 0.2},
        "floorFieldCellSize": 0.1,
        "topography": {
            "bounds": {"origin": [0.0, 0.0], "width": width, "height": height},
            "obstacles": [
                {"type": "rectangle", "origin": [wall_x, 0.0],
                 "width": wall_w, "height": side},
                {"type": "rectangle", "origin": [wall_x, height - side],
                 "width": wall_w, "height": side},
            ],
            "sources": [{
                "id": "crowd",
                "shape": {"type": "rectangle", "origin": [1.0, 1.0],
                          "width": 5.0, "height": 8.0},
                "spawnNumber": n_agents,
                "interSpawnTime": 0.05,
                "firstSpawnTime": 0.0,
                "targetIds": ["out"],
            }],
            "targets": [{"id": "out", "shape": {
                "type": "rectangle", "origin": [width - 1.0, 0.0],
                "width": 1.0, "height": height}}],
        },
    }


def build(doc: dict) -> Scenario:
    return scenario_from_dict(copy.deepcopy(doc))
