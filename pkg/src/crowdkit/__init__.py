"""crowdkit: microscopic pedestrian-dynamics simulation engine.

Scenario files declare a topography, a locomotion model (optimal steps,
its cellular-automaton mimic, social force, or behavioral heuristics),
parameters and a seed; the engine produces deterministic trajectory and
measurement files. See README.md and docs/scenario-schema.md.
"""

from ._build import __version__, build_identifier
from .engine import RunSummary, SimulationState, run_simulation
from .scenario import (Scenario, load_scenario, parse_scenario,
                       serialize_scenario, validate_scenario)

__all__ = ["__version__", "build_identifier", "run_simulation", "RunSummary",
           "SimulationState", "Scenario", "load_scenario", "parse_scenario",
           "serialize_scenario", "validate_scenario"]
