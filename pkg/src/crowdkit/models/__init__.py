"""Locomotion models: factory and shared interface."""

from .base import AgentState, LocomotionModel, ModelError, SteppingModel
from .bhm import BhmModel
from .osm import OsmModel
from .sfm import SfmModel

__all__ = ["AgentState", "LocomotionModel", "ModelError", "SteppingModel",
           "OsmModel", "SfmModel", "BhmModel", "make_model"]


def make_model(model_name: str) -> LocomotionModel:
    if model_name in ("osm", "osm-ca"):
        return OsmModel()
    if model_name == "sfm":
        return SfmModel()
    if model_name == "bhm":
        return BhmModel()
    raise ValueError(f"unknown locomotion model {model_name!r}")
