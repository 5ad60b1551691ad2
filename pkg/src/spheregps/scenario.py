"""Scenario files: JSON serialization of a sphere, observations, and
optional ground truth.

Schema (kilometres and km-equivalent times throughout)::

    {
      "sphere": {"center": [x, y, z], "radius": r},
      "observations": [{"position": [x, y, z], "arrival_time": t}, ...],
      "truth": {"solutions": [{"position": [x, y, z], "offset": t}, ...]}
    }

``truth`` is optional and carries planted solutions for testing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Observation, SphereConstraint


@dataclass(frozen=True)
class TruthSolution:
    position: np.ndarray
    offset: float


@dataclass(frozen=True)
class Scenario:
    sphere: SphereConstraint
    observations: tuple[Observation, ...]
    truth: tuple[TruthSolution, ...] | None = None


class ScenarioFormatError(ValueError):
    """The scenario document is structurally invalid."""


def _vector3(value, context: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3,):
        raise ScenarioFormatError(f"{context} must be a 3-vector")
    return arr


def parse_scenario(text: str) -> Scenario:
    data = json.loads(text)
    if not isinstance(data, dict):
        raise ScenarioFormatError("scenario document must be a JSON object")
    try:
        sphere_data = data["sphere"]
        sphere = SphereConstraint(
            center=_vector3(sphere_data["center"], "sphere.center"),
            radius=float(sphere_data["radius"]),
        )
        raw_observations = data["observations"]
    except KeyError as exc:
        raise ScenarioFormatError(f"scenario is missing {exc}") from exc
    if not isinstance(raw_observations, list) or len(raw_observations) < 3:
        raise ScenarioFormatError("scenario needs at least 3 observations")
    observations = tuple(
        Observation(
            sat_position=_vector3(entry["position"], "observation position"),
            arrival_time=float(entry["arrival_time"]),
        )
        for entry in raw_observations
    )
    truth = None
    if data.get("truth") is not None:
        truth = tuple(
            TruthSolution(
                position=_vector3(entry["position"], "truth position"),
                offset=float(entry["offset"]),
            )
            for entry in data["truth"].get("solutions", [])
        )
    return Scenario(sphere=sphere, observations=observations, truth=truth)


def load_scenario(path) -> Scenario:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


def scenario_to_json(scenario: Scenario) -> str:
    document = {
        "sphere": {
            "center": list(scenario.sphere.center),
            "radius": scenario.sphere.radius,
        },
        "observations": [
            {
                "position": list(obs.sat_position),
                "arrival_time": obs.arrival_time,
            }
            for obs in scenario.observations
        ],
    }
    if scenario.truth is not None:
        document["truth"] = {
            "solutions": [
                {"position": list(sol.position), "offset": sol.offset}
                for sol in scenario.truth
            ]
        }
    return json.dumps(document, indent=2)


def save_scenario(scenario: Scenario, path) -> None:
    Path(path).write_text(scenario_to_json(scenario) + "\n", encoding="utf-8")
