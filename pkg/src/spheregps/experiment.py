"""Monte-Carlo comparison of the ILS, SoS and RSoS solvers along a path of
satellite configurations that ends in a two-solution arrangement.

The harness builds a random satellite configuration on the orbit sphere and
a generated two-solution configuration, interpolates between them in a
fixed number of steps (re-projecting onto the orbit after each
interpolation), and at every step runs a batch of noisy trials through all
three methods.  Per step and method it records the mean distance from the
best returned solution to the true receiver position and, for the methods
that can return two solutions, the mean distance between them.

Randomness is fully deterministic: the scenario construction uses a stream
derived from ``(seed, 0)`` and the noise of each trial uses an independent
PCG64 stream seeded with ``(seed, 1, step, trial)``, so results do not
depend on execution order.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import core
from .core import Observation, SphereConstraint
from .errors import PositioningError
from .quadric import generate_bad_configuration
from .refine import Method, RefinementConfig, solve_ils, solve_rsos

CSV_HEADER = [
    "step",
    "method",
    "mean_error_km",
    "mean_pair_distance_km",
    "two_solution_trials",
    "failed_trials",
    "sigma",
    "seed",
]


@dataclass(frozen=True)
class ExperimentSpec:
    """Parameters of one experiment run.

    ``user_altitude_factor`` scales the sphere the true receiver (and the
    generated two-solution configuration) lives on, while the solvers keep
    assuming the unscaled sphere; 1.0 puts the receiver exactly on the
    assumed sphere.
    """

    sphere: SphereConstraint
    orbit_radius: float = 26400.0
    num_satellites: int = 5
    path_steps: int = 50
    trials_per_step: int = 200
    noise_sigma: float = 1e-8
    user_altitude_factor: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.trials_per_step < 1:
            raise ValueError("trials_per_step must be >= 1")
        if self.path_steps < 2:
            raise ValueError("path_steps must be >= 2")
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be >= 0")
        if self.num_satellites < 4:
            raise ValueError("num_satellites must be >= 4")

    @classmethod
    def from_json(cls, text: str) -> "ExperimentSpec":
        data = json.loads(text)
        sphere = SphereConstraint(
            center=data["sphere"]["center"], radius=data["sphere"]["radius"]
        )
        kwargs = {
            key: data[key]
            for key in (
                "orbit_radius",
                "num_satellites",
                "path_steps",
                "trials_per_step",
                "noise_sigma",
                "user_altitude_factor",
                "rng_seed",
            )
            if key in data
        }
        return cls(sphere=sphere, **kwargs)

    def to_json(self) -> str:
        return json.dumps(
            {
                "sphere": {
                    "center": list(self.sphere.center),
                    "radius": self.sphere.radius,
                },
                "orbit_radius": self.orbit_radius,
                "num_satellites": self.num_satellites,
                "path_steps": self.path_steps,
                "trials_per_step": self.trials_per_step,
                "noise_sigma": self.noise_sigma,
                "user_altitude_factor": self.user_altitude_factor,
                "rng_seed": self.rng_seed,
            },
            indent=2,
        )


@dataclass(frozen=True)
class ExperimentRecord:
    """Aggregated statistics for one (step, method) cell.

    ``mean_pair_distance_km`` is None for ILS and for cells where no trial
    produced two solutions.
    """

    step_index: int
    method: Method
    mean_error_km: float
    mean_pair_distance_km: float | None
    num_two_solution_trials: int
    num_failed_trials: int
    sigma: float
    seed: int


@dataclass(frozen=True)
class _PathEndpoints:
    truth_position: np.ndarray
    truth_offset: float
    start: np.ndarray  # (m, 3) random configuration
    end: np.ndarray  # (m, 3) two-solution configuration


# Half-angle of the cone of sky the random configuration is drawn from.  A
# narrow cone models a receiver with a mostly occluded sky; with only a few
# visible satellites it yields the flat, poorly conditioned geometry whose
# noise amplification the harness is designed to expose.
_START_CONE_HALF_ANGLE = math.radians(4.0)


def _endpoints(spec: ExperimentSpec) -> _PathEndpoints:
    rng = np.random.default_rng([spec.rng_seed, 0])
    scaled = SphereConstraint(
        center=spec.sphere.center,
        radius=spec.sphere.radius * spec.user_altitude_factor,
    )
    bad = generate_bad_configuration(
        scaled, spec.orbit_radius, spec.num_satellites, rng_seed=rng
    )
    truth = bad.solution_a
    end = np.array([obs.sat_position for obs in bad.observations])

    up = truth.position - spec.sphere.center
    while True:  # cone axis: a random direction visible from the receiver
        axis = rng.standard_normal(3)
        axis /= np.linalg.norm(axis)
        if float((spec.sphere.center + spec.orbit_radius * axis - truth.position) @ up) > 0.0:
            break
    helper = np.array([0.0, 0.0, 1.0]) if abs(axis[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = np.cross(helper, axis)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)

    start = np.empty_like(end)
    cos_min = math.cos(_START_CONE_HALF_ANGLE)
    for i in range(spec.num_satellites):
        cos_polar = rng.uniform(cos_min, 1.0)
        sin_polar = math.sqrt(1.0 - cos_polar**2)
        azimuth = rng.uniform(0.0, 2.0 * math.pi)
        direction = cos_polar * axis + sin_polar * (
            math.cos(azimuth) * e1 + math.sin(azimuth) * e2
        )
        start[i] = spec.sphere.center + spec.orbit_radius * direction
    return _PathEndpoints(
        truth_position=np.array(truth.position),
        truth_offset=truth.offset,
        start=start,
        end=end,
    )


def build_path(spec: ExperimentSpec) -> list[np.ndarray]:
    """Satellite configurations along the path, one ``(m, 3)`` array per
    step.  Step 0 is the random configuration, the last step the
    two-solution configuration; intermediate steps interpolate each
    satellite linearly and re-project onto the orbit sphere."""
    ends = _endpoints(spec)
    configs = []
    for k in range(spec.path_steps):
        lam = k / (spec.path_steps - 1)
        blend = (1.0 - lam) * ends.start + lam * ends.end
        rel = blend - spec.sphere.center
        norms = np.linalg.norm(rel, axis=1, keepdims=True)
        configs.append(spec.sphere.center + spec.orbit_radius * rel / norms)
    return configs


def _best_error(solutions, truth: np.ndarray) -> float:
    return min(
        float(np.linalg.norm(sol.position - truth)) for sol in solutions
    )


def _pair_distance(solutions) -> float | None:
    if len(solutions) != 2:
        return None
    return float(np.linalg.norm(solutions[0].position - solutions[1].position))


def run_experiment(spec: ExperimentSpec) -> list[ExperimentRecord]:
    """Run the full path of noisy trials and aggregate per-step statistics.

    Per trial each arrival time is perturbed with independent zero-mean
    Gaussian noise, the three methods are run, and the distance from the
    best returned solution to the true receiver is recorded.  Solver
    failures (and methods returning no solution) count as missing samples
    for that trial, never abort the run, and are tallied per cell.
    """
    ends = _endpoints(spec)
    configs = build_path(spec)
    config = RefinementConfig(iterations=20)
    records: list[ExperimentRecord] = []

    for step, sats in enumerate(configs):
        base_times = (
            np.linalg.norm(sats - ends.truth_position, axis=1) + ends.truth_offset
        )
        errors = {m: [] for m in Method}
        pairs = {m: [] for m in Method}
        failures = {m: 0 for m in Method}

        for trial in range(spec.trials_per_step):
            noise_rng = np.random.default_rng([spec.rng_seed, 1, step, trial])
            noisy = base_times + spec.noise_sigma * noise_rng.standard_normal(
                spec.num_satellites
            )
            observations = [
                Observation(sat, time) for sat, time in zip(sats, noisy)
            ]

            for method in Method:
                try:
                    if method is Method.ILS:
                        solutions = solve_ils(observations, config).solutions
                    elif method is Method.SOS:
                        solutions = core.solve_on_sphere(
                            observations, spec.sphere, residual_tolerance=math.inf
                        )
                    else:
                        solutions = solve_rsos(
                            observations, spec.sphere, config
                        ).solutions
                except PositioningError:
                    solutions = ()
                if not solutions:
                    failures[method] += 1
                    continue
                errors[method].append(_best_error(solutions, ends.truth_position))
                if method is not Method.ILS:
                    pair = _pair_distance(solutions)
                    if pair is not None:
                        pairs[method].append(pair)

        for method in Method:
            mean_error = (
                float(np.mean(errors[method])) if errors[method] else math.nan
            )
            mean_pair = (
                float(np.mean(pairs[method])) if pairs[method] else None
            )
            records.append(
                ExperimentRecord(
                    step_index=step,
                    method=method,
                    mean_error_km=mean_error,
                    mean_pair_distance_km=mean_pair,
                    num_two_solution_trials=len(pairs[method]),
                    num_failed_trials=failures[method],
                    sigma=spec.noise_sigma,
                    seed=spec.rng_seed,
                )
            )
    return records


def _format(value: float) -> str:
    return f"{value:.17g}"


def write_records(records, destination) -> None:
    """Write records as CSV, one row per (step, method).

    The pair-distance field is left empty when absent (always for ILS).
    """
    path = Path(destination)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_HEADER)
        for record in records:
            writer.writerow(
                [
                    record.step_index,
                    record.method.value,
                    "" if math.isnan(record.mean_error_km) else _format(record.mean_error_km),
                    ""
                    if record.mean_pair_distance_km is None
                    else _format(record.mean_pair_distance_km),
                    record.num_two_solution_trials,
                    record.num_failed_trials,
                    _format(record.sigma),
                    record.seed,
                ]
            )
