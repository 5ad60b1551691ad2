"""Shared test utilities: forward-constructed scenarios with planted
solutions and an independent dense-grid oracle for the three-satellite
solver."""

from __future__ import annotations

import numpy as np
from scipy.optimize import least_squares

from spheregps import Observation, SphereConstraint


def unit_vector(rng, dim=3):
    vec = rng.standard_normal(dim)
    return vec / np.linalg.norm(vec)


def planted_scenario(
    rng,
    m,
    dim=3,
    center_range=3.0,
    radius_range=(0.5, 2.0),
    sat_shell=(5.0, 10.0),
    offset_range=(-5.0, 0.0),
):
    """Random scenario with a receiver planted exactly on the sphere.

    Returns (observations, sphere, position, offset).  Arrival times are
    exact, so the planted pair solves the range equations to round-off.
    """
    center = rng.uniform(-center_range, center_range, dim)
    radius = rng.uniform(*radius_range)
    position = center + radius * unit_vector(rng, dim)
    offset = rng.uniform(*offset_range)
    sats = np.array(
        [center + rng.uniform(*sat_shell) * unit_vector(rng, dim) for _ in range(m)]
    )
    observations = [
        Observation(s, float(np.linalg.norm(s - position) + offset)) for s in sats
    ]
    return observations, SphereConstraint(center, radius), position, offset


def gps_scenario(rng, m, radius=6400.0, orbit=26400.0, altitude_factor=1.0):
    """Orbital-scale scenario: receiver on (or slightly above) a sphere at
    the origin, satellites on the part of the orbit sphere visible from it."""
    position = radius * altitude_factor * unit_vector(rng)
    offset = rng.uniform(-1e4, 0.0)
    sats = []
    while len(sats) < m:
        candidate = orbit * unit_vector(rng)
        if float((candidate - position) @ position) > 0.0:
            sats.append(candidate)
    sats = np.array(sats)
    observations = [
        Observation(s, float(np.linalg.norm(s - position) + offset)) for s in sats
    ]
    return observations, SphereConstraint(np.zeros(3), radius), position, offset


def sphere_point(sphere, angles):
    """Point on the sphere for polar/azimuthal parameters (2-D: one angle)."""
    if sphere.center.shape[0] == 2:
        (theta,) = angles
        direction = np.array([np.cos(theta), np.sin(theta)])
    else:
        theta, phi = angles
        direction = np.array(
            [
                np.sin(theta) * np.cos(phi),
                np.sin(theta) * np.sin(phi),
                np.cos(theta),
            ]
        )
    return sphere.center + sphere.radius * direction


def grid_oracle_solutions(sphere, observations, t_range, grid=60, t_grid=240):
    """Dense grid search over (point on sphere, offset) refined locally.

    Independent of the polynomial machinery: scans the loosened residual
    over a parametrization of the sphere crossed with an offset interval,
    refines every promising cell with a local least-squares solve, and
    returns the deduplicated (position, offset) pairs that reach zero
    residual.
    """
    sats = np.array([o.sat_position for o in observations])
    times = np.array([o.arrival_time for o in observations])
    dim = sphere.center.shape[0]

    if dim == 2:
        thetas = np.linspace(0.0, 2.0 * np.pi, grid * 4, endpoint=False)
        angle_grid = [(t,) for t in thetas]
    else:
        thetas = np.linspace(1e-3, np.pi - 1e-3, grid)
        phis = np.linspace(0.0, 2.0 * np.pi, 2 * grid, endpoint=False)
        angle_grid = [(t, p) for t in thetas for p in phis]
    offsets = np.linspace(t_range[0], t_range[1], t_grid)

    points = np.array([sphere_point(sphere, a) for a in angle_grid])
    ranges = np.linalg.norm(points[:, None, :] - sats[None, :, :], axis=2)
    # loosened residual on the whole grid, vectorized over offsets
    cost = np.abs(ranges[:, None, :] - np.abs(times[None, None, :] - offsets[None, :, None]))
    cost = cost.max(axis=2)

    scale = max(1.0, sphere.radius, float(np.abs(times).max()))
    threshold = np.percentile(cost, 0.5)
    seeds = np.argwhere(cost <= max(threshold, 1e-3 * scale))

    def residual_function(params):
        *angles, offset = params
        point = sphere_point(sphere, tuple(angles))
        return np.linalg.norm(point - sats, axis=1) - np.abs(times - offset)

    found = []
    for point_index, offset_index in seeds:
        start = list(angle_grid[point_index]) + [offsets[offset_index]]
        result = least_squares(residual_function, start, method="lm")
        if result.cost > (1e-9 * scale) ** 2:
            continue
        point = sphere_point(sphere, tuple(result.x[:-1]))
        offset = float(result.x[-1])
        if any(
            np.linalg.norm(point - p) < 1e-5 * scale and abs(offset - o) < 1e-5 * scale
            for p, o in found
        ):
            continue
        found.append((point, offset))
    return found
