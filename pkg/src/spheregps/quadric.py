"""Hyperboloids of revolution with prescribed foci, and generation of
satellite configurations whose positioning problem has two exact solutions.

A two-sheeted hyperboloid of revolution is the locus
``| ||p - x|| - ||p - x'|| | = 2a`` for foci ``x, x'`` and axial semi-axis
``0 < a < ||x - x'|| / 2``.  Satellites confined to one sheet cannot
distinguish the two foci: every sheet point is a fixed constant ``2a``
closer to one focus than to the other, so a clock-offset shift of ``2a``
swaps the two as solutions of the range equations.  Sampling a sheet along
its intersection with an orbit sphere therefore produces realistic
"two-solution" scenarios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .core import Observation, Solution, SphereConstraint, make_solution
from .errors import (
    DegenerateFoci,
    EmptyIntersection,
    InfeasibleGeometry,
    InvalidSemiAxis,
)


class Sheet(Enum):
    NEAR_FOCUS_A = "NearFocusA"
    NEAR_FOCUS_B = "NearFocusB"


@dataclass(frozen=True)
class HyperboloidOfRevolution:
    """Two-sheeted hyperboloid of revolution in focal form.

    ``center`` is the midpoint of the foci, ``axis`` the unit vector from
    ``focus_b`` toward ``focus_a``.  The semi-axes satisfy the focal
    condition ``axial^2 + transverse^2 = (||focus_a - focus_b|| / 2)^2``.
    """

    center: np.ndarray
    axis: np.ndarray
    focus_a: np.ndarray
    focus_b: np.ndarray
    axial_semi_axis: float
    transverse_semi_axis: float


def hyperboloid_from_foci(x, x_prime, a: float) -> HyperboloidOfRevolution:
    """Hyperboloid of revolution whose points satisfy
    ``| ||p - x|| - ||p - x'|| | = 2a``.

    Raises DegenerateFoci when the foci coincide and InvalidSemiAxis unless
    ``0 < a < ||x - x'|| / 2``.
    """
    focus_a = np.asarray(x, dtype=float)
    focus_b = np.asarray(x_prime, dtype=float)
    diff = focus_a - focus_b
    separation = float(np.linalg.norm(diff))
    if separation < 1e-12:
        raise DegenerateFoci("focal points coincide")
    half = separation / 2.0
    a = float(a)
    if not 0.0 < a < half:
        raise InvalidSemiAxis(
            f"axial semi-axis must lie in (0, {half}), got {a}"
        )
    return HyperboloidOfRevolution(
        center=0.5 * (focus_a + focus_b),
        axis=diff / separation,
        focus_a=focus_a,
        focus_b=focus_b,
        axial_semi_axis=a,
        transverse_semi_axis=math.sqrt(half * half - a * a),
    )


def evaluate_quadric(h: HyperboloidOfRevolution, p) -> float | np.ndarray:
    """Quadratic-form value ``(p-m)^T M (p-m) - 1``; zero on the surface.

    ``M`` has eigenvalue ``1/a^2`` along the axis and ``-1/b^2``
    transversally.  Accepts a single point or an ``(N, dim)`` batch.
    """
    points = np.asarray(p, dtype=float)
    rel = points - h.center
    axial = rel @ h.axis
    total = np.einsum("...i,...i->...", rel, rel)
    transverse = total - axial**2
    value = (
        axial**2 / h.axial_semi_axis**2
        - transverse / h.transverse_semi_axis**2
        - 1.0
    )
    return float(value) if points.ndim == 1 else value


def _transverse_basis(axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    helper = np.array([0.0, 0.0, 1.0])
    if abs(axis @ helper) > 0.9:
        helper = np.array([1.0, 0.0, 0.0])
    e1 = np.cross(helper, axis)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)
    return e1, e2


def _sheet_point(
    h: HyperboloidOfRevolution,
    sign: float,
    psi: float,
    e1: np.ndarray,
    e2: np.ndarray,
    azimuth: float,
) -> np.ndarray:
    axial = h.axial_semi_axis * math.cosh(psi)
    rad = h.transverse_semi_axis * math.sinh(psi)
    direction = math.cos(azimuth) * e1 + math.sin(azimuth) * e2
    return h.center + sign * axial * h.axis + rad * direction


def sample_sheet(
    h: HyperboloidOfRevolution,
    which: Sheet,
    count: int,
    orbit: tuple | None = None,
    rng_seed=None,
) -> np.ndarray:
    """Sample points on one sheet, optionally confined to an orbit sphere.

    Without ``orbit`` the sheet is sampled in its natural (axial, azimuth)
    parametrization.  With ``orbit = (center, radius)`` every returned point
    also lies on the orbit sphere: for each sampled azimuth the axial
    coordinate is found by bracketing and root solving, so points sit on
    the intersection curve to near machine precision.

    ``rng_seed`` accepts anything ``numpy.random.default_rng`` accepts,
    including an existing Generator.

    Raises EmptyIntersection when the sheet misses the orbit sphere.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(rng_seed)
    sign = 1.0 if which is Sheet.NEAR_FOCUS_A else -1.0
    e1, e2 = _transverse_basis(h.axis)

    if orbit is None:
        psi = rng.uniform(0.0, 2.5, size=count)
        azimuth = rng.uniform(0.0, 2.0 * math.pi, size=count)
        axial = h.axial_semi_axis * np.cosh(psi)
        rad = h.transverse_semi_axis * np.sinh(psi)
        direction = np.cos(azimuth)[:, None] * e1 + np.sin(azimuth)[:, None] * e2
        return h.center + sign * axial[:, None] * h.axis + rad[:, None] * direction

    orbit_center = np.asarray(orbit[0], dtype=float)
    orbit_radius = float(orbit[1])
    reach = (orbit_radius + float(np.linalg.norm(h.center - orbit_center))) / min(
        h.axial_semi_axis, h.transverse_semi_axis
    )
    psi_max = math.acosh(max(2.0, reach + 1.0))
    grid = np.linspace(0.0, psi_max, 160)

    def gap(psi: float, azimuth: float) -> float:
        point = _sheet_point(h, sign, psi, e1, e2, azimuth)
        return float(np.sum((point - orbit_center) ** 2)) - orbit_radius**2

    points = []
    attempts = 0
    max_attempts = 128 + 64 * count
    while len(points) < count and attempts < max_attempts:
        attempts += 1
        azimuth = float(rng.uniform(0.0, 2.0 * math.pi))
        values = np.array([gap(p, azimuth) for p in grid])
        crossings = np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)[0]
        if crossings.size == 0:
            continue
        pick = int(rng.integers(crossings.size))
        lo, hi = grid[crossings[pick]], grid[crossings[pick] + 1]
        psi = brentq(gap, lo, hi, args=(azimuth,), xtol=1e-13, rtol=8.9e-16)
        points.append(_sheet_point(h, sign, psi, e1, e2, azimuth))
    if len(points) < count:
        raise EmptyIntersection(
            "requested sheet does not intersect the orbit sphere"
        )
    return np.array(points)


@dataclass(frozen=True)
class BadConfiguration:
    """A satellite arrangement whose positioning problem has two exact
    solutions, together with those solutions and the generating surface."""

    observations: tuple[Observation, ...]
    solution_a: Solution
    solution_b: Solution
    hyperboloid: HyperboloidOfRevolution


# Default focus separation: chord of a 30-degree arc of the sphere.
_FOCUS_ARC = math.radians(30.0)
# Default axial semi-axis as a fraction of the half focal distance.
_SEMI_AXIS_FRACTION = 0.2


def generate_bad_configuration(
    sphere: SphereConstraint,
    orbit_radius: float,
    m_sats: int,
    a: float | None = None,
    rng_seed=None,
) -> BadConfiguration:
    """Construct a two-solution scenario with both solutions on the sphere.

    Picks two foci on the sphere separated by a 30-degree arc, builds the
    hyperboloid of revolution between them, samples ``m_sats`` satellites
    on one sheet intersected with the orbit sphere, polishes them onto the
    surface to machine precision, and derives arrival times from the first
    focus.  Both foci then satisfy the range equations exactly, with
    offsets differing by twice the axial semi-axis.

    Raises InfeasibleGeometry when neither sheet meets the orbit sphere.
    """
    if m_sats < 4:
        raise ValueError("m_sats must be >= 4")
    if sphere.center.shape[0] != 3:
        raise ValueError("bad-configuration generation is 3-dimensional")
    rng = np.random.default_rng(rng_seed)

    radial = _random_unit(rng)
    ortho = _random_unit(rng)
    ortho -= (ortho @ radial) * radial
    ortho /= np.linalg.norm(ortho)
    focus_a = sphere.center + sphere.radius * radial
    focus_b = sphere.center + sphere.radius * (
        math.cos(_FOCUS_ARC) * radial + math.sin(_FOCUS_ARC) * ortho
    )

    half = 0.5 * float(np.linalg.norm(focus_a - focus_b))
    if a is None:
        a = _SEMI_AXIS_FRACTION * half
    surface = hyperboloid_from_foci(focus_a, focus_b, a)

    sats = None
    for sheet, offset_shift in ((Sheet.NEAR_FOCUS_A, -2.0 * a), (Sheet.NEAR_FOCUS_B, 2.0 * a)):
        try:
            sats = sample_sheet(
                surface, sheet, m_sats, orbit=(sphere.center, orbit_radius), rng_seed=rng
            )
        except EmptyIntersection:
            continue
        break
    if sats is None:
        raise InfeasibleGeometry(
            "neither sheet of the constructed hyperboloid meets the orbit sphere"
        )

    sats = np.array([_polish_metric(s, focus_a, focus_b, 2.0 * a) for s in sats])

    offset = float(rng.uniform(-1e4, 0.0))
    times = np.linalg.norm(sats - focus_a, axis=1) + offset
    observations = tuple(
        Observation(sat, time) for sat, time in zip(sats, times)
    )
    solution_a = make_solution(focus_a, offset, observations)
    solution_b = make_solution(focus_b, offset + offset_shift, observations)
    return BadConfiguration(
        observations=observations,
        solution_a=solution_a,
        solution_b=solution_b,
        hyperboloid=surface,
    )


def _random_unit(rng) -> np.ndarray:
    while True:
        vec = rng.standard_normal(3)
        norm = np.linalg.norm(vec)
        if norm > 1e-12:
            return vec / norm


def _polish_metric(point, focus_a, focus_b, target: float) -> np.ndarray:
    """Newton-project a near-surface point onto the exact locus
    ``| ||p - a|| - ||p - b|| | = target`` so both planted solutions come
    out with residuals at the round-off floor."""
    p = np.array(point, dtype=float)
    for _ in range(3):
        da = p - focus_a
        db = p - focus_b
        norm_a = np.linalg.norm(da)
        norm_b = np.linalg.norm(db)
        value = abs(norm_a - norm_b) - target
        grad = math.copysign(1.0, norm_a - norm_b) * (da / norm_a - db / norm_b)
        denom = float(grad @ grad)
        if denom == 0.0:
            break
        p -= value * grad / denom
    return p
