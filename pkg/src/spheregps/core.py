"""Core types and the closed-form on-sphere solver.

Distances are kilometres.  Arrival times use the same unit by normalizing
the signal speed to 1, so a measurement ``t_i`` and the unknown receiver
clock offset ``t`` satisfy ``||s_i - x|| = t_i - t >= 0`` at the true
receiver position ``x``.

Squaring and rearranging the range equations yields a linear system in the
augmented unknown ``(t, x, ||x||^2 - t^2)``.  With enough affinely
independent satellites the position block can be eliminated through a
pseudo-inverse, leaving the one-parameter family ``x = u*t + v``.
Intersecting that line with a known sphere gives a quadratic in ``t`` and
at most two candidate positions.  The norm of ``u`` doubles as an
ambiguity indicator: ``||u|| <= 1`` certifies that the unconstrained
problem has a unique solution.

All operations are pure functions; the dataclasses are frozen and their
array fields are marked read-only, so values are safe to share between
threads.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateQuadratic, RankDeficient

# Ratio of smallest to largest singular value of the (normalized) design
# matrix below which the satellite geometry is declared rank deficient.
RANK_TOLERANCE = 1e-10

# ||u|| below this treats the solution line as a single fixed point.
_DIRECTION_TOLERANCE = 1e-12


def _frozen_vector(value, name: str) -> np.ndarray:
    vec = np.array(value, dtype=float)
    if vec.ndim != 1 or vec.shape[0] not in (2, 3):
        raise ValueError(f"{name} must be a 2- or 3-vector, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise ValueError(f"{name} must have finite components")
    vec.flags.writeable = False
    return vec


@dataclass(frozen=True)
class Observation:
    """One satellite measurement: emitter position (km) and arrival-time
    difference (km-equivalent, signal speed = 1)."""

    sat_position: np.ndarray
    arrival_time: float

    def __post_init__(self):
        object.__setattr__(
            self, "sat_position", _frozen_vector(self.sat_position, "sat_position")
        )
        t = float(self.arrival_time)
        if not math.isfinite(t):
            raise ValueError("arrival_time must be finite")
        object.__setattr__(self, "arrival_time", t)


@dataclass(frozen=True)
class SphereConstraint:
    """The sphere the receiver is assumed to lie on: center (km), radius (km)."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _frozen_vector(self.center, "center"))
        r = float(self.radius)
        if not math.isfinite(r) or r < 0.0:
            raise ValueError("radius must be finite and non-negative")
        object.__setattr__(self, "radius", r)


@dataclass(frozen=True)
class Solution:
    """A candidate receiver fix with residual diagnostics.

    ``max_residual`` is the largest absolute defect of the range equations,
    ``max_i | ||s_i - position|| - (t_i - offset) |``, over the observations
    the candidate was solved against.  ``satisfies_sign_constraint`` records
    whether every ``t_i - offset`` is non-negative, i.e. whether the fix
    satisfies the range equations without taking absolute values.
    """

    position: np.ndarray
    offset: float
    max_residual: float
    satisfies_sign_constraint: bool

    def __post_init__(self):
        object.__setattr__(self, "position", _frozen_vector(self.position, "position"))


@dataclass(frozen=True)
class ReducedSystem:
    """Pseudo-inverse elimination of the position block.

    For any exact fix, ``position = u * offset + v`` and
    ``||position||^2 - offset^2 = 2 * alpha * offset + beta``.
    ``u`` is dimensionless, ``v`` is in km, ``beta`` in km^2.
    Only defined when the design matrix has full column rank.
    """

    u: np.ndarray
    alpha: float
    v: np.ndarray
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "u", _frozen_vector(self.u, "u"))
        object.__setattr__(self, "v", _frozen_vector(self.v, "v"))


class Ambiguity(enum.Enum):
    UNIQUE = "Unique"
    POSSIBLY_TWO = "PossiblyTwo"


def _stack(observations) -> tuple[np.ndarray, np.ndarray]:
    if len(observations) == 0:
        raise ValueError("at least one observation is required")
    dims = {obs.sat_position.shape[0] for obs in observations}
    if len(dims) != 1:
        raise ValueError("observations mix 2- and 3-dimensional positions")
    sats = np.array([obs.sat_position for obs in observations], dtype=float)
    times = np.array([obs.arrival_time for obs in observations], dtype=float)
    return sats, times


def build_linear_system(observations) -> tuple[np.ndarray, np.ndarray]:
    """Assemble the linearized range equations.

    Row ``i`` is ``(-2*t_i, 2*s_i^T, -1)`` acting on the unknown vector
    ``(t, x, ||x||^2 - t^2)``, with right-hand side ``||s_i||^2 - t_i^2``.
    """
    sats, times = _stack(observations)
    m = sats.shape[0]
    matrix = np.hstack([
        (-2.0 * times)[:, None],
        2.0 * sats,
        -np.ones((m, 1)),
    ])
    rhs = np.einsum("ij,ij->i", sats, sats) - times**2
    return matrix, rhs


def reduce(observations) -> ReducedSystem:
    """Eliminate the position block of the linearized system.

    Solves the two least-squares problems that express ``(x, ||x||^2-t^2)``
    as an affine function of ``t``, so ``x = u*t + v`` holds for every exact
    fix.  The computation runs on a centered and scaled copy of the
    satellite coordinates (an exact reparametrization of the same
    least-squares problem) and maps the result back, which keeps the
    factorization well conditioned at orbital scales.

    Raises RankDeficient when fewer than ``dim + 1`` satellites are affinely
    independent, detected as a singular-value ratio below RANK_TOLERANCE.
    """
    sats, times = _stack(observations)
    m, dim = sats.shape
    if m < dim + 1:
        raise ValueError(f"need at least {dim + 1} observations, got {m}")

    shift = sats.mean(axis=0)
    centered = sats - shift
    scale = max(1.0, float(np.sqrt(np.mean(np.sum(centered**2, axis=1)))))
    centered /= scale
    times_s = times / scale

    design = np.hstack([2.0 * centered, -np.ones((m, 1))])
    u_mat, sing, vt = np.linalg.svd(design, full_matrices=False)
    if sing[0] == 0.0 or sing[-1] / sing[0] < RANK_TOLERANCE:
        raise RankDeficient(
            f"satellite geometry is rank deficient (singular value ratio "
            f"{0.0 if sing[0] == 0.0 else sing[-1] / sing[0]:.3e})"
        )

    def pinv_apply(rhs):
        return vt.T @ ((u_mat.T @ rhs) / sing)

    first = pinv_apply(2.0 * times_s)
    second = pinv_apply(
        np.einsum("ij,ij->i", centered, centered) - times_s**2
    )
    u = first[:dim]
    alpha_s = first[dim] / 2.0
    v_s = second[:dim]
    beta_s = second[dim]

    v = scale * v_s + shift
    alpha = scale * alpha_s + float(u @ shift)
    beta = scale**2 * beta_s + 2.0 * float(v @ shift) - float(shift @ shift)
    return ReducedSystem(u=u, alpha=alpha, v=v, beta=beta)


def ambiguity_indicator(reduced: ReducedSystem) -> Ambiguity:
    """Uniqueness certificate for the unconstrained problem.

    ``||u|| <= 1`` guarantees a single solution; otherwise a second solution
    may exist (and may also lie on the sphere).
    """
    if float(np.linalg.norm(reduced.u)) > 1.0:
        return Ambiguity.POSSIBLY_TWO
    return Ambiguity.UNIQUE


def residuals(position, offset: float, observations) -> tuple[float, bool]:
    """Evaluate a candidate fix against the range equations.

    Returns ``(max_i | ||s_i - x|| - (t_i - t) |, all(t_i - t >= 0))``.
    """
    sats, times = _stack(observations)
    pos = np.asarray(position, dtype=float)
    ranges = np.linalg.norm(sats - pos, axis=1)
    travel = times - float(offset)
    max_residual = float(np.max(np.abs(ranges - travel)))
    sign_ok = bool(np.all(travel >= 0.0))
    return max_residual, sign_ok


def loosened_max_residual(position, offset: float, observations) -> float:
    """Like :func:`residuals` but measured against ``|t_i - t|``, accepting
    fixes that solve the squared range equations with either sign."""
    sats, times = _stack(observations)
    pos = np.asarray(position, dtype=float)
    ranges = np.linalg.norm(sats - pos, axis=1)
    return float(np.max(np.abs(ranges - np.abs(times - float(offset)))))


def make_solution(position, offset: float, observations) -> Solution:
    """Wrap a candidate fix with residual diagnostics."""
    max_residual, sign_ok = residuals(position, offset, observations)
    return Solution(
        position=np.asarray(position, dtype=float),
        offset=float(offset),
        max_residual=max_residual,
        satisfies_sign_constraint=sign_ok,
    )


def _quadratic_roots(a: float, b: float, c: float) -> list[float]:
    """Real roots of ``a*t^2 + b*t + c`` for a > 0, merging near-double
    roots into the vertex value."""
    disc = b * b - 4.0 * a * c
    disc_tol = 1e-12 * max(b * b, abs(4.0 * a * c))
    if disc < -disc_tol:
        return []
    if disc <= disc_tol:
        return [-b / (2.0 * a)]
    # q is nonzero here: it vanishes only for b = 0 and disc = 0, which the
    # near-double-root branch above already absorbed.
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    return sorted({q / a, c / q})


def solve_on_sphere(
    observations,
    sphere: SphereConstraint,
    *,
    residual_tolerance: float | None = None,
    strict_sign: bool = False,
) -> list[Solution]:
    """Closed-form candidate fixes for a receiver on a known sphere.

    Substitutes the solution line ``x = u*t + v`` into
    ``||x - center||^2 = radius^2`` and solves the resulting quadratic
    ``||u||^2 t^2 + 2 u.(v - center) t + ||v - center||^2 - radius^2 = 0``,
    returning up to two candidates sorted by offset.

    Candidates whose loosened residual exceeds ``residual_tolerance`` are
    dropped.  The default tolerance is ``1e-6 * max(1, radius)`` km; pass
    ``math.inf`` to keep every root (useful when the receiver is only near
    the sphere and exactness cannot be expected).  With ``strict_sign`` the
    sign constraint ``t_i - t >= 0`` also discards candidates; otherwise it
    is only recorded on the returned solutions.

    Raises RankDeficient for degenerate satellite geometry and
    DegenerateQuadratic when the solution line degenerates to a single
    point that misses the sphere.
    """
    reduced = reduce(observations)
    u, v = reduced.u, reduced.v
    center, radius = sphere.center, sphere.radius
    if center.shape != v.shape:
        raise ValueError("sphere dimension does not match the observations")

    offset_dir = v - center
    a = float(u @ u)
    b = 2.0 * float(u @ offset_dir)
    c = float(offset_dir @ offset_dir) - radius**2

    if residual_tolerance is None:
        residual_tolerance = 1e-6 * max(1.0, radius)

    scale = max(1.0, radius, float(np.linalg.norm(offset_dir)))
    if a <= _DIRECTION_TOLERANCE**2:
        # The solution line collapses to the single point v.
        if abs(b) > 1e-12 * scale:
            roots = [-c / b]
        elif abs(c) <= 1e-6 * max(1.0, radius) * (scale + radius + 1.0):
            # Consistent for every t: the position is fixed at v, so take
            # the offset that best explains the measured times.
            sats, times = _stack(observations)
            ranges = np.linalg.norm(sats - v, axis=1)
            roots = [float(np.mean(times - ranges))]
        else:
            raise DegenerateQuadratic(
                "solution line degenerates to a point off the sphere"
            )
    else:
        roots = _quadratic_roots(a, b, c)

    solutions = []
    for t in roots:
        candidate = make_solution(u * t + v, t, observations)
        if loosened_max_residual(candidate.position, t, observations) > residual_tolerance:
            continue
        if strict_sign and not candidate.satisfies_sign_constraint:
            continue
        solutions.append(candidate)
    solutions.sort(key=lambda s: s.offset)
    return solutions
