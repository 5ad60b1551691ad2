"""Solvers for a receiver near (not exactly on) the sphere.

Three methods are provided:

* ``solve_ils`` -- iterative least squares: a total-least-squares estimate
  of the linearized system refined by a fixed number of Gauss-Newton steps.
  Always yields a single solution.
* the closed-form on-sphere roots from :mod:`spheregps.core`, and
* ``solve_rsos`` -- refined solution on sphere: both on-sphere roots used
  as initial guesses for the same Gauss-Newton refinement, keeping one or
  two solutions after deduplication.

The refinement is unconstrained (no sphere term), so when the receiver is
exactly on the sphere the unrefined roots are already optimal, while for a
receiver slightly off the sphere refinement removes the model mismatch.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import core
from .core import Solution, SphereConstraint, make_solution
from .errors import DegenerateTLSWarning

# Unit-norm TLS null vectors with a smaller right-hand-side coordinate than
# this cannot be normalized; fall back to ordinary least squares.
_TLS_NORMALIZATION_TOLERANCE = 1e-12

# An iterate closer than this to a satellite has an undefined Jacobian row.
_COINCIDENCE_TOLERANCE = 1e-9
_COINCIDENCE_NUDGE = 1e-6


class Method(enum.Enum):
    ILS = "ILS"
    SOS = "SoS"
    RSOS = "RSoS"


@dataclass(frozen=True)
class RefinementConfig:
    """Knobs for the iterative refinement.

    ``dedup_threshold`` is in km; ``None`` selects one thousandth of the
    sphere radius when a sphere is available and 1 km otherwise.  With
    ``strict_sign`` refined solutions violating ``t_i - t >= 0`` are
    dropped.
    """

    iterations: int = 20
    dedup_threshold: float | None = None
    strict_sign: bool = False

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")


@dataclass(frozen=True)
class MethodResult:
    """Solutions produced by one method, with per-solution convergence
    flags.  ``used_fallback`` marks an RSoS run that fell back to ILS
    because the on-sphere quadratic had no real roots."""

    method: Method
    solutions: tuple[Solution, ...]
    converged: tuple[bool, ...]
    used_fallback: bool = False


def tls_initialize(observations) -> Solution:
    """Total-least-squares estimate of the linearized system.

    Takes the right singular direction of the augmented matrix for its
    smallest singular value, scales it so the right-hand-side coordinate is
    -1, and reads the offset and position off the first components,
    ignoring the consistency of the quadratic component.  When the
    normalization coordinate (nearly) vanishes the TLS solution lies at
    infinity; an ordinary least-squares estimate is returned instead and a
    DegenerateTLSWarning is emitted.

    Raises RankDeficient for degenerate satellite geometry (same gate as
    the pseudo-inverse reduction).
    """
    core.reduce(observations)  # rank gate shared with the reduction
    matrix, rhs = core.build_linear_system(observations)
    dim = observations[0].sat_position.shape[0]

    augmented = np.hstack([matrix, rhs[:, None]])
    _, _, vt = np.linalg.svd(augmented, full_matrices=True)
    null_direction = vt[-1]
    if abs(null_direction[-1]) < _TLS_NORMALIZATION_TOLERANCE:
        warnings.warn(
            "TLS normalization coordinate vanished; falling back to "
            "ordinary least squares",
            DegenerateTLSWarning,
            stacklevel=2,
        )
        estimate, *_ = np.linalg.lstsq(matrix, rhs, rcond=None)
    else:
        estimate = -null_direction[:-1] / null_direction[-1]
    return make_solution(estimate[1 : 1 + dim], estimate[0], observations)


def gauss_newton_refine(
    initial: Solution, observations, config: RefinementConfig | None = None
) -> tuple[Solution, bool]:
    """Run a fixed number of undamped Gauss-Newton steps on the range
    residuals ``||s_i - x|| - (t_i - t)``, jointly in position and offset.

    Returns the final iterate and a flag that is False when a step had to
    be abandoned (rank-deficient step system or non-finite iterate).
    Divergence shows up as a large residual, not as an error.
    """
    config = config or RefinementConfig()
    sats, times = core._stack(observations)
    m, dim = sats.shape

    x = np.array(initial.position, dtype=float)
    t = float(initial.offset)
    step_direction = _fallback_direction(dim)
    clean = True

    for _ in range(config.iterations):
        diffs = x - sats
        dists = np.linalg.norm(diffs, axis=1)
        if np.any(dists < _COINCIDENCE_TOLERANCE):
            x = x + _COINCIDENCE_NUDGE * step_direction
            diffs = x - sats
            dists = np.linalg.norm(diffs, axis=1)
        jacobian = np.hstack([diffs / dists[:, None], np.ones((m, 1))])
        residual = dists - (times - t)
        step, _, rank, _ = np.linalg.lstsq(jacobian, -residual, rcond=None)
        if rank < dim + 1:
            clean = False
            break
        x = x + step[:dim]
        t = t + float(step[dim])
        if not (np.all(np.isfinite(x)) and math.isfinite(t)):
            x = x - step[:dim]
            t = t - float(step[dim])
            clean = False
            break
        norm = float(np.linalg.norm(step[:dim]))
        if norm > 0.0:
            step_direction = step[:dim] / norm

    return make_solution(x, t, observations), clean


def _fallback_direction(dim: int) -> np.ndarray:
    direction = np.zeros(dim)
    direction[0] = 1.0
    return direction


def solve_ils(observations, config: RefinementConfig | None = None) -> MethodResult:
    """Iterative least squares: TLS initialization plus Gauss-Newton
    refinement.  Produces exactly one solution by construction."""
    config = config or RefinementConfig()
    initial = tls_initialize(observations)
    refined, clean = gauss_newton_refine(initial, observations, config)
    return MethodResult(method=Method.ILS, solutions=(refined,), converged=(clean,))


def solve_rsos(
    observations,
    sphere: SphereConstraint,
    config: RefinementConfig | None = None,
) -> MethodResult:
    """Refined solution on sphere.

    Uses every real root of the on-sphere quadratic as an initial guess for
    Gauss-Newton refinement (roots are taken unfiltered, since a receiver
    near but off the sphere leaves no root exact), then merges refined
    solutions closer than the deduplication threshold, keeping the one with
    the smaller residual.  When the quadratic has no real roots the method
    falls back to ILS and flags that on the result.
    """
    config = config or RefinementConfig()
    guesses = core.solve_on_sphere(
        observations, sphere, residual_tolerance=math.inf
    )
    if not guesses:
        fallback = solve_ils(observations, config)
        return MethodResult(
            method=Method.RSOS,
            solutions=fallback.solutions,
            converged=fallback.converged,
            used_fallback=True,
        )

    refined = [gauss_newton_refine(g, observations, config) for g in guesses]
    if config.strict_sign:
        refined = [
            (sol, ok) for sol, ok in refined if sol.satisfies_sign_constraint
        ] or refined

    threshold = config.dedup_threshold
    if threshold is None:
        threshold = 1e-3 * sphere.radius if sphere.radius > 0.0 else 1.0

    kept: list[tuple[Solution, bool]] = []
    for sol, ok in sorted(refined, key=lambda pair: pair[0].max_residual):
        if any(
            float(np.linalg.norm(sol.position - other.position)) <= threshold
            for other, _ in kept
        ):
            continue
        kept.append((sol, ok))
    kept.sort(key=lambda pair: pair[0].offset)
    return MethodResult(
        method=Method.RSOS,
        solutions=tuple(sol for sol, _ in kept),
        converged=tuple(ok for _, ok in kept),
    )
