"""Exact sphere-constrained positioning from three satellites.

Constraining the receiver to a known sphere makes the problem solvable with
only three satellites (two in the 2-D variant used for testing).  The key
object is the bordered squared-distance matrix of the five points
(receiver, sphere center, satellites): it is singular whenever the points
embed in 3-space, and treating the unknown clock offset ``t`` as a variable
turns its determinant into a degree-4 polynomial whose real roots are the
only admissible offsets.  Each root is then converted back to at most two
candidate positions by intersecting the range spheres.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Observation, SphereConstraint, Solution, make_solution, _stack
from .errors import CollinearSatellites, ZeroPolynomial

# |leading coefficient| below this fraction of the largest coefficient is
# treated as a vanishing t^4 term, i.e. collinear satellites.
_LEADING_TOLERANCE = 1e-12

# A complex root counts as real when |imag| < _REAL_TOLERANCE * (1 + |real|).
_REAL_TOLERANCE = 1e-8

# Real roots closer than _CLUSTER_TOLERANCE * (1 + |t|) are merged.
_CLUSTER_TOLERANCE = 1e-7

# Singular values below this fraction of the largest are treated as zero
# when classifying the trilateration system.
_RANK_CUTOFF = 1e-10


@dataclass(frozen=True)
class QuarticPolynomial:
    """Polynomial of degree at most four; coefficients stored ascending
    (degree 0 through 4)."""

    coefficients: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coefficients, dtype=float)
        if coeffs.shape != (5,):
            raise ValueError("expected 5 coefficients (degree 0 through 4)")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")
        coeffs.flags.writeable = False
        object.__setattr__(self, "coefficients", coeffs)

    def __call__(self, t: float) -> float:
        return float(np.polynomial.polynomial.polyval(t, self.coefficients))


@dataclass(frozen=True)
class CayleyMengerInputs:
    """A three-satellite scenario with its derived mutual distances.

    ``center_distances[i]`` is the satellite-to-sphere-center distance and
    ``pair_distances[i, j]`` the distance between satellites ``i`` and
    ``j``.  The number of observations must equal the ambient dimension
    (three satellites in 3-D, two in 2-D).
    """

    sphere: SphereConstraint
    observations: tuple[Observation, ...]
    center_distances: np.ndarray = field(init=False)
    pair_distances: np.ndarray = field(init=False)

    def __post_init__(self):
        observations = tuple(self.observations)
        object.__setattr__(self, "observations", observations)
        dim = self.sphere.center.shape[0]
        if len(observations) != dim:
            raise ValueError(
                f"expected exactly {dim} observations for dimension {dim}, "
                f"got {len(observations)}"
            )
        sats, _ = _stack(observations)
        if sats.shape[1] != dim:
            raise ValueError("observation dimension does not match the sphere")
        center_distances = np.linalg.norm(sats - self.sphere.center, axis=1)
        diffs = sats[:, None, :] - sats[None, :, :]
        pair_distances = np.linalg.norm(diffs, axis=2)
        center_distances.flags.writeable = False
        pair_distances.flags.writeable = False
        object.__setattr__(self, "center_distances", center_distances)
        object.__setattr__(self, "pair_distances", pair_distances)


def _bordered_matrix(inputs: CayleyMengerInputs, t: float) -> np.ndarray:
    """Bordered squared-distance matrix of (receiver, center, satellites)
    with the receiver rows filled in from the offset hypothesis ``t``."""
    sats, times = _stack(inputs.observations)
    m = sats.shape[0]
    size = m + 3
    mat = np.zeros((size, size))
    mat[0, 1:] = 1.0
    mat[1:, 0] = 1.0
    r2 = inputs.sphere.radius**2
    travel2 = (times - t) ** 2
    mat[1, 2] = mat[2, 1] = r2
    mat[1, 3:] = travel2
    mat[3:, 1] = travel2
    mat[2, 3:] = inputs.center_distances**2
    mat[3:, 2] = inputs.center_distances**2
    mat[3:, 3:] = inputs.pair_distances**2
    return mat


def cayley_menger_determinant(inputs: CayleyMengerInputs, t: float) -> float:
    """Determinant of the bordered squared-distance matrix at offset ``t``.

    Vanishes (up to round-off) at every offset belonging to an exact
    solution of the sphere-constrained range equations.
    """
    return float(np.linalg.det(_bordered_matrix(inputs, float(t))))


def extract_quartic(inputs: CayleyMengerInputs) -> QuarticPolynomial:
    """The offset polynomial ``f(t) = det(bordered matrix)``.

    Evaluates the determinant at nine Chebyshev nodes spanning the
    geometry scale and fits the degree-4 model, which is exact for
    polynomial values and avoids expanding the determinant symbolically.
    The fit runs in a shifted variable to keep the Vandermonde system well
    conditioned, then converts back to plain monomial coefficients.  The
    four surplus nodes measure the round-off level of the determinant
    evaluations: the fit residual is zero for exact values, so whatever is
    left over is numerical noise.

    Raises CollinearSatellites when the quartic term is insignificant,
    either relative to the other terms or relative to the measured noise,
    which happens exactly when the satellites are (numerically) collinear.
    """
    _, times = _stack(inputs.observations)
    geometry = max(
        inputs.sphere.radius,
        float(np.max(inputs.center_distances)),
        float(np.max(np.abs(times))),
    )
    mid = 0.5 * (float(times.min()) + float(times.max()))
    # Node spread tracks the geometry scale, not just the arrival-time
    # span, so the quartic term stays resolvable even when all arrival
    # times coincide.
    half = max(1.0, 0.5 * (float(times.max()) - float(times.min())), 0.25 * geometry)
    nodes = mid + half * np.cos((2.0 * np.arange(9) + 1.0) * np.pi / 18.0)

    values = np.array([cayley_menger_determinant(inputs, node) for node in nodes])
    vander = np.vander((nodes - mid) / half, 5, increasing=True)
    fitted, *_ = np.linalg.lstsq(vander, values, rcond=None)
    noise = float(np.max(np.abs(vander @ fitted - values)))
    shifted = fitted * half ** -np.arange(5)

    # Binomial shift back to coefficients of t: f(t) = sum a_k (t - mid)^k.
    coeffs = np.zeros(5)
    for k in range(5):
        for j in range(k + 1):
            coeffs[j] += shifted[k] * _binomial(k, j) * (-mid) ** (k - j)

    # Compare the quartic term through its contribution to the determinant
    # values at node scale; raw coefficient ratios are meaningless when the
    # roots are large.
    contributions = np.abs(fitted)
    if contributions[4] < max(
        _LEADING_TOLERANCE * float(np.max(contributions)), 30.0 * noise
    ):
        raise CollinearSatellites(
            "leading coefficient of the offset polynomial vanishes; "
            "satellite positions are collinear"
        )
    return QuarticPolynomial(coefficients=coeffs)


def _binomial(n: int, k: int) -> float:
    out = 1.0
    for i in range(k):
        out = out * (n - i) / (i + 1)
    return out


def real_roots(poly: QuarticPolynomial) -> list[float]:
    """All real roots of the polynomial, ascending, with near-coincident
    roots merged.

    Roots come from the companion-matrix eigenvalues of the polynomial
    rewritten in a root-bound-scaled variable (so the companion entries are
    order one regardless of the coordinate scale), followed by a Newton
    polishing pass that keeps clustered near-double roots accurate.

    Raises ZeroPolynomial when every coefficient vanishes.
    """
    coeffs = np.asarray(poly.coefficients, dtype=float)
    if float(np.max(np.abs(coeffs))) < 1e-300:
        raise ZeroPolynomial("all coefficients vanish")

    descending = coeffs[::-1]
    nonzero = np.nonzero(descending)[0]
    trimmed = descending[nonzero[0] :]
    degree = trimmed.shape[0] - 1
    if degree < 1:
        return []  # nonzero constant: no roots

    # Fujiwara-style bound on the root magnitudes, used as variable scale.
    ratios = [
        abs(trimmed[j] / trimmed[0]) ** (1.0 / j) for j in range(1, degree + 1)
    ]
    scale = max(1.0, 2.0 * max(ratios))
    scaled = trimmed * scale ** -np.arange(degree + 1)
    scaled /= np.max(np.abs(scaled))
    derivative = np.polyder(scaled)

    polished = []
    for root in np.roots(scaled):
        z = root
        for _ in range(3):
            dz = np.polyval(derivative, z)
            if dz == 0:
                break
            z = z - np.polyval(scaled, z) / dz
        if abs(np.polyval(scaled, z)) <= abs(np.polyval(scaled, root)):
            root = z
        if abs(root.imag) < _REAL_TOLERANCE * (1.0 + abs(root.real)):
            polished.append(scale * float(root.real))

    polished.sort()
    merged: list[float] = []
    for value in polished:
        if merged and abs(value - merged[-1]) < _CLUSTER_TOLERANCE * (1.0 + abs(value)):
            merged[-1] = 0.5 * (merged[-1] + value)
        else:
            merged.append(value)
    return merged


def positions_for_offset(inputs: CayleyMengerInputs, t: float) -> list[np.ndarray]:
    """All receiver positions compatible with the offset hypothesis ``t``.

    Solves ``||x - center|| = radius`` together with
    ``||x - s_i|| = |t_i - t|``.  Subtracting the sphere equation from each
    range equation leaves one linear equation per satellite; when the
    sphere center and the satellites are affinely independent the system
    pins a unique candidate, otherwise the solution set is a line that is
    intersected with the sphere.  Every candidate is verified against the
    original equations and inconsistent hypotheses yield an empty list.
    """
    sats, times = _stack(inputs.observations)
    center = inputs.sphere.center
    radius = inputs.sphere.radius
    ranges = np.abs(times - float(t))

    scale = max(
        1.0, radius, float(np.max(ranges)), float(np.max(inputs.center_distances))
    )
    tol = 1e-6 * scale

    matrix = 2.0 * (center[None, :] - sats)
    rhs = (
        ranges**2
        - radius**2
        - np.einsum("ij,ij->i", sats, sats)
        + float(center @ center)
    )

    def verified(x: np.ndarray) -> bool:
        if abs(float(np.linalg.norm(x - center)) - radius) > tol:
            return False
        return bool(
            np.all(np.abs(np.linalg.norm(sats - x, axis=1) - ranges) <= tol)
        )

    dim = sats.shape[1]
    _, sing, vt = np.linalg.svd(matrix)
    rank = int(np.sum(sing > _RANK_CUTOFF * sing[0])) if sing[0] > 0.0 else 0

    if rank == dim:
        x = np.linalg.solve(matrix, rhs)
        return [x] if verified(x) else []

    if rank == dim - 1:
        x0, *_ = np.linalg.lstsq(matrix, rhs, rcond=None)
        if float(np.linalg.norm(matrix @ x0 - rhs)) > 1e-8 * scale**2:
            return []  # inconsistent linear system
        normal = vt[-1]
        # Line x0 + s * normal intersected with the sphere.
        rel = x0 - center
        b = 2.0 * float(normal @ rel)
        c = float(rel @ rel) - radius**2
        disc = b * b - 4.0 * c
        if disc < 0.0:
            return []
        roots = {(-b + np.sqrt(disc)) / 2.0, (-b - np.sqrt(disc)) / 2.0}
        return [x0 + s * normal for s in sorted(roots) if verified(x0 + s * normal)]

    return []


def _polish_candidate(
    inputs: CayleyMengerInputs, position: np.ndarray, t: float
) -> tuple[np.ndarray, float]:
    """Newton-polish a candidate on the full constraint system (sphere plus
    signed range equations), squeezing out the root-conditioning error the
    polynomial route accumulates at large coordinate scales."""
    sats, times = _stack(inputs.observations)
    center = inputs.sphere.center
    radius = inputs.sphere.radius
    signs = np.sign(times - t)
    if np.any(signs == 0.0):
        return position, t

    def residual(x, t_val):
        ranges = np.linalg.norm(x - sats, axis=1)
        return np.concatenate(
            [ranges - signs * (times - t_val), [np.linalg.norm(x - center) - radius]]
        )

    x, t_val = np.array(position, dtype=float), float(t)
    best = (x, t_val, float(np.max(np.abs(residual(x, t_val)))))
    for _ in range(3):
        diffs = x - sats
        ranges = np.linalg.norm(diffs, axis=1)
        to_center = x - center
        center_range = np.linalg.norm(to_center)
        if np.any(ranges == 0.0) or center_range == 0.0:
            break
        jacobian = np.vstack(
            [
                np.hstack([diffs / ranges[:, None], signs[:, None]]),
                np.append(to_center / center_range, 0.0),
            ]
        )
        step, *_ = np.linalg.lstsq(jacobian, -residual(x, t_val), rcond=None)
        x = x + step[:-1]
        t_val = t_val + float(step[-1])
        worst = float(np.max(np.abs(residual(x, t_val))))
        if worst < best[2]:
            best = (x, t_val, worst)
    return best[0], best[1]


def solve_three_sat(
    inputs: CayleyMengerInputs, strict_sign: bool = False
) -> list[Solution]:
    """All sphere-constrained fixes for a three-satellite scenario.

    Extracts the offset polynomial, takes its real roots, and recovers the
    compatible positions for each root.  Solutions solve the loosened
    system (ranges equal to ``|t_i - t|``); with ``strict_sign`` only
    candidates with every ``t_i - t >= 0`` are kept.  The total count never
    exceeds four.

    Raises CollinearSatellites for degenerate satellite geometry.
    """
    poly = extract_quartic(inputs)
    solutions: list[Solution] = []
    for root in real_roots(poly):
        for position in positions_for_offset(inputs, root):
            polished, offset = _polish_candidate(inputs, position, root)
            candidate = make_solution(polished, offset, inputs.observations)
            if strict_sign and not candidate.satisfies_sign_constraint:
                continue
            solutions.append(candidate)
    solutions.sort(key=lambda s: s.offset)
    return solutions
