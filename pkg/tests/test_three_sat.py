import numpy as np
import pytest

from spheregps import (
    CayleyMengerInputs,
    CollinearSatellites,
    Observation,
    QuarticPolynomial,
    SphereConstraint,
    ZeroPolynomial,
    cayley_menger_determinant,
    extract_quartic,
    positions_for_offset,
    real_roots,
    solve_three_sat,
)
from spheregps.core import loosened_max_residual
from helpers import grid_oracle_solutions, unit_vector

# Worked example: three integer satellites whose offset polynomial has four
# real roots, each yielding an exact fix on the unit sphere.
EXAMPLE_SATS = [(-4.0, 6.0, 6.0), (0.0, 1.0, 2.0), (-1.0, 5.0, 9.0)]
EXAMPLE_TIMES = [-2.0, -9.0, -1.0]
EXAMPLE_SPHERE = SphereConstraint((0.0, 0.0, 0.0), 1.0)
EXAMPLE_COEFFS_DESC = (4232.0, 188416.0, 3141776.0, 23254272.0, 64463912.0)
EXAMPLE_ROOTS = (-11.8922, -11.7298, -10.4779, -10.4216)


def example_inputs():
    observations = tuple(
        Observation(s, t) for s, t in zip(EXAMPLE_SATS, EXAMPLE_TIMES)
    )
    return CayleyMengerInputs(sphere=EXAMPLE_SPHERE, observations=observations)


def planted_three_sat(rng, dim=3, coplanar=False):
    """Scenario with a receiver planted on the sphere and exact times."""
    center = rng.uniform(-3, 3, dim)
    radius = rng.uniform(0.5, 2.0)
    position = center + radius * unit_vector(rng, dim)
    offset = rng.uniform(-5.0, 0.0)
    while True:
        sats = np.array(
            [center + rng.uniform(3, 8) * unit_vector(rng, dim) for _ in range(dim)]
        )
        if coplanar and dim == 3:
            sats[:, 2] = center[2]  # satellites in the center's plane
        spread = np.linalg.svd(sats - sats.mean(axis=0), compute_uv=False)
        if spread[dim - 2] > 0.5:  # affinely well-spread satellites
            break
    observations = tuple(
        Observation(s, float(np.linalg.norm(s - position) + offset)) for s in sats
    )
    inputs = CayleyMengerInputs(
        sphere=SphereConstraint(center, radius), observations=observations
    )
    return inputs, position, offset


def hadamard_scale(inputs, t):
    from spheregps.three_sat import _bordered_matrix

    matrix = _bordered_matrix(inputs, t)
    return float(np.prod(np.linalg.norm(matrix, axis=1)))


class TestCayleyMengerDeterminant:
    def test_vanishes_at_exact_solution(self):
        rng = np.random.default_rng(61)
        for _ in range(20):
            inputs, _, offset = planted_three_sat(rng)
            value = cayley_menger_determinant(inputs, offset)
            assert abs(value) < 1e-6 * hadamard_scale(inputs, offset)

    def test_collinear_satellites_drop_degree(self):
        sats = [(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (2.0, 0.0, 0.0)]
        observations = tuple(Observation(s, -float(i)) for i, s in enumerate(sats))
        inputs = CayleyMengerInputs(
            sphere=SphereConstraint((0.0, 1.0, 0.0), 1.0), observations=observations
        )
        # interpolate the determinant at five nodes and inspect the leading
        # coefficient directly, independent of extract_quartic
        nodes = np.linspace(-2.0, 2.0, 5)
        values = [cayley_menger_determinant(inputs, t) for t in nodes]
        coeffs = np.linalg.solve(np.vander(nodes, increasing=True), values)
        assert abs(coeffs[4]) < 1e-9 * max(1.0, np.max(np.abs(coeffs)))

    def test_matches_polynomial_on_example(self):
        inputs = example_inputs()
        printed = np.polynomial.polynomial.Polynomial(EXAMPLE_COEFFS_DESC[::-1])
        for t in (-12.0, -11.0, -10.5, -3.0, 0.0, 2.5):
            assert cayley_menger_determinant(inputs, t) == pytest.approx(
                printed(t), rel=1e-9, abs=1e-3
            )


class TestExtractQuartic:
    def test_example_coefficients(self):
        poly = extract_quartic(example_inputs())
        np.testing.assert_allclose(
            poly.coefficients[::-1], EXAMPLE_COEFFS_DESC, rtol=1e-9
        )

    def test_collinear_raises(self):
        sats = [(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (2.0, 0.0, 0.0)]
        observations = tuple(Observation(s, -1.0) for s in sats)
        inputs = CayleyMengerInputs(
            sphere=SphereConstraint((0.0, 1.0, 0.0), 1.0), observations=observations
        )
        with pytest.raises(CollinearSatellites):
            extract_quartic(inputs)

    def test_leading_coefficient_identity(self):
        # the t^4 coefficient equals the negated bordered determinant of the
        # satellites alone, computed here independently
        rng = np.random.default_rng(62)
        for _ in range(20):
            inputs, _, _ = planted_three_sat(rng)
            sats = np.array([o.sat_position for o in inputs.observations])
            pair2 = ((sats[:, None, :] - sats[None, :, :]) ** 2).sum(axis=2)
            bordered = np.ones((4, 4))
            bordered[0, 0] = 0.0
            bordered[1:, 1:] = pair2
            expected = -np.linalg.det(bordered)
            assert extract_quartic(inputs).coefficients[4] == pytest.approx(
                expected, rel=1e-9
            )


class TestRealRoots:
    def test_example_roots(self):
        poly = QuarticPolynomial(np.array(EXAMPLE_COEFFS_DESC[::-1]))
        roots = real_roots(poly)
        assert len(roots) == 4
        np.testing.assert_allclose(roots, EXAMPLE_ROOTS, atol=1e-3)

    def test_constructed_factorization(self):
        # (t-1)(t-2)(t-3)(t-4) = 24 - 50 t + 35 t^2 - 10 t^3 + t^4
        poly = QuarticPolynomial(np.array([24.0, -50.0, 35.0, -10.0, 1.0]))
        np.testing.assert_allclose(real_roots(poly), [1.0, 2.0, 3.0, 4.0], atol=1e-9)

    def test_no_real_roots(self):
        poly = QuarticPolynomial(np.array([1.0, 0.0, 0.0, 0.0, 1.0]))
        assert real_roots(poly) == []

    def test_zero_polynomial(self):
        with pytest.raises(ZeroPolynomial):
            real_roots(QuarticPolynomial(np.zeros(5)))

    def test_double_root_merged(self):
        # (t-1)^2 (t^2+1): roots {1, 1} merge to a single entry
        poly = QuarticPolynomial(np.array([1.0, -2.0, 2.0, -2.0, 1.0]))
        roots = real_roots(poly)
        assert len(roots) == 1
        assert roots[0] == pytest.approx(1.0, abs=1e-6)


class TestPositionsForOffset:
    def test_recovers_planted_position(self):
        rng = np.random.default_rng(63)
        for _ in range(20):
            inputs, position, offset = planted_three_sat(rng)
            candidates = positions_for_offset(inputs, offset)
            assert len(candidates) == 1
            assert np.linalg.norm(candidates[0] - position) < 1e-6

    def test_coplanar_mirror_solutions(self):
        rng = np.random.default_rng(64)
        center = np.array([0.5, -0.25, 1.0])
        radius = 2.0
        sats = np.array(
            [
                center + [3.0, 0.5, 0.0],
                center + [-2.0, 2.0, 0.0],
                center + [0.5, -3.0, 0.0],
            ]
        )
        position = center + radius * np.array([0.2, 0.4, 0.0])
        position[2] = center[2] + radius * np.sqrt(1.0 - 0.2**2 - 0.4**2)
        offset = -2.0
        observations = tuple(
            Observation(s, float(np.linalg.norm(s - position) + offset)) for s in sats
        )
        inputs = CayleyMengerInputs(
            sphere=SphereConstraint(center, radius), observations=observations
        )
        candidates = positions_for_offset(inputs, offset)
        assert len(candidates) == 2
        mirror = position.copy()
        mirror[2] = 2.0 * center[2] - position[2]
        found = sorted(candidates, key=lambda c: c[2])
        expected = sorted([position, mirror], key=lambda c: c[2])
        for got, want in zip(found, expected):
            assert np.linalg.norm(got - want) < 1e-6

    def test_inconsistent_geometry_empty(self):
        sats = [(10.0, 0.0, 0.0), (0.0, 10.0, 0.0), (0.0, 0.0, 10.0)]
        observations = tuple(Observation(s, 1.0) for s in sats)
        inputs = CayleyMengerInputs(
            sphere=SphereConstraint((0.0, 0.0, 0.0), 0.0), observations=observations
        )
        assert positions_for_offset(inputs, 0.0) == []


class TestSolveThreeSat:
    def test_example_four_solutions(self):
        inputs = example_inputs()
        solutions = solve_three_sat(inputs)
        assert len(solutions) == 4
        np.testing.assert_allclose(
            [s.offset for s in solutions], EXAMPLE_ROOTS, atol=1e-3
        )
        for sol in solutions:
            assert loosened_max_residual(
                sol.position, sol.offset, inputs.observations
            ) < 1e-6
            # the example is exact even with the sign constraint
            assert sol.satisfies_sign_constraint

    def test_planted_solution_found(self):
        rng = np.random.default_rng(65)
        for _ in range(25):
            inputs, position, offset = planted_three_sat(rng)
            solutions = solve_three_sat(inputs)
            best = min(
                np.linalg.norm(s.position - position) + abs(s.offset - offset)
                for s in solutions
            )
            assert best < 1e-5

    def test_strict_sign_filters(self):
        inputs = example_inputs()
        loose = solve_three_sat(inputs, strict_sign=False)
        strict = solve_three_sat(inputs, strict_sign=True)
        assert [s.offset for s in strict] == [
            s.offset for s in loose if s.satisfies_sign_constraint
        ]

    def test_count_bound_and_certification(self):
        rng = np.random.default_rng(66)
        for _ in range(200):
            inputs, _, _ = planted_three_sat(rng)
            solutions = solve_three_sat(inputs)
            assert len(solutions) <= 4
            for sol in solutions:
                value = cayley_menger_determinant(inputs, sol.offset)
                assert abs(value) < 1e-6 * hadamard_scale(inputs, sol.offset)

    def test_degree_is_exactly_four(self):
        rng = np.random.default_rng(67)
        for _ in range(20):
            inputs, _, _ = planted_three_sat(rng)
            coeffs = extract_quartic(inputs).coefficients
            assert abs(coeffs[4]) > 1e-12 * np.max(np.abs(coeffs))


class TestGridOracleEquivalence:
    @pytest.mark.parametrize("dim", [2, 3])
    def test_matches_dense_search(self, dim):
        rng = np.random.default_rng(70 + dim)
        inputs, position, offset = planted_three_sat(rng, dim=dim)
        times = [o.arrival_time for o in inputs.observations]
        span = max(abs(t) for t in times) + 3.0 * max(
            1.0, inputs.sphere.radius, float(np.max(inputs.center_distances))
        )
        oracle = grid_oracle_solutions(
            inputs.sphere, inputs.observations, (-span, span)
        )
        solver = solve_three_sat(inputs)
        assert oracle, "grid oracle found nothing; widen the grid"
        # every oracle solution is matched by a solver solution and vice versa
        for point, t in oracle:
            assert any(
                np.linalg.norm(point - s.position) < 1e-4
                and abs(t - s.offset) < 1e-4
                for s in solver
            )
        for sol in solver:
            assert any(
                np.linalg.norm(point - sol.position) < 1e-4
                and abs(t - sol.offset) < 1e-4
                for point, t in oracle
            )
