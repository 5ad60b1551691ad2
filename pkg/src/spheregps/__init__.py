"""Sphere-constrained satellite positioning.

Closed-form and iterative solvers for recovering a receiver position and
clock offset from satellite arrival times when the receiver is known to
lie on or near a sphere, plus tooling to construct and study the satellite
configurations for which the problem has two solutions.
"""

from .core import (
    Ambiguity,
    Observation,
    ReducedSystem,
    Solution,
    SphereConstraint,
    ambiguity_indicator,
    build_linear_system,
    make_solution,
    reduce,
    residuals,
    solve_on_sphere,
)
from .errors import (
    CollinearSatellites,
    DegenerateFoci,
    DegenerateQuadratic,
    DegenerateTLSWarning,
    EmptyIntersection,
    InfeasibleGeometry,
    InvalidSemiAxis,
    PositioningError,
    RankDeficient,
    ZeroPolynomial,
)
from .experiment import ExperimentRecord, ExperimentSpec, build_path, run_experiment, write_records
from .quadric import (
    BadConfiguration,
    HyperboloidOfRevolution,
    Sheet,
    evaluate_quadric,
    generate_bad_configuration,
    hyperboloid_from_foci,
    sample_sheet,
)
from .refine import (
    Method,
    MethodResult,
    RefinementConfig,
    gauss_newton_refine,
    solve_ils,
    solve_rsos,
    tls_initialize,
)
from .three_sat import (
    CayleyMengerInputs,
    QuarticPolynomial,
    cayley_menger_determinant,
    extract_quartic,
    positions_for_offset,
    real_roots,
    solve_three_sat,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
