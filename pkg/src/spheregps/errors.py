"""Exception and warning types raised by the solvers."""


class PositioningError(Exception):
    """Base class for domain failures of the positioning solvers."""


class RankDeficient(PositioningError):
    """Too few affinely independent satellites to reduce the linear system."""


class DegenerateQuadratic(PositioningError):
    """The on-sphere offset equation degenerates with no admissible root."""


class CollinearSatellites(PositioningError):
    """Satellites are (numerically) collinear; the offset polynomial drops
    below degree four and the three-satellite method does not apply."""


class ZeroPolynomial(PositioningError):
    """All polynomial coefficients vanish; roots are undefined."""


class DegenerateFoci(PositioningError):
    """The two prescribed focal points coincide."""


class InvalidSemiAxis(PositioningError):
    """The axial semi-axis is outside the open interval (0, half focal
    distance)."""


class EmptyIntersection(PositioningError):
    """The requested hyperboloid sheet does not meet the orbit sphere."""


class InfeasibleGeometry(PositioningError):
    """No satellite placement satisfying the requested constraints exists."""


class DegenerateTLSWarning(UserWarning):
    """Total least squares normalization failed; an ordinary least-squares
    fallback estimate was returned instead."""
