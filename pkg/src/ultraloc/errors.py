"""Exception types shared across the ultraloc modules."""


class UltralocError(Exception):
    """Base class for all ultraloc-specific errors."""


class ChipAlignmentError(UltralocError, ValueError):
    """Chip boundaries do not fall on whole samples of the output grid."""


class SingularGeometryError(UltralocError, ValueError):
    """Beacon geometry is rank-deficient (collinear/coplanar degeneracy)."""


class DegenerateGeometryError(UltralocError, ValueError):
    """Geometry matrix is singular or too ill-conditioned for DOP analysis."""


class DomainDegeneracyError(UltralocError, ValueError):
    """Too many degenerate points in a drone domain to form a meaningful average."""


class NoPeakError(UltralocError, ValueError):
    """No correlation peak could be located (e.g. all-zero input signal)."""


class InfeasibleDomainError(UltralocError, ValueError):
    """Beacon domain cannot host the requested number of separated beacons."""


class ConfigError(UltralocError, ValueError):
    """Configuration file failed validation."""
