"""Exception types shared across the toolkit."""


class HoiSolverError(Exception):
    """Base class for all toolkit errors."""


class BehindCamera(HoiSolverError):
    """A 3D point lies at or behind the camera plane where projection is undefined."""


class NotWatertight(HoiSolverError):
    """Containment query on a mesh that failed the closed-surface check."""


class DegenerateCloud(HoiSolverError):
    """Point cloud too small to constrain an alignment."""


class UnderConstrained(HoiSolverError):
    """Fewer scalar residual rows than pose degrees of freedom."""


class NonFinite(HoiSolverError):
    """NaN or Inf encountered in solver inputs or gradients."""


class DimensionMismatch(HoiSolverError):
    """Two images that must share dimensions do not."""


class LengthMismatch(HoiSolverError):
    """Sequences that must share frame/joint counts do not."""


class ShapeMismatch(HoiSolverError):
    """Label arrays that must share a shape do not."""


class SequenceTooShort(HoiSolverError):
    """Sequence shorter than the operation's minimum length."""


class SchemaVersionMismatch(HoiSolverError):
    """Session file declares an unsupported schema version."""


class MissingAsset(HoiSolverError):
    """Session references a file that cannot be resolved."""


class InvariantViolation(HoiSolverError):
    """Session data violates a documented invariant.

    Carries the offending field path for error reporting.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
