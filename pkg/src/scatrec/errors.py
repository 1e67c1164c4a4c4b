"""Exception hierarchy shared by all scatrec modules."""


class ScatrecError(Exception):
    """Base class for all scatrec errors."""


class IoError(ScatrecError, OSError):
    """File missing, unreadable, or unwritable."""


class FormatError(ScatrecError, ValueError):
    """Malformed header, truncated payload, or out-of-contract field."""


class GridMismatch(ScatrecError, ValueError):
    """Two operands live on different grids."""


class ImageTooSmall(ScatrecError, ValueError):
    """Operation needs a larger image (filters require >= 3x3)."""


class EmptySampleSet(ScatrecError, ValueError):
    """Sample container has no samples."""


class SizeMismatch(ScatrecError, ValueError):
    """Image size does not match the resampling operator."""


class ScheduleMismatch(ScatrecError, ValueError):
    """Pyramid schedule incompatible with the data grid."""


class IncompatibleSizes(ScatrecError, ValueError):
    """No integral pyramid solves the requested size constraints."""


class RatioOutOfRange(ScatrecError, ValueError):
    """A consecutive pyramid ratio falls outside the open interval (1, 2)."""


class DensityOutOfRange(ScatrecError, ValueError):
    """Requested sampling density selects fewer than one pixel or exceeds 1."""


class SnrUnreachable(ScatrecError, ValueError):
    """Noise calibration could not bracket the requested SNR."""


class NonFiniteCost(ScatrecError, ArithmeticError):
    """Solver iterates produced NaN/Inf; signals a bad weight/penalty choice."""


class MissingGuide(ScatrecError, ValueError):
    """Structure-adaptive regularizer requested without a guide."""
