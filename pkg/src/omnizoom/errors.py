"""Exception types shared across the package."""


class OmnizoomError(Exception):
    """Base class for all package-specific errors."""


class NearSingularError(OmnizoomError):
    """Mobius coefficient matrix has |ad - bc| below the singularity floor."""


class DegenerateArcError(OmnizoomError):
    """Arc endpoints are too close or too close to antipodal for Slerp."""


class NoCrossingError(OmnizoomError):
    """Great-circle arc does not cross the requested meridian."""


class BadDimsError(OmnizoomError):
    """Image or grid dimensions violate an operation's preconditions."""


class DimMismatchError(OmnizoomError):
    """Two images that must share dimensions do not."""


class TooSmallError(OmnizoomError):
    """Image is smaller than the metric's window."""


class IoError(OmnizoomError):
    """File could not be read, decoded, or written."""
