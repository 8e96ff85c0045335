"""Exception hierarchy for monotraj."""


class MonotrajError(Exception):
    """Base class for all library errors."""


class NonPositiveDepthError(MonotrajError, ValueError):
    """A point at or behind the camera plane cannot be projected."""


class ZeroVectorError(MonotrajError, ValueError):
    pass


class DegenerateMaskError(MonotrajError, ValueError):
    """Fewer than two foreground pixels; no orientation can be estimated."""


class IsotropicMaskError(MonotrajError, ValueError):
    """Both covariance eigenvalues coincide, so the principal direction is undefined."""


class DegenerateAngleError(MonotrajError, ValueError):
    """The two endpoint rays are (numerically) identical."""


class UnknownClassError(MonotrajError, KeyError):
    def __str__(self):
        return f"unknown drone class: {self.args[0]!r}"


class InvalidSpecError(MonotrajError, ValueError):
    pass


class EmptyGroundTruthError(MonotrajError, ValueError):
    pass


class NoOverlapError(MonotrajError, ValueError):
    pass


class ConfigError(MonotrajError, ValueError):
    """A configuration file is malformed; ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class IoFailureError(MonotrajError, OSError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


class FormatError(MonotrajError, ValueError):
    """A data file does not follow its documented layout."""
