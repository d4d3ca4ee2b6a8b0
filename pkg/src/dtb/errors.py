"""Exception hierarchy shared by all modules."""


class DtbError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(DtbError):
    """Bad input: wrong shapes, bad configuration, malformed files."""


class NumericalError(DtbError):
    """A numerical precondition failed (data inconsistent, tau too large, noise)."""


class NotPositiveDefinite(NumericalError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NonSymmetric(ValidationError):
    pass


class Singular(NumericalError):
    pass


class DomainError(NumericalError):
    pass


class NonContractive(NumericalError):
    pass


class NonPositive(NumericalError):
    pass


class InsufficientFrames(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class InvalidMedium(ValidationError):
    pass


class DegenerateSensors(ValidationError):
    pass


class CflViolation(ValidationError):
    pass


class FormatError(ValidationError):
    pass


class ConfigError(ValidationError):
    pass
