"""Exceptions raised by the lab."""


class LabError(Exception):
    """Base class for every error the lab raises on purpose."""


class NotPrimeError(LabError, ValueError):
    """The characteristic is not a prime number."""


class OrderTooLargeError(LabError, ValueError):
    """The field order exceeds the supported maximum."""


class ReducibleModulusError(LabError, ValueError):
    """The supplied modulus factors over the prime field."""


class DegreeMismatchError(LabError, ValueError):
    """The supplied modulus does not have the requested degree or is not monic."""


class ZeroInverseError(LabError, ZeroDivisionError):
    """Inversion of the zero element."""


class SingularError(LabError, ZeroDivisionError):
    """Inversion of a matrix with zero determinant."""


class RankMismatchError(LabError, ValueError):
    """A block matrix does not have the rank an operation requires."""


class FieldMismatchError(LabError, ValueError):
    """Operands live over different fields."""


class OutOfRangeError(LabError, ValueError):
    """A field element or matrix index lies outside its field."""


class OrderTooLargeForSpectrumError(LabError, ValueError):
    """The exact spectral path is only available for small q."""


class EmptySetError(LabError, ValueError):
    """A vertex set that must be nonempty is empty."""


class EmptyDomainError(LabError, ValueError):
    """Dyadic pigeonholing over an empty domain."""


class ZeroMassError(LabError, ValueError):
    """Dyadic pigeonholing of a function with zero total mass."""


class NotInvertibleSetError(LabError, ValueError):
    """A set that must lie inside GL2 contains a singular matrix."""


class TooSmallError(LabError, ValueError):
    """A set or size is too small for the logarithmic thresholds."""


class InternalStallError(LabError, RuntimeError):
    """The decomposition extracted an empty subset."""


class EmptyXError(LabError, ValueError):
    """The restricting set of a construction is empty."""


class BadParametersError(LabError, ValueError):
    """Construction parameters outside their supported range."""


class NotSubgroupError(LabError, ValueError):
    """A set of field elements is not a multiplicative subgroup."""


class SizeTooLargeError(LabError, ValueError):
    """A sample larger than its universe was requested."""


class UnknownExperimentError(LabError, KeyError):
    """No catalog entry with the requested name."""


class ConfigInvalidError(LabError, ValueError):
    """Experiment configuration failed validation."""


class FieldUnsupportedError(LabError, ValueError):
    """An experiment does not support the requested field."""


class IoFailureError(LabError, OSError):
    """A report or set file could not be written or read."""


class FormatError(LabError, ValueError):
    """A set or vertex file is malformed."""


class PrecisionLossError(LabError, ArithmeticError):
    """A floating-point transform produced values too far from integers."""


class CertificateError(LabError, RuntimeError):
    """A pigeonhole certificate failed its independent recount."""
