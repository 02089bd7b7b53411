"""Exception hierarchy shared by all infodyn modules."""


class InfodynError(Exception):
    """Base class for library errors."""


class InvalidParameter(InfodynError, ValueError):
    """A constructor argument violates a domain invariant."""


class DimensionMismatch(InvalidParameter):
    pass


class ZeroMarginal(InfodynError, ArithmeticError):
    """The observation has (numerically) zero marginal density under the model."""


class NumericalFailure(InfodynError, ArithmeticError):
    """Base class for failures the CLI reports with exit code 3."""


class QuadratureFailure(NumericalFailure):
    pass


class NonConverged(NumericalFailure):
    pass


class StabilityViolation(NumericalFailure):
    pass


class FitFailure(NumericalFailure):
    pass


class PhasePresent(InfodynError, ValueError):
    """The analytic averaging route needs real, nonnegative amplitudes."""


class NegativeBits(InfodynError, ValueError):
    pass
