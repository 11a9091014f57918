"""Exception types shared across the package.

``ConfigError`` maps to CLI exit code 2, ``NumericalError`` (and its
subclasses) to exit code 3.
"""


class ConfigError(ValueError):
    """A scenario configuration is invalid; the message names the offending key."""


class NumericalError(ArithmeticError):
    """A numerical procedure failed in a way that invalidates its output."""


class CharFnOverflowError(NumericalError):
    """A characteristic-function evaluation produced a non-finite intermediate."""


class PdfTabulationError(NumericalError):
    """Tabulated quadrature density came out negative beyond the Gibbs-ringing
    tolerance; the message advises a larger transform range."""


class ConvolutionMarginError(NumericalError):
    """Blur kernel does not fit inside the grid margins; names the padding needed."""
