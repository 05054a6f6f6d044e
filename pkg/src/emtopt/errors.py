"""Exception types shared across the package."""


class EmtError(Exception):
    """Base class for all errors raised by this package."""


class EnvelopeError(EmtError):
    """A table lookup outside the map's speed/torque envelope."""


class InfeasiblePowerError(EmtError):
    """Demanded battery power exceeds what the cell can physically deliver."""


class MatrixValidationError(EmtError):
    """A judgment matrix violates a reciprocal-matrix condition.

    Carries the offending (row, col) pair when one can be named.
    """

    def __init__(self, message, i=None, j=None):
        super().__init__(message)
        self.i = i
        self.j = j


class UnsupportedOrderError(EmtError):
    """Matrix order outside the tabulated random-index range."""


class ConfigError(EmtError):
    """Inconsistent or out-of-range configuration values."""


class ParseError(EmtError):
    """Malformed input file. Carries a row locus when known."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class SizeGuardError(EmtError):
    """Exhaustive enumeration refused because the instance is too large."""


class RolloutError(EmtError):
    """Forward rollout reached a state with no feasible action."""

    def __init__(self, message, stage=None, soc=None):
        super().__init__(message)
        self.stage = stage
        self.soc = soc
