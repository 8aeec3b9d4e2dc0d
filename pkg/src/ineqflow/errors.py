"""Exception types raised across the package."""


class IneqflowError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(IneqflowError, ValueError):
    pass


class NotConnected(IneqflowError):
    """The delta-graph of a schedule is not strongly connected."""


class NotBalanced(IneqflowError):
    """Some segment graph has unequal in- and out-weight at a node."""


class DegenerateNetwork(IneqflowError, ValueError):
    """Contraction constants are undefined (single-agent network)."""


class OutOfBox(IneqflowError, ValueError):
    """A multiplier lies outside its box [0, cap]."""


class ModeMismatch(IneqflowError, ValueError):
    pass


class Interrupted(IneqflowError):
    """A simulation produced a non-finite state.

    Attributes
    ----------
    time : float
        Simulation time at which the blow-up was detected.
    """

    def __init__(self, time, message=None):
        self.time = float(time)
        super().__init__(message or f"non-finite state at t={self.time:g}")


class ParseError(IneqflowError):
    pass


class ValidationError(IneqflowError, ValueError):
    """Config validation failed; ``problems`` lists every (field path, message)."""

    def __init__(self, problems):
        self.problems = list(problems)
        lines = [f"{path}: {msg}" for path, msg in self.problems]
        super().__init__("invalid config:\n  " + "\n  ".join(lines))


class UnknownPreset(IneqflowError, KeyError):
    pass
