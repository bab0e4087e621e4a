"""Exception hierarchy shared across the package."""


class RDIdentError(Exception):
    """Base class for all package errors."""


class GridTooCoarse(RDIdentError):
    pass


class UnsupportedBC(RDIdentError):
    pass


class ForwardFailure(RDIdentError):
    """The forward solver could not produce a finite trajectory."""


class NewtonDivergence(ForwardFailure):
    pass


class BlowUp(ForwardFailure):
    pass


class RankDeficient(RDIdentError):
    pass


class IllConditioned(RDIdentError):
    pass


class DegenerateRange(RDIdentError):
    pass


class ZeroMultiplier(RDIdentError):
    pass


class NotDissipative(RDIdentError):
    pass


class ConfigError(RDIdentError):
    """Invalid experiment configuration; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
