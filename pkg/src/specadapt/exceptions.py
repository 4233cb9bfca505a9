"""Exception hierarchy shared across the package."""


class SpecAdaptError(Exception):
    """Base class for all errors raised by specadapt."""


class EmptySentence(SpecAdaptError, ValueError):
    pass


class InvalidRating(SpecAdaptError, ValueError):
    pass


class EmptyCorpus(SpecAdaptError, ValueError):
    pass


class EmptyBatch(SpecAdaptError, ValueError):
    pass


class InsufficientBatch(SpecAdaptError, ValueError):
    """A distribution statistic was requested on fewer than two predictions."""


class ParseError(SpecAdaptError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DimensionMismatch(SpecAdaptError, ValueError):
    pass


class ModelStateError(SpecAdaptError, RuntimeError):
    """Raised when a model or checkpoint is missing state or does not match its inputs."""


class UndefinedCorrelation(SpecAdaptError, ValueError):
    pass


class DivergenceError(SpecAdaptError, RuntimeError):
    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)
