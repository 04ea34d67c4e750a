"""Exception types shared across the package."""


class DivergenceError(RuntimeError):
    """An iterate left the finite range (NaN or Inf).

    Carries the penalty and inner step size that produced the blow-up, plus
    the trace collected up to the last finite iterate.
    """

    def __init__(self, message, *, beta=None, eta=None, trace=None):
        super().__init__(message)
        self.beta = beta
        self.eta = eta
        self.trace = list(trace) if trace is not None else []


class ParseError(ValueError):
    """Malformed dataset file. Carries the path and 1-based line number."""

    def __init__(self, message, *, path=None, line=None):
        loc = ""
        if path is not None:
            loc += f"{path}"
        if line is not None:
            loc += f":{line}"
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = path
        self.line = line


class UnsupportedModelError(ValueError):
    """The solver cannot handle the given problem kind or constraint shape."""


class NonconvergenceError(RuntimeError):
    """The reference solver hit its iteration cap before the target tolerance.

    Carries the best iterate found and the tolerance actually achieved.
    """

    def __init__(self, message, *, best=None, achieved=None):
        super().__init__(message)
        self.best = best
        self.achieved = achieved
