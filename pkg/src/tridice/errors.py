"""Exception types shared across the package.

Exit-code mapping used by the CLI: validation problems (bad parameter
files, bad manifests, bad control paths) exit with 2, solver failures
with 3, and I/O failures with 4.
"""


class TridiceError(Exception):
    """Base class for all package-specific errors."""


class ParamFileError(TridiceError):
    """A parameter file could not be parsed or is missing required keys."""


class ValidationError(TridiceError):
    """A value violates a documented invariant (names the offending field)."""


class CalibrationError(TridiceError):
    """Time-step conversion could not reach its required tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConvergenceError(TridiceError):
    """The optimizer stopped without meeting its convergence criterion.

    Carries the best point found so far and the solver diagnostics so
    callers can inspect or salvage the run.
    """

    def __init__(self, message, solution=None, diagnostics=None):
        super().__init__(message)
        self.solution = solution
        self.diagnostics = diagnostics
