"""Exception types shared across the package.

ValueError is used directly for invalid arguments and precondition
violations; the classes here mark failures that callers (notably the CLI)
need to tell apart.
"""


class ConvergenceError(RuntimeError):
    """Relaxation solver failed to reach the residual target."""

    def __init__(self, msg, residual=None, sweeps=None):
        super().__init__(msg)
        self.residual = residual
        self.sweeps = sweeps


class GrowthStalledError(RuntimeError):
    """A walker exhausted its relaunch budget; parameters are pathological."""


class DegenerateFieldError(RuntimeError):
    """Every growth candidate carries zero weight."""


class DegenerateSlicingError(RuntimeError):
    """No slice produced a usable dimension fit."""


class InsufficientScalesError(ValueError):
    """Too few samples inside the fitting window."""


class SnapshotParseError(ValueError):
    """Malformed snapshot file; carries the offending line number."""

    def __init__(self, msg, line_no):
        super().__init__(f"line {line_no}: {msg}")
        self.line_no = line_no
