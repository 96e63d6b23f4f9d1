"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid run configuration (unknown key, bad value, failed precondition)."""


class NumericalError(RuntimeError):
    """A numerical routine failed (NaN, divergence, non-convergence)."""

    def __init__(self, message, step=None):
        super().__init__(message if step is None else f"{message} (step {step})")
        self.step = step


class ConvergenceError(NumericalError):
    pass
