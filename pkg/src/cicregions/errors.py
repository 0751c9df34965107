"""Exception types shared across the package."""


class CicError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(CicError):
    """Raised when user-supplied tables, rates, or options are invalid.

    The message names the first violated requirement and its location,
    e.g. ``factor p(u1c|q), row q=0 sums to 0.98``.
    """


class ConsistencyError(CicError):
    """Raised when an internal quantity violates an exact identity.

    This signals a defect (or numerically hostile input), not a user
    mistake: for example a conditional mutual information evaluating
    below -1e-9, or two constraint systems built from different joints.
    """


class GuardError(ConfigurationError):
    """Raised when a simulation request exceeds the desk-scale budget."""

    def __init__(self, message: str, budgets: dict[str, float]):
        super().__init__(message)
        self.budgets = budgets
