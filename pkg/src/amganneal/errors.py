"""Package-level exception types."""


class InfeasibleSplittingError(ValueError):
    """A C/F splitting violates the diagonal-dominance requirement on F."""


class CoarseningStalledError(RuntimeError):
    """Hierarchy construction made no progress (level kept C = all points)."""
