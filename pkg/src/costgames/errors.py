"""Exception types shared across the toolkit."""


class CostGamesError(Exception):
    """Base class for every toolkit-specific error."""


class ShapeError(CostGamesError, ValueError):
    """Input array has the wrong shape (for example a non-square matrix)."""


class MetricError(CostGamesError, ValueError):
    """Matrix violates a metric requirement (negative entry, bad diagonal, ...)."""


class EmptyInstanceError(CostGamesError, ValueError):
    """Instance has no players."""


class EmptyCoalitionError(CostGamesError, ValueError):
    """A cost or tour was requested for the empty coalition."""


class CapacityError(CostGamesError, ValueError):
    """Problem size exceeds a documented cap; refuse instead of grinding."""


class AsymmetricMatrixError(CostGamesError, ValueError):
    """Operation is only defined for symmetric distance matrices."""


class DegenerateGameError(CostGamesError, ValueError):
    """Game is degenerate for the requested quantity (for example zero total cost)."""


class SemicoreNotEmptyError(CostGamesError, ValueError):
    """Closed formula only applies when the semicore is empty; use the LP instead."""


class LpError(CostGamesError, RuntimeError):
    """LP solve failed or produced an inconsistent certificate."""
