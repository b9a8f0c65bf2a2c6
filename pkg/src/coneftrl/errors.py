"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or out-of-contract input (dimensions, signs, simplex mass...)."""


class DimensionMismatchError(InputError):
    """Vector dimension does not match the descriptor it is paired with."""


class CapabilityError(InputError):
    """The requested operation is not available for this representation."""


class SolverError(RuntimeError):
    """An iterative or combinatorial solver failed to certify its answer.

    Carries the best iterate and the residual/gap at the point of failure so
    callers can diagnose instead of silently degrading.
    """

    def __init__(self, message, best_x=None, residual=None):
        super().__init__(message)
        self.best_x = best_x
        self.residual = residual


class InfeasibleError(SolverError):
    """Linear program has an empty feasible region."""


class UnboundedError(SolverError):
    """Linear program objective is unbounded below on the feasible region."""


class CutBudgetError(SolverError):
    """Cutting-plane budget exhausted while the oracle slack is still too large."""

    def __init__(self, message, nu, cuts):
        super().__init__(message, residual=nu)
        self.nu = nu
        self.cuts = cuts


class HardLimitError(RuntimeError):
    """A per-step oracle slack crossed the configured hard abort limit."""

    def __init__(self, message, seed=None, t=None, nu=None, limit=None):
        super().__init__(message)
        self.seed = seed
        self.t = t
        self.nu = nu
        self.limit = limit


class ConfigError(ValueError):
    """Experiment configuration rejected; `field` names the offending entry."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
