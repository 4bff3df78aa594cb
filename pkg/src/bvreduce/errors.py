"""Exception types shared across the engine."""


class EngineError(Exception):
    """Base class for all engine-level failures."""


class InputError(EngineError):
    """Malformed or inconsistent user input (bad JSON, wrong shapes, zero denominators)."""


class NonDiagonalizableAction(EngineError):
    """The action has a vanishing diagonal top coefficient, so the diagonal homotopy does not exist."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"diagonal coefficient of variable {index} is zero")


class NotGenericAtWeight(EngineError):
    """A per-weight slice matrix of (id - delta*eta) is singular: the action is not generic.

    The offending weight is reported so the failure is reproducible; no change
    of variables is attempted.
    """

    def __init__(self, weight: int):
        self.weight = weight
        super().__init__(f"slice matrix singular at weight {weight}: action is not generic")


class NonTerminating(EngineError):
    """A map declared strictly weight-decreasing failed to reach zero within its iteration cap."""


class SingularMatrix(EngineError):
    """Exact linear solve hit a rank-deficient matrix."""


class NotAllowable(EngineError):
    """A contour fails the decay check Re(s) <= -30 along its end rays."""


class ToleranceNotReached(EngineError):
    """Adaptive quadrature could not certify the requested tolerance."""
