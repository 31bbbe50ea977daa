"""Exception types shared across the search pipeline."""


class CtxSearchError(Exception):
    """Base class for package-specific failures."""


class LabelCapExceeded(CtxSearchError):
    """The environment's hard label cap would be exceeded by a query."""


class BudgetExhaustedError(CtxSearchError):
    """A search phase ran out of label or sample budget.

    Carries the partial result produced so far in ``partial`` so callers can
    degrade gracefully (e.g. continue with a wide trisection bracket).
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class DegenerateReconstructionError(CtxSearchError):
    """The two learned intercepts are indistinguishable; the scale of the
    utility model cannot be recovered."""


class SeparationError(CtxSearchError):
    """Logistic fit would diverge: single-label data with no regularization."""
