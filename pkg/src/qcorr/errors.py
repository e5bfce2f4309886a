"""Exception types raised by qcorr."""


class InvalidStateError(ValueError):
    """A matrix is not a valid density matrix (Hermitian, unit trace, positive)."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class DegenerateFitError(ValueError):
    """A least-squares fit has no unique solution for the supplied data."""


class TransitionNotFoundError(LookupError):
    """No crossing of |c2| and |c3| occurs within a trajectory."""
