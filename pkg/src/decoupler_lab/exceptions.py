"""Exception hierarchy shared by all modules."""


class DecouplerError(Exception):
    """Base class for every error raised by decoupler_lab."""


class ArgumentError(DecouplerError, ValueError):
    """Malformed input: wrong dimension, non-finite entries, bad index."""


class BranchCutError(DecouplerError):
    """A matrix logarithm would need an eigenvalue sitting on the branch cut."""


class ClosureError(DecouplerError):
    """A candidate group is not closed under multiplication (up to phase)."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class GroupStructureError(DecouplerError):
    """A candidate group lacks an identity element (up to phase)."""


class ConstraintError(DecouplerError):
    """A control window violates a centralizer or operand constraint."""


class ResourceError(DecouplerError):
    """A bounded computation hit its size limit."""

    def __init__(self, message, partial_dimension=None):
        super().__init__(message)
        self.partial_dimension = partial_dimension


class SynchronizationError(DecouplerError):
    """A control window does not start or end on a cycle boundary."""


class BoundsError(DecouplerError):
    """Scheduled windows need more cycles than are available."""


class NumericalIntegrityError(DecouplerError):
    """State norm drifted beyond tolerance during propagation."""
