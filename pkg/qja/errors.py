"""
Exception hierarchy for the numerical core.

Errors that signal bad input also subclass ValueError so plain numeric
callers can catch them without importing this module.
"""


class QjaError(Exception):
    """Base class for every error raised by the qja package."""


class InvalidInstanceError(QjaError, ValueError):
    """A cost instance is malformed (too small, non-finite, bad site index)."""


class InvalidScheduleError(QjaError, ValueError):
    """An annealing schedule violates its grid or monotonicity rules."""


class InvalidTopologyError(QjaError, ValueError):
    """The requested neighbor structure does not fit the instance."""


class DimensionMismatchError(QjaError, ValueError):
    """Two operands live in Hilbert spaces of different dimension."""


class EnumerationTooLargeError(QjaError, ValueError):
    """Full path enumeration was requested beyond its guard."""


class MappingPreconditionError(QjaError):
    """The generator cannot be mapped to a symmetric Hamiltonian."""


class WorkOperatorUnderflowError(QjaError, ArithmeticError):
    """All amplitudes vanished after an exponentiated work step."""

    def __init__(self, delta_beta: float):
        self.delta_beta = delta_beta
        super().__init__(
            f"state norm underflowed after a work step with delta_beta={delta_beta:g}; "
            "use a finer schedule (more steps) so each step changes beta less"
        )
