"""Exception hierarchy shared by every qspkan module."""


class QspKanError(Exception):
    """Base class for all errors raised by qspkan."""


class InvalidInput(QspKanError, ValueError):
    """Malformed argument: wrong size, bad index, duplicate qubits, ..."""


class DomainError(QspKanError, ValueError):
    """A signal value lies outside [-1, 1]."""


class ZeroProbability(QspKanError, ArithmeticError):
    """Post-selection on an outcome whose probability is numerically zero."""


class ParityError(QspKanError, ValueError):
    """Target function does not have the parity attainable at the requested degree."""


class CapError(QspKanError, ValueError):
    """Target magnitude reaches 1 on the fitting grid."""


class NoConvergence(QspKanError, RuntimeError):
    """An iterative fit stopped without meeting its tolerance."""
