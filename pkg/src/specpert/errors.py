"""Exception hierarchy shared by every specpert module.

Two families matter to callers. ``NumericalError`` covers failures of a
computation on well-formed input (no convergence, singular factors, zero
eigenvalues where a ratio needs them). ``InputError`` covers input that is
malformed or outside a function's domain. The command line maps the first
family to exit status 3 and the second to exit status 2.
"""

from __future__ import annotations


class SpecpertError(Exception):
    """Base class for all library errors."""


class InputError(SpecpertError, ValueError):
    """Input is malformed or outside the documented domain."""


class NumericalError(SpecpertError, ArithmeticError):
    """A computation could not produce a trustworthy result."""


# -- input errors ----------------------------------------------------------


class ShapeMismatchError(InputError):
    pass


class NotSymmetricError(InputError):
    pass


class OutOfRangeError(InputError):
    pass


class InvalidProbabilityError(InputError):
    pass


class NotMonotoneError(InputError):
    pass


class DomainError(InputError):
    pass


class KMismatchError(InputError):
    pass


# -- numerical errors ------------------------------------------------------


class NonFiniteError(NumericalError):
    pass


class NoConvergenceError(NumericalError):
    pass


class RankDeficientError(NumericalError):
    pass


class ZeroEigenvalueError(NumericalError):
    pass


class ThetaUndefinedError(NumericalError):
    pass


class DegenerateWeightsError(NumericalError):
    pass


class DegenerateSplitError(NumericalError):
    pass


class LayerMissingError(NumericalError):
    pass
