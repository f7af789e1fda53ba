"""Exception hierarchy.

Every failure mode the numerics can hit maps to one class here; the CLI turns
the ``exit_code`` attribute into its process exit status (2 invalid input,
3 convergence/integration failure, 4 unitarity/norm breach).
"""


class KerrpoError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class DomainError(KerrpoError, ValueError):
    """Parameter outside the operation's domain (e.g. chi=0 revival time)."""

    exit_code = 2


class IntegrationFailure(KerrpoError):
    """Adaptive stepper could not continue (step underflow or step budget)."""

    exit_code = 3


class NoConvergence(KerrpoError):
    """Truncation doubling hit the basis-size cap before stabilising."""

    exit_code = 3


class TruncationTooSmall(KerrpoError):
    """Requested basis or term budget leaves more than the tolerated tail."""

    exit_code = 3


class SeriesDivergence(KerrpoError):
    """Fock expansion of the squeezed state diverges (|a1| >= 1/2)."""

    exit_code = 3


class SqueezeOverflow(KerrpoError):
    """Squeeze coefficient reached the guard band below |a1| = 1/2."""

    exit_code = 3


class UnitarityBreach(KerrpoError):
    """Coefficient trajectory violates the unitarity relations."""

    exit_code = 4


class NormDrift(KerrpoError):
    """State norm drifted beyond the allowed bound during propagation."""

    exit_code = 4
