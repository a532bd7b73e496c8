"""Semantic exception hierarchy and process exit codes.

Every error raised by the library maps onto one of the CLI exit codes so
that shell callers can dispatch on failure class without parsing text.
"""


class ProfiliumError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ValidationError(ProfiliumError, ValueError):
    """Inputs violate a documented precondition (domain/type/range)."""

    exit_code = 2


class BoundaryError(ValidationError):
    """Parameter sits on (or too close to) an excluded regime boundary."""

    exit_code = 2


class ResourceCapError(ProfiliumError):
    """Request exceeds a hard enumeration/size cap."""

    exit_code = 3


class NumericError(ProfiliumError, ArithmeticError):
    """Numerical failure: divergent iteration, degenerate root, overflow."""

    exit_code = 4
