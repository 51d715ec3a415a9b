"""Typed errors shared across the toolkit.

Every failure that a caller can act on gets its own class; the CLI maps
each one to a machine-readable ``error_kind`` string and exit code 1.
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for all toolkit errors."""

    kind = "error"


class NotPrime(ToolkitError):
    kind = "not_prime"


class SizeOverflow(ToolkitError):
    kind = "size_overflow"


class DivisionByZero(ToolkitError):
    kind = "division_by_zero"


class FieldMismatch(ToolkitError):
    kind = "field_mismatch"


class ArityMismatch(ToolkitError):
    kind = "arity_mismatch"


class ZeroPolynomial(ToolkitError):
    kind = "zero_polynomial"


class DivisionByZeroPoly(ToolkitError):
    kind = "division_by_zero_poly"


class ZeroFreeTerm(ToolkitError):
    kind = "zero_free_term"


class FieldTooSmall(ToolkitError):
    kind = "field_too_small"

    def __init__(self, required_size: int, message: str = ""):
        self.required_size = required_size
        super().__init__(message or f"field must have more than {required_size} elements")


class DegreeBoundExceeded(ToolkitError):
    kind = "degree_bound_exceeded"


class ReconstructFailed(ToolkitError):
    kind = "reconstruct_failed"


class Overflow(ToolkitError):
    kind = "overflow"


class BothConstant(ToolkitError):
    kind = "both_constant"


class ConstantInVar(ToolkitError):
    kind = "constant_in_var"


class LiftBudgetExceeded(ToolkitError):
    kind = "lift_budget_exceeded"


class CharModeViolation(ToolkitError):
    kind = "char_mode_violation"


class HypothesisViolation(ToolkitError):
    kind = "hypothesis_violation"


class CandidateExplosion(ToolkitError):
    kind = "candidate_explosion"


class SBudgetExceeded(ToolkitError):
    kind = "s_budget_exceeded"


class LimitExceeded(ToolkitError):
    kind = "limit_exceeded"


class PolySyntaxError(ToolkitError):
    kind = "syntax_error"

    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} (at position {position})")


class UnknownVariable(ToolkitError):
    kind = "unknown_variable"


class CoeffOutOfRange(ToolkitError):
    kind = "coeff_out_of_range"


class CharTooSmallWarning(UserWarning):
    """Result computed, but the characteristic is too small for the
    multiplicity-detection guarantee to apply."""
