"""Session-wide constants and the shared parameter record.

Everything here is a plain value so that two runs with the same inputs
are bit-identical.  Tunables that change algorithm behaviour live on
AlgoParams; hard resource guards live at module level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


# Largest finite field the toolkit will construct.
MAX_FIELD_SIZE = 2 ** 40

# Fields up to this size get exp/log tables for fast extension arithmetic.
LOG_TABLE_LIMIT = 2 ** 16

# m values above this raise Overflow from the parameter table.
MAX_M = 2 ** 62

# Generator sizes the escalation ladder is willing to actually run.
LADDER_HARD_CAP = 2 ** 20

# Default escalation rungs; ladders are capped at the rigorous table value.
DEFAULT_LADDER = (8, 16, 28, 64)

# Subset-recombination budget inside the lifting engine.
LIFT_SUBSET_CAP = 4096

# Truncated-product budget (coefficient pairs) for factoring a single probe
# image during sweeps.  Images whose lifts turn into dense series hit this
# fast and the shift is skipped; genuinely sparse images stay far under it.
SLICE_FACTOR_WORK_CAP = 600_000

# Budget for expanding structured blackboxes into explicit polynomials
# (term count).  Past it we stay on the evaluation path.
EXPAND_CAP = 5000

# Point count for remultiplication spot checks on generator images.
VERIFY_POINTS = 50

# Extra shifts used to cross-check a reconstructed sparse candidate.
VERIFY_SHIFTS = 8

# Variable-count bound for the constant-variate factorization engine.
MULTI_FACTOR_MAX_VARS = 7

# Fields larger than this refuse the exhaustive univariate splitting search.
UNI_FACTOR_FIELD_CAP = 2 ** 20

# Consecutive no-new-divisor shifts before the divisor sweep stops early.
STABLE_SHIFTS = 8

# Documented scaling exponent in D for the multi-quotient interpolation
# parameter row; the bound holds for any fixed exponent >= 2.
RATIONAL_MULTI_D_EXPONENT = 2


def default_sparsity_budget(n: int, s: int, d: int, constant: float = 1.0) -> int:
    """Factor-sparsity budget: s reduced by nothing, raised to ceil(c*d^2*log2 n).

    Every divisor of an (n,s,d)-sparse polynomial is S-sparse for
    S = s^(O(d^2 log n)); the constant is a configuration knob.
    """
    if s <= 1:
        return max(s, 1)
    expo = math.ceil(constant * d * d * math.log2(max(2, n)))
    return s ** max(1, expo)


@dataclass(frozen=True)
class AlgoParams:
    """Declared instance sizes plus escalation knobs.

    n, s, d, ell are the caller's promises about the input; they are never
    inferred.  S defaults to the divisor-sparsity budget derived from them.
    m_ladder overrides the escalation schedule; m_override pins a single m.
    """

    n: int
    s: int
    d: int
    ell: int = 1
    S: int | None = None
    m_override: int | None = None
    m_ladder: tuple[int, ...] = ()
    escalate: bool = True
    max_probe_shifts: int = 4
    budget_exponent_constant: float = 1.0

    def __post_init__(self) -> None:
        if self.n < 1 or self.s < 1 or self.d < 1 or self.ell < 1:
            raise ValueError("n, s, d, ell must all be >= 1")

    def sparsity_budget(self) -> int:
        if self.S is not None:
            return self.S
        return default_sparsity_budget(self.n, self.s, self.d, self.budget_exponent_constant)

    def with_(self, **kw) -> "AlgoParams":
        data = {
            "n": self.n, "s": self.s, "d": self.d, "ell": self.ell,
            "S": self.S, "m_override": self.m_override,
            "m_ladder": self.m_ladder, "escalate": self.escalate,
            "max_probe_shifts": self.max_probe_shifts,
            "budget_exponent_constant": self.budget_exponent_constant,
        }
        data.update(kw)
        return AlgoParams(**data)


@dataclass(frozen=True)
class TinyLimits:
    """Instance caps for the brute-force reference implementations."""

    max_vars: int = 3
    max_individual_degree: int = 3
    max_field_size: int = 11
