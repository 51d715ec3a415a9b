"""Deterministic sparse-polynomial factorization toolkit over finite fields."""

from .algos import (AuditResult, DivisorSet, divides, divisor_count_audit,
                    divisors_of_product, factor_nsd,
                    factor_product_general, factor_product_irreducibles,
                    is_complete_power, multiplicity_of, multiquadratic_factors,
                    rational_interpolate, rational_interpolate_multi,
                    sparse_divisors)
from .blackbox import BlackBox, query
from .config import AlgoParams, TinyLimits
from .ff import FieldDesc, build_extension, field_arith
from .gen import TASKS, m_for, sparse_reconstruct
from .oracle import (OracleReport, brute_divisors, brute_factor,
                     primitive_divisor_check)
from .poly import Monomial, SparsePoly, UniView
from .smallfac import Factorization, multi_factor, uni_factor

__all__ = [
    "AlgoParams",
    "AuditResult",
    "BlackBox",
    "DivisorSet",
    "Factorization",
    "FieldDesc",
    "Monomial",
    "OracleReport",
    "SparsePoly",
    "TASKS",
    "TinyLimits",
    "UniView",
    "brute_divisors",
    "brute_factor",
    "build_extension",
    "divides",
    "divisor_count_audit",
    "divisors_of_product",
    "factor_nsd",
    "factor_product_general",
    "factor_product_irreducibles",
    "field_arith",
    "is_complete_power",
    "m_for",
    "multi_factor",
    "multiplicity_of",
    "multiquadratic_factors",
    "primitive_divisor_check",
    "query",
    "rational_interpolate",
    "rational_interpolate_multi",
    "sparse_divisors",
    "sparse_reconstruct",
    "uni_factor",
]

__version__ = "0.1.0"
