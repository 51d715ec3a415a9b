"""Brute-force reference implementations for differential testing.

Deliberately slow and simple.  Factoring goes through a Kronecker
substitution to one variable and recombines univariate factors by
exhaustive subset search; the only machinery shared with the main
factoring path is the univariate engine, so a disagreement between the
two paths points at a real bug rather than a shared blind spot.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from itertools import combinations
from typing import Iterable, Optional

from .algos import DivisorSet
from .config import TinyLimits
from .errors import LimitExceeded, ZeroPolynomial
from .ff import FieldDesc
from .poly import (Monomial, SparsePoly, divide_monomial, exact_div,
                   largest_monomial_divisor, poly_sort_key)
from .smallfac import Factorization, uni_factor

__all__ = [
    "OracleReport",
    "brute_factor",
    "brute_divisors",
    "primitive_divisor_check",
]

# subset enumeration budget for the recombination and multiple searches
_SUBSET_CAP = 200_000


@dataclass
class OracleReport:
    """One differential comparison, ready for JSON-lines output."""

    instance: str
    oracle: str
    algorithm: str
    agree: bool
    timings: dict = dc_field(default_factory=dict)

    def as_json(self) -> dict:
        return {
            "instance": self.instance,
            "oracle": self.oracle,
            "algorithm": self.algorithm,
            "agree": self.agree,
            "timings": self.timings,
        }


def _check_limits(f: SparsePoly, limits: TinyLimits) -> None:
    if f.field.size > limits.max_field_size:
        raise LimitExceeded(
            f"oracle limited to fields of size <= {limits.max_field_size}")
    if len(f.active_vars()) > limits.max_vars:
        raise LimitExceeded(
            f"oracle limited to {limits.max_vars} active variables")
    degs = f.degrees()
    if degs and max(degs) > limits.max_individual_degree:
        raise LimitExceeded(
            f"oracle limited to individual degree {limits.max_individual_degree}")


def _kronecker_digits(E: int, base: int, n: int) -> tuple:
    out = []
    for _ in range(n):
        out.append(E % base)
        E //= base
    return tuple(out)


def brute_factor(f: SparsePoly, limits: TinyLimits = TinyLimits()) -> Factorization:
    """Irreducible factorization by Kronecker substitution plus exhaustive
    recombination of the univariate factors.  Tiny instances only."""
    if f.is_zero():
        raise ZeroPolynomial("cannot factor the zero polynomial")
    _check_limits(f, limits)
    F = f.field
    n = f.n
    unit, core = f.canonical()
    factors: dict[tuple, tuple[SparsePoly, int]] = {}

    def add(g: SparsePoly, m: int) -> None:
        key = tuple(sorted(g.terms.items()))
        if key in factors:
            factors[key] = (g, factors[key][1] + m)
        else:
            factors[key] = (g, m)

    mono = largest_monomial_divisor(core)
    if not mono.is_one():
        for v, e in enumerate(mono.exps):
            if e:
                add(SparsePoly.variable(F, n, v, 1), e)
        core = divide_monomial(core, mono)

    if not core.is_constant():
        degs = core.degrees()
        base = max(degs) + 1
        weights = [base ** t for t in range(n)]
        img_len = 1 + sum(degs[t] * weights[t] for t in range(n))
        img = [0] * img_len
        for e, c in core.terms.items():
            img[sum(e[t] * weights[t] for t in range(n))] = c
        uni = uni_factor(F, img)
        avail: list[SparsePoly] = []
        for g, m in uni.factors:
            avail.extend([g] * m)
        avail.sort(key=lambda g: (g.individual_degree(0), poly_sort_key(g)))

        remaining = core
        tried = 0
        size = 1
        while avail and not remaining.is_constant():
            if size > len(avail):
                raise AssertionError("oracle recombination exhausted")
            hit = False
            for subset in combinations(range(len(avail)), size):
                tried += 1
                if tried > _SUBSET_CAP:
                    raise LimitExceeded("oracle recombination budget spent")
                prod = avail[subset[0]]
                for idx in subset[1:]:
                    prod = prod * avail[idx]
                # inverse Kronecker: digits past the source degrees cannot
                # come from a factor
                items = []
                feasible = True
                for (E,), c in prod.terms.items():
                    digits = _kronecker_digits(E, base, n)
                    if any(digits[t] > degs[t] for t in range(n)):
                        feasible = False
                        break
                    items.append((digits, c))
                if not feasible:
                    continue
                cand = SparsePoly.make(F, n, items).canonical()[1]
                if cand.is_constant():
                    continue
                q = exact_div(remaining, cand)
                if q is not None:
                    add(cand, 1)
                    remaining = q
                    keep = set(range(len(avail))) - set(subset)
                    avail = [avail[i] for i in sorted(keep)]
                    hit = True
                    break
            if not hit:
                size += 1
        if not remaining.is_constant():
            raise AssertionError("oracle recombination left a remainder")
        unit = F.mul(unit, remaining.constant_value())

    out = Factorization(unit, sorted(factors.values(),
                                     key=lambda t: poly_sort_key(t[0])))
    got = out.remultiply(F, n)
    if got != f:
        raise AssertionError("oracle factorization failed remultiplication")
    return out


def brute_divisors(f: SparsePoly, limits: TinyLimits = TinyLimits()) -> DivisorSet:
    """Every monic monomial-free divisor, as subset products over
    brute_factor's output, plus the maximal monomial."""
    if f.is_zero():
        raise ZeroPolynomial("the zero polynomial has no divisor set")
    _check_limits(f, limits)
    F = f.field
    mono = largest_monomial_divisor(f)
    core = divide_monomial(f, mono)
    fz = brute_factor(core, limits)

    got: dict[tuple, SparsePoly] = {}

    def rec(i: int, acc: SparsePoly) -> None:
        if i == len(fz.factors):
            c = acc.canonical()[1]
            if largest_monomial_divisor(c).is_one():
                got[tuple(sorted(c.terms.items()))] = c
            return
        g, m = fz.factors[i]
        cur = acc
        for t in range(m + 1):
            rec(i + 1, cur)
            if t < m:
                cur = cur * g
    rec(0, SparsePoly.const(F, f.n, 1))
    return DivisorSet(mono, tuple(sorted(got.values(), key=poly_sort_key)))


def _exponent_vector(fz: Factorization) -> dict[tuple, tuple[SparsePoly, int]]:
    return {tuple(sorted(g.terms.items())): (g, m) for g, m in fz.factors}


def _gcd_is_power(h_vec: dict, f_vec: dict, t: int) -> bool:
    """Whether gcd(f, h^t) is a power of h, read off the factorizations."""
    ratio: Optional[int] = None
    for key, (_, a) in h_vec.items():
        m = f_vec.get(key, (None, 0))[1]
        w = min(m, t * a)
        if w % a != 0:
            return False
        c = w // a
        if ratio is None:
            ratio = c
        elif c != ratio:
            return False
    return True


def primitive_divisor_check(g: SparsePoly, class_sample: list[SparsePoly],
                            limits: TinyLimits = TinyLimits()) -> bool:
    """Minimality test for a class divisor: every sample member must meet g
    only in powers of g, and no proper multiple of g may have the same
    property."""
    if g.is_zero() or g.is_constant():
        return False
    _check_limits(g, limits)
    for f in class_sample:
        _check_limits(f, limits)
    sample_vecs = [_exponent_vector(brute_factor(f, limits)) for f in class_sample]

    def cond1(h: SparsePoly) -> bool:
        try:
            h_vec = _exponent_vector(brute_factor(h, limits))
        except LimitExceeded:
            return False
        if not h_vec:
            return False
        for f_vec in sample_vecs:
            t_cap = 1 + max((m for _, m in f_vec.values()), default=0)
            for t in range(1, t_cap + 1):
                if not _gcd_is_power(h_vec, f_vec, t):
                    return False
        return True

    if not cond1(g):
        return False

    # condition 2: no non-scalar multiple of g by sample irreducibles also
    # passes, within the degree cap
    irr: dict[tuple, SparsePoly] = {}
    for vec in sample_vecs:
        for key, (q, _) in vec.items():
            irr[key] = q
    pool = sorted(irr.values(), key=poly_sort_key)
    cap = limits.max_individual_degree

    seen: set[tuple] = set()
    stack = [g]
    budget = _SUBSET_CAP
    while stack:
        cur = stack.pop()
        for q in pool:
            budget -= 1
            if budget <= 0:
                raise LimitExceeded("oracle multiple search budget spent")
            h = cur * q
            if max(h.degrees(), default=0) > cap:
                continue
            key = tuple(sorted(h.canonical()[1].terms.items()))
            if key in seen:
                continue
            seen.add(key)
            if cond1(h):
                return False
            stack.append(h)
    return True


def selftest_instances(count: int) -> list[tuple[FieldDesc, SparsePoly, int, int, int]]:
    """Deterministic stream of tiny instances for differential testing.

    A fixed-seed walk over (p, n, d, s) cells; every third instance plants
    a two-factor product so reducible inputs are guaranteed to appear.
    Returns (field, f, n, s, d) tuples; same count always gives the same
    list, so runs are reproducible byte for byte.
    """
    import random

    from .ff import build_extension

    rnd = random.Random(0x5EED5)
    fields = {p: build_extension(p, 1) for p in (5, 7, 11)}

    def rand_poly(F: FieldDesc, n: int, d: int, terms: int) -> SparsePoly:
        items = {}
        for _ in range(terms):
            e = tuple(rnd.randint(0, d) for _ in range(n))
            items[e] = rnd.randrange(1, F.size)
        return SparsePoly.make(F, n, list(items.items()))

    out: list[tuple[FieldDesc, SparsePoly, int, int, int]] = []
    while len(out) < count:
        p = rnd.choice((5, 7, 11))
        F = fields[p]
        n = rnd.randint(1, 3)
        d = rnd.randint(1, 2)
        s = rnd.randint(2, 6)
        if len(out) % 3 == 0 and d == 2:
            f = rand_poly(F, n, 1, rnd.randint(1, 3)) * \
                rand_poly(F, n, 1, rnd.randint(1, 3))
        else:
            f = rand_poly(F, n, d, rnd.randint(1, s))
        if f.is_zero() or f.is_constant():
            continue
        if f.sparsity() > s or max(f.degrees(), default=0) > d:
            continue
        out.append((F, f, n, s, d))
    return out
