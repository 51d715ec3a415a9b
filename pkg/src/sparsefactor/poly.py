"""Sparse multivariate polynomials over a FieldDesc.

A SparsePoly is an immutable exponent-vector -> coefficient map.  The fixed
monomial order everywhere is graded reverse lexicographic (grevlex); canonical
associate form scales the grevlex-leading coefficient to 1.  Exponents are
arbitrary Python ints, so generator images with very large shifts are fine.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from operator import add as _int_add
from typing import Iterable, Optional

from .errors import (
    ArityMismatch,
    DivisionByZeroPoly,
    FieldMismatch,
    ZeroPolynomial,
)
from .ff import Fe, FieldDesc


def grevlex_key(e: tuple[int, ...]):
    return (sum(e), tuple(-x for x in reversed(e)))


def _heap_key(e: tuple[int, ...]):
    # negated grevlex so that heapq pops the largest monomial first
    return (-sum(e), tuple(x for x in reversed(e)))


class SparsePoly:
    __slots__ = ("field", "n", "terms", "_hash")

    def __init__(self, field: FieldDesc, n: int, terms: dict):
        self.field = field
        self.n = n
        self.terms = terms
        self._hash: int | None = None

    # -- construction -------------------------------------------------------

    @staticmethod
    def make(field: FieldDesc, n: int, items: Iterable[tuple[tuple[int, ...], Fe]]) -> "SparsePoly":
        terms: dict = {}
        for e, c in items:
            if len(e) != n:
                raise ArityMismatch(f"exponent vector {e} has length != {n}")
            if c == 0:
                continue
            cur = terms.get(e)
            if cur is None:
                terms[e] = c
            else:
                s = field.add(cur, c)
                if s:
                    terms[e] = s
                else:
                    del terms[e]
        return SparsePoly(field, n, terms)

    @staticmethod
    def zero(field: FieldDesc, n: int) -> "SparsePoly":
        return SparsePoly(field, n, {})

    @staticmethod
    def const(field: FieldDesc, n: int, c: Fe) -> "SparsePoly":
        c = c % field.size if c >= field.size or c < 0 else c
        if c == 0:
            return SparsePoly(field, n, {})
        return SparsePoly(field, n, {(0,) * n: c})

    @staticmethod
    def variable(field: FieldDesc, n: int, i: int, exp: int = 1, coeff: Fe = 1) -> "SparsePoly":
        if not (0 <= i < n):
            raise ArityMismatch(f"variable index {i} out of range for n={n}")
        if coeff == 0 or exp < 0:
            return SparsePoly(field, n, {})
        e = tuple(exp if j == i else 0 for j in range(n))
        return SparsePoly(field, n, {e: coeff})

    # -- identity -----------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SparsePoly)
            and self.field == other.field
            and self.n == other.n
            and self.terms == other.terms
        )

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.field, self.n, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"<{self.to_text()} over {self.field!r}>"

    # -- basic queries --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> Fe:
        if self.is_zero():
            return 0
        if len(self.terms) != 1:
            raise ValueError("not a constant")
        e, c = next(iter(self.terms.items()))
        if any(e):
            raise ValueError("not a constant")
        return c

    def sparsity(self) -> int:
        return len(self.terms)

    def individual_degree(self, i: int) -> int:
        if not self.terms:
            return 0
        return max(e[i] for e in self.terms)

    def degrees(self) -> tuple[int, ...]:
        if not self.terms:
            return (0,) * self.n
        return tuple(max(e[i] for e in self.terms) for i in range(self.n))

    def total_degree(self) -> int:
        if not self.terms:
            return 0
        return max(sum(e) for e in self.terms)

    def active_vars(self) -> list[int]:
        out = []
        for i in range(self.n):
            if any(e[i] for e in self.terms):
                out.append(i)
        return out

    def lead(self) -> tuple[tuple[int, ...], Fe]:
        """Grevlex-largest term."""
        if not self.terms:
            raise ZeroPolynomial("zero polynomial has no leading term")
        e = max(self.terms, key=grevlex_key)
        return e, self.terms[e]

    def terms_sorted(self) -> list[tuple[tuple[int, ...], Fe]]:
        return sorted(self.terms.items(), key=lambda t: grevlex_key(t[0]), reverse=True)

    # -- arithmetic -----------------------------------------------------------

    def _check(self, other: "SparsePoly") -> None:
        if self.field != other.field:
            raise FieldMismatch("operands live in different fields")
        if self.n != other.n:
            raise ArityMismatch(f"operands have different arity {self.n} != {other.n}")

    def __add__(self, other: "SparsePoly") -> "SparsePoly":
        self._check(other)
        field = self.field
        out = dict(self.terms)
        for e, c in other.terms.items():
            cur = out.get(e)
            if cur is None:
                out[e] = c
            else:
                s = field.add(cur, c)
                if s:
                    out[e] = s
                else:
                    del out[e]
        return SparsePoly(field, self.n, out)

    def __neg__(self) -> "SparsePoly":
        field = self.field
        return SparsePoly(field, self.n, {e: field.neg(c) for e, c in self.terms.items()})

    def __sub__(self, other: "SparsePoly") -> "SparsePoly":
        return self + (-other)

    def __mul__(self, other: "SparsePoly") -> "SparsePoly":
        self._check(other)
        field = self.field
        if not self.terms or not other.terms:
            return SparsePoly(field, self.n, {})
        a, b = self.terms, other.terms
        if len(a) > len(b):
            a, b = b, a
        out: dict = {}
        tadd = _int_add
        if field.k == 1:
            # prime-field hot path, arithmetic inlined
            p = field.p
            get = out.get
            for ea, ca in a.items():
                for eb, cb in b.items():
                    e = tuple(map(tadd, ea, eb))
                    cur = get(e)
                    if cur is None:
                        c = ca * cb % p
                        if c:
                            out[e] = c
                    else:
                        s = (cur + ca * cb) % p
                        if s:
                            out[e] = s
                        else:
                            del out[e]
            return SparsePoly(field, self.n, out)
        add = field.add
        mul = field.mul
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = tuple(map(tadd, ea, eb))
                c = mul(ca, cb)
                cur = out.get(e)
                if cur is None:
                    if c:
                        out[e] = c
                else:
                    s = add(cur, c)
                    if s:
                        out[e] = s
                    else:
                        del out[e]
        return SparsePoly(field, self.n, out)

    def scale(self, c: Fe) -> "SparsePoly":
        field = self.field
        if c == 0:
            return SparsePoly(field, self.n, {})
        if c == 1:
            return self
        return SparsePoly(field, self.n, {e: field.mul(v, c) for e, v in self.terms.items()})

    def __pow__(self, e: int) -> "SparsePoly":
        if e < 0:
            raise ValueError("negative power")
        out = SparsePoly.const(self.field, self.n, 1)
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    # -- evaluation and substitution -------------------------------------------

    def eval(self, point: tuple[Fe, ...] | list) -> Fe:
        if len(point) != self.n:
            raise ArityMismatch(f"point has {len(point)} coordinates, need {self.n}")
        field = self.field
        acc = 0
        for e, c in self.terms.items():
            v = c
            for i, ei in enumerate(e):
                if ei:
                    v = field.mul(v, field.pow(point[i], ei))
            acc = field.add(acc, v)
        return acc

    def subs_partial(self, assign: dict[int, Fe]) -> "SparsePoly":
        """Fix some variables to field constants; arity is preserved."""
        field = self.field
        out: dict = {}
        for e, c in self.terms.items():
            v = c
            ne = list(e)
            for i, a in assign.items():
                if e[i]:
                    v = field.mul(v, field.pow(a, e[i]))
                    ne[i] = 0
                    if v == 0:
                        break
            if v == 0:
                continue
            key = tuple(ne)
            cur = out.get(key)
            if cur is None:
                out[key] = v
            else:
                s = field.add(cur, v)
                if s:
                    out[key] = s
                else:
                    del out[key]
        return SparsePoly(field, self.n, out)

    def substitute(self, i: int, g: "SparsePoly") -> "SparsePoly":
        """x_i -> g, computed by Horner over the x_i coefficient list."""
        self._check(g)
        view = self.uni_view(i)
        acc = SparsePoly.zero(self.field, self.n)
        for coeff in reversed(view.coeffs):
            acc = acc * g + coeff
        return acc

    def translate(self, i: int, a: Fe) -> "SparsePoly":
        """x_i -> x_i + a."""
        if a == 0:
            return self
        shift = SparsePoly.make(
            self.field, self.n,
            [(tuple(1 if j == i else 0 for j in range(self.n)), 1),
             ((0,) * self.n, a)],
        )
        return self.substitute(i, shift)

    def derivative(self, i: int) -> "SparsePoly":
        field = self.field
        out: dict = {}
        for e, c in self.terms.items():
            if e[i] == 0:
                continue
            k = field.of_int(e[i])
            if k == 0:
                continue
            ne = tuple(x - 1 if j == i else x for j, x in enumerate(e))
            v = field.mul(c, k)
            cur = out.get(ne)
            if cur is None:
                out[ne] = v
            else:
                s = field.add(cur, v)
                if s:
                    out[ne] = s
                else:
                    del out[ne]
        return SparsePoly(field, self.n, out)

    # -- structure ---------------------------------------------------------------

    def uni_view(self, i: int) -> "UniView":
        d = self.individual_degree(i)
        buckets: list[dict] = [dict() for _ in range(d + 1)]
        for e, c in self.terms.items():
            ne = tuple(0 if j == i else x for j, x in enumerate(e))
            buckets[e[i]][ne] = c
        coeffs = [SparsePoly(self.field, self.n, b) for b in buckets]
        return UniView(i, coeffs)

    def map_coefficients(self, fn, new_field: FieldDesc) -> "SparsePoly":
        out = {}
        for e, c in self.terms.items():
            v = fn(c)
            if v:
                out[e] = v
        return SparsePoly(new_field, self.n, out)

    def with_vars(self, new_n: int, positions: tuple[int, ...]) -> "SparsePoly":
        """Re-embed into an new_n-variate ring; positions[i] is the new slot
        of old variable i."""
        out = {}
        for e, c in self.terms.items():
            ne = [0] * new_n
            for i, x in enumerate(e):
                if x:
                    ne[positions[i]] = x
            out[tuple(ne)] = c
        return SparsePoly(self.field, new_n, out)

    def canonical(self) -> tuple[Fe, "SparsePoly"]:
        """(unit, monic form): unit * monic == self, grevlex lead coeff 1."""
        if not self.terms:
            return 1, self
        _, c = self.lead()
        if c == 1:
            return 1, self
        return c, self.scale(self.field.inv(c))

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.terms_sorted():
            factors = []
            for i, x in enumerate(e):
                if x == 1:
                    factors.append(f"x{i + 1}")
                elif x > 1:
                    factors.append(f"x{i + 1}^{x}")
            if not factors:
                parts.append(str(c))
            elif c == 1:
                parts.append("*".join(factors))
            else:
                parts.append(str(c) + "*" + "*".join(factors))
        return " + ".join(parts)


@dataclass
class UniView:
    """Coefficient list of a polynomial in one distinguished variable.

    coeffs[j] is the coefficient of var^j: a SparsePoly of the same arity
    with individual degree 0 in var.
    """

    var: int
    coeffs: list[SparsePoly]

    def rebuild(self) -> SparsePoly:
        if not self.coeffs:
            raise ZeroPolynomial("empty view")
        field = self.coeffs[0].field
        n = self.coeffs[0].n
        items = []
        for j, c in enumerate(self.coeffs):
            for e, v in c.terms.items():
                ne = tuple(x + j if idx == self.var else x for idx, x in enumerate(e))
                items.append((ne, v))
        return SparsePoly.make(field, n, items)

    def degree(self) -> int:
        return len(self.coeffs) - 1


@dataclass(frozen=True)
class Monomial:
    """A power product with coefficient 1."""

    exps: tuple[int, ...]

    def degree(self) -> int:
        return sum(self.exps)

    def is_one(self) -> bool:
        return not any(self.exps)

    def as_poly(self, field: FieldDesc) -> SparsePoly:
        return SparsePoly(field, len(self.exps), {self.exps: 1})

    def to_text(self) -> str:
        if not any(self.exps):
            return "1"
        factors = []
        for i, x in enumerate(self.exps):
            if x == 1:
                factors.append(f"x{i + 1}")
            elif x > 1:
                factors.append(f"x{i + 1}^{x}")
        return "*".join(factors)


# -- module-level operations (the public façade) --------------------------------


def ring_ops(f: SparsePoly, g: SparsePoly, op: str) -> SparsePoly:
    if op == "add":
        return f + g
    if op == "sub":
        return f - g
    if op == "mul":
        return f * g
    raise ValueError(f"unknown op {op!r}")


def eval(f: SparsePoly, point) -> Fe:  # noqa: A001 - name fixed by the API
    return f.eval(point)


def exact_div(f: SparsePoly, g: SparsePoly) -> Optional[SparsePoly]:
    """Quotient q with f == q*g, or None when g does not divide f.

    Multivariate division under grevlex: since g is the only divisor, each
    reduction step must cancel the current leading term, so an empty final
    remainder is itself the remultiplication identity f == q*g.
    """
    if g.is_zero():
        raise DivisionByZeroPoly("division by the zero polynomial")
    f._check(g)
    field = f.field
    if f.is_zero():
        return f
    if g.is_constant():
        return f.scale(field.inv(g.constant_value()))
    ge, gc = g.lead()
    ginv = field.inv(gc)
    grest = [(e, c) for e, c in g.terms.items() if e != ge]
    rem = dict(f.terms)
    heap = [_heap_key(e) for e in rem]
    heapq.heapify(heap)
    q: dict = {}
    while rem:
        while heap:
            hk = heapq.heappop(heap)
            e = tuple(reversed(hk[1]))
            if e in rem:
                break
        else:
            break
        qe = tuple(a - b for a, b in zip(e, ge))
        if any(x < 0 for x in qe):
            return None
        qc = field.mul(rem.pop(e), ginv)
        q[qe] = qc
        for ge2, gc2 in grest:
            te = tuple(a + b for a, b in zip(qe, ge2))
            tc = field.mul(qc, gc2)
            cur = rem.get(te)
            if cur is None:
                rem[te] = field.neg(tc)
                heapq.heappush(heap, _heap_key(te))
            else:
                s = field.sub(cur, tc)
                if s:
                    rem[te] = s
                else:
                    del rem[te]
    return SparsePoly(field, f.n, q) if not rem else None


def uni_view(f: SparsePoly, i: int) -> UniView:
    return f.uni_view(i)


def largest_monomial_divisor(f: SparsePoly) -> Monomial:
    if f.is_zero():
        raise ZeroPolynomial("zero polynomial")
    mins = None
    for e in f.terms:
        if mins is None:
            mins = list(e)
        else:
            for i, x in enumerate(e):
                if x < mins[i]:
                    mins[i] = x
    return Monomial(tuple(mins))


def divide_monomial(f: SparsePoly, mono: Monomial) -> SparsePoly:
    if mono.is_one():
        return f
    out = {}
    for e, c in f.terms.items():
        ne = tuple(a - b for a, b in zip(e, mono.exps))
        if any(x < 0 for x in ne):
            raise ValueError("monomial does not divide")
        out[ne] = c
    return SparsePoly(f.field, f.n, out)


def _hull_member(target, others) -> bool:
    """Exact feasibility of target = convex combination of others.

    Phase-1 simplex over Fractions with Bland's rule; all data are
    nonnegative integers so the setup needs no sign massaging.
    """
    if not others:
        return False
    nrows = len(target) + 1
    ncols = len(others)
    # tableau: [A | I | b], minimize sum of artificials
    A = []
    b = []
    for r in range(nrows - 1):
        A.append([Fraction(p[r]) for p in others])
        b.append(Fraction(target[r]))
    A.append([Fraction(1)] * ncols)
    b.append(Fraction(1))
    width = ncols + nrows
    rows = []
    for r in range(nrows):
        row = A[r] + [Fraction(1) if j == r else Fraction(0) for j in range(nrows)]
        row.append(b[r])
        rows.append(row)
    basis = [ncols + r for r in range(nrows)]
    # objective: sum of artificial rows
    obj = [Fraction(0)] * (width + 1)
    for r in range(nrows):
        for j in range(width + 1):
            obj[j] += rows[r][j]
    while True:
        enter = -1
        for j in range(width):
            if j >= ncols and obj[j] > 0:
                continue  # never re-enter artificials going up
            if obj[j] > 0 and j < ncols:
                enter = j
                break
        if enter < 0:
            break
        # ratio test, Bland: smallest row index among minima
        leave = -1
        best = None
        for r in range(nrows):
            if rows[r][enter] > 0:
                ratio = rows[r][width] / rows[r][enter]
                if best is None or ratio < best or (ratio == best and basis[r] < basis[leave]):
                    best = ratio
                    leave = r
        if leave < 0:
            break  # unbounded cannot happen here; bail out safely
        piv = rows[leave][enter]
        rows[leave] = [v / piv for v in rows[leave]]
        for r in range(nrows):
            if r != leave and rows[r][enter] != 0:
                factor = rows[r][enter]
                rows[r] = [v - factor * w for v, w in zip(rows[r], rows[leave])]
        factor = obj[enter]
        if factor != 0:
            obj = [v - factor * w for v, w in zip(obj, rows[leave])]
        basis[leave] = enter
    return obj[width] == 0


def newton_vertices(f: SparsePoly) -> int:
    """Number of extreme points of the exponent-vector hull, exactly."""
    if f.is_zero():
        raise ZeroPolynomial("zero polynomial")
    pts = list(f.terms.keys())
    if len(pts) == 1:
        return 1
    count = 0
    for i, p in enumerate(pts):
        others = pts[:i] + pts[i + 1:]
        if not _hull_member(p, others):
            count += 1
    return count


def content_primitive(f: SparsePoly, i: int) -> tuple[SparsePoly, SparsePoly]:
    """(content, primitive) in x_i; content is the gcd of the coefficient
    polynomials, primitive = f / content."""
    if f.is_zero():
        raise ZeroPolynomial("zero polynomial")
    from . import smallfac  # local import: smallfac builds on poly

    view = f.uni_view(i)
    cont = SparsePoly.zero(f.field, f.n)
    for c in view.coeffs:
        if c.is_zero():
            continue
        cont = smallfac.gcd_full(cont, c)
        if cont.is_constant():
            break
    if cont.is_zero():
        raise ZeroPolynomial("zero polynomial")
    if cont.is_constant():
        cont = SparsePoly.const(f.field, f.n, 1)
        return cont, f
    prim = exact_div(f, cont)
    assert prim is not None, "content must divide"
    return cont, prim


def poly_sort_key(f: SparsePoly):
    """Deterministic total order on polynomials of one ring."""
    return (
        f.total_degree(),
        tuple((grevlex_key(e), c) for e, c in f.terms_sorted()),
    )
