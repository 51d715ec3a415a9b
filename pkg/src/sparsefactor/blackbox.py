"""Oracle access to polynomials: explicit wrappers, products of factor
boxes, and derived access (normalization, variable-power and monomial
stripping).

A box carries declared metadata only: per-factor individual degree d,
per-factor sparsity s, product length ell.  total_deg_bound derives from
those; all derived interpolations size their node sets from the declared
bounds, never from the true polynomial.

Counters: querying an explicit or product box adds 1 to it (and
recursively charges its children); a derived box reports the sum of the
queries it induces on its base.  Everything is single-threaded pure
Python; the counter is plain mutable state.
"""

from __future__ import annotations

from typing import Callable, Optional

from .errors import ArityMismatch, FieldTooSmall, LimitExceeded, ZeroPolynomial
from .ff import Fe, FieldDesc
from .poly import Monomial, SparsePoly, divide_monomial, largest_monomial_divisor

_MATERIALIZE_CAP = 200_000  # grid points; opaque boxes are desk-scale only


class BlackBox:
    __slots__ = ("n", "field", "d", "s", "ell", "total_deg_bound",
                 "kind", "poly", "children", "fn", "base", "query_count")

    def __init__(self, n: int, field: FieldDesc, d: int, s: int, ell: int,
                 kind: str, poly: Optional[SparsePoly] = None,
                 children: Optional[list] = None,
                 fn: Optional[Callable] = None,
                 base: Optional["BlackBox"] = None,
                 total_deg_bound: Optional[int] = None):
        self.n = n
        self.field = field
        self.d = d
        self.s = s
        self.ell = ell
        self.total_deg_bound = n * d * ell if total_deg_bound is None else total_deg_bound
        self.kind = kind
        self.poly = poly
        self.children = children
        self.fn = fn
        self.base = base
        self.query_count = 0

    @staticmethod
    def explicit(f: SparsePoly, d: Optional[int] = None, s: Optional[int] = None) -> "BlackBox":
        d = max(1, max(f.degrees(), default=0)) if d is None else d
        s = max(1, f.sparsity()) if s is None else s
        return BlackBox(f.n, f.field, d, s, 1, "explicit", poly=f)

    @staticmethod
    def product(children: list["BlackBox"], d: Optional[int] = None,
                s: Optional[int] = None) -> "BlackBox":
        if not children:
            raise ValueError("empty product")
        first = children[0]
        for c in children:
            if c.n != first.n or c.field != first.field:
                raise ArityMismatch("product children disagree on ring")
        d = max(c.d for c in children) if d is None else d
        s = max(c.s for c in children) if s is None else s
        ell = sum(c.ell for c in children)
        return BlackBox(first.n, first.field, d, s, ell, "product", children=children)

    @staticmethod
    def derived(base: "BlackBox", n: int, fn: Callable,
                total_deg_bound: Optional[int] = None) -> "BlackBox":
        return BlackBox(n, base.field, base.d, base.s, base.ell, "derived",
                        fn=fn, base=base,
                        total_deg_bound=base.total_deg_bound if total_deg_bound is None else total_deg_bound)


def query(b: BlackBox, point) -> Fe:
    if len(point) != b.n:
        raise ArityMismatch(f"point has {len(point)} coordinates, box wants {b.n}")
    if b.kind == "explicit":
        b.query_count += 1
        return b.poly.eval(tuple(point))
    if b.kind == "product":
        b.query_count += 1
        acc = 1
        F = b.field
        for c in b.children:
            acc = F.mul(acc, query(c, point))
        return acc
    # derived: report the sum of induced sub-queries
    before = b.base.query_count
    val = b.fn(tuple(point))
    b.query_count += b.base.query_count - before
    return val


def _nodes(field: FieldDesc, count: int, avoid=()) -> list[Fe]:
    """First `count` canonical field elements outside `avoid`."""
    out = []
    avoid = set(avoid)
    for a in field.elements():
        if a in avoid:
            continue
        out.append(a)
        if len(out) == count:
            return out
    raise FieldTooSmall(count + len(avoid),
                        f"need {count} interpolation nodes, field has {field.size}")


def _lagrange_coeffs(field: FieldDesc, nodes, values) -> list[Fe]:
    """Dense coefficients of the unique interpolant through the data."""
    k = len(nodes)
    # Newton's divided differences, then expand; exact over a field
    coef = list(values)
    for j in range(1, k):
        for i in range(k - 1, j - 1, -1):
            num = field.sub(coef[i], coef[i - 1])
            den = field.sub(nodes[i], nodes[i - j])
            coef[i] = field.div(num, den)
    # expand Newton form to monomial basis
    poly = [0] * k
    acc = [1]
    for j in range(k):
        for t, c in enumerate(acc):
            poly[t] = field.add(poly[t], field.mul(coef[j], c))
        if j + 1 < k:
            new = [0] * (len(acc) + 1)
            for t, c in enumerate(acc):
                new[t] = field.sub(new[t], field.mul(c, nodes[j]))
                new[t + 1] = field.add(new[t + 1], c)
            acc = new
    while poly and poly[-1] == 0:
        poly.pop()
    return poly


def _eval_dense(field: FieldDesc, coeffs, x: Fe) -> Fe:
    acc = 0
    for c in reversed(coeffs):
        acc = field.add(field.mul(acc, x), c)
    return acc


def _interp_along(b: BlackBox, point, i: int) -> list[Fe]:
    """Dense coefficients of t -> f(point with x_i = t), sized by the
    declared total degree bound."""
    D = b.total_deg_bound
    nodes = _nodes(b.field, D + 1)
    vals = []
    p = list(point)
    for t in nodes:
        p[i] = t
        vals.append(query(b, p))
    return _lagrange_coeffs(b.field, nodes, vals)


def normalize_access(b: BlackBox) -> BlackBox:
    """Box for the reverse-monic normalization: slot 0 becomes y and a
    query at (y0, alpha) returns 1 + sum_{i>=1} f_i(alpha) f_0(alpha)^{i-1} y0^i
    where f = sum_i f_i(x) x_0^i.  No division is performed, so
    f_0(alpha) = 0 is fine pointwise."""
    F = b.field

    def fn(point):
        y0 = point[0]
        coeffs = _interp_along(b, (0,) + point[1:], 0)
        if not coeffs:
            return 1  # f == 0 on this fiber: free coefficient path is empty
        f0 = coeffs[0]
        acc = 1
        ypow = 1
        f0pow = 1  # f_0^{i-1}
        for i in range(1, len(coeffs)):
            ypow = F.mul(ypow, y0)
            if i > 1:
                f0pow = F.mul(f0pow, f0)
            acc = F.add(acc, F.mul(F.mul(coeffs[i], f0pow), ypow))
        return acc

    return BlackBox.derived(b, b.n, fn)


def _materialize(b: BlackBox) -> SparsePoly:
    """Dense tensor interpolation of an opaque box (desk scale only)."""
    F = b.field
    D = b.total_deg_bound
    per = D + 1
    if per ** b.n > _MATERIALIZE_CAP:
        raise LimitExceeded(
            f"materializing an opaque box needs {per ** b.n} grid points, "
            f"cap is {_MATERIALIZE_CAP}"
        )
    nodes = _nodes(F, per)

    # evaluate the full grid, then interpolate one axis at a time
    from itertools import product as iproduct

    grid = {}
    for idx in iproduct(range(per), repeat=b.n):
        pt = [nodes[t] for t in idx]
        grid[idx] = query(b, pt)
    for axis in range(b.n):
        new = {}
        keys = set()
        for idx in grid:
            keys.add(idx[:axis] + (None,) + idx[axis + 1:])
        for key in keys:
            vals = []
            for t in range(per):
                idx = key[:axis] + (t,) + key[axis + 1:]
                vals.append(grid[idx])
            coeffs = _lagrange_coeffs(F, nodes, vals)
            coeffs += [0] * (per - len(coeffs))
            for t in range(per):
                idx = key[:axis] + (t,) + key[axis + 1:]
                new[idx] = coeffs[t]
        grid = new
    items = []
    for idx, c in grid.items():
        if c:
            items.append((tuple(idx), c))
    return SparsePoly.make(F, b.n, items)


def _structural_min_exp(b: BlackBox, i: int) -> Optional[int]:
    if b.kind == "explicit":
        if b.poly.is_zero():
            raise ZeroPolynomial("zero polynomial has no variable multiplicity")
        return min(e[i] for e in b.poly.terms)
    if b.kind == "product":
        total = 0
        for c in b.children:
            k = _structural_min_exp(c, i)
            if k is None:
                return None
            total += k
        return total
    return None


def strip_var_power(b: BlackBox, i: int) -> tuple[int, BlackBox]:
    """(k, box for f / x_i^k) where k is the multiplicity of x_i in f.

    Product and explicit boxes are handled structurally (the multiplicity
    of a product is the sum over factors); an opaque box is materialized
    by dense interpolation at desk scale.
    """
    k = _structural_min_exp(b, i)
    if k is None:
        f = _materialize(b)
        k = min(e[i] for e in f.terms)

    if k == 0:
        return 0, b

    if b.kind == "explicit":
        mono = Monomial(tuple(k if v == i else 0 for v in range(b.n)))
        return k, BlackBox.explicit(divide_monomial(b.poly, mono), d=b.d, s=b.s)
    if b.kind == "product":
        parts = []
        for c in b.children:
            kc, gc = strip_var_power(c, i)
            parts.append(gc)
        return k, BlackBox.product(parts, d=b.d, s=b.s)

    def fn(point):
        coeffs = _interp_along(b, point, i)
        F = b.field
        acc = 0
        xi = point[i]
        for j in range(len(coeffs) - 1, k - 1, -1):
            acc = F.add(F.mul(acc, xi), coeffs[j])
        return acc

    return k, BlackBox.derived(b, b.n, fn)


def strip_monomial(b: BlackBox) -> tuple[Monomial, BlackBox]:
    """(M, box for f / M) with M the largest monomial dividing f.

    Structural boxes strip exactly; for the opaque path the quotient box
    answers points with zero coordinates through the diagonal shift
    x <- alpha + (t,...,t), interpolating in t and reading t = 0.
    """
    exps = []
    structural = True
    for i in range(b.n):
        k = _structural_min_exp(b, i)
        if k is None:
            structural = False
            break
        exps.append(k)

    if structural:
        mono = Monomial(tuple(exps))
        if mono.is_one():
            return mono, b
        if b.kind == "explicit":
            return mono, BlackBox.explicit(divide_monomial(b.poly, mono), d=b.d, s=b.s)
        # product: strip each child by its own largest monomial divisor
        parts = []
        for c in b.children:
            _, gc = strip_monomial(c)
            parts.append(gc)
        return mono, BlackBox.product(parts, d=b.d, s=b.s)

    f = _materialize(b)
    mono = largest_monomial_divisor(f)
    if mono.is_one():
        return mono, b
    F = b.field
    D = b.total_deg_bound

    def fn(point):
        if all(point[i] or mono.exps[i] == 0 for i in range(b.n)):
            val = query(b, point)
            den = 1
            for i, e in enumerate(mono.exps):
                if e:
                    den = F.mul(den, F.pow(point[i], e))
            return F.div(val, den)
        avoid = {F.neg(point[i]) for i in range(b.n)}
        nodes = _nodes(F, D + 1, avoid=avoid)
        vals = []
        for t in nodes:
            shifted = [F.add(point[i], t) for i in range(b.n)]
            v = query(b, shifted)
            den = 1
            for i, e in enumerate(mono.exps):
                if e:
                    den = F.mul(den, F.pow(shifted[i], e))
            vals.append(F.div(v, den))
        coeffs = _lagrange_coeffs(F, nodes, vals)
        return coeffs[0] if coeffs else 0

    return mono, BlackBox.derived(b, b.n, fn)
