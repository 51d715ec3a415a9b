"""Deterministic factorization in a bounded number of variables.

Layers, bottom up:
  * dense univariate arithmetic over a FieldDesc (coefficient lists),
  * univariate factoring: squarefree split, distinct-degree split, then
    equal-degree split by exhaustive search of the fixed-point subalgebra
    of the p-power Frobenius over the prime subfield,
  * multivariate gcd by primitive pseudo-remainder sequences,
  * separable (squarefree) decomposition valid in characteristic p,
  * multivariate factoring by translation to a good point, monicization,
    quadratic Hensel lifting one variable at a time with co-lifted Bezout
    data, and subset recombination.

Everything is deterministic: evaluation points are swept in canonical
order and factor lists are post-sorted, never sampled.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .config import LIFT_SUBSET_CAP, MULTI_FACTOR_MAX_VARS, UNI_FACTOR_FIELD_CAP
from .errors import LiftBudgetExceeded, LimitExceeded, SizeOverflow, ZeroPolynomial
from .ff import Fe, FieldDesc, FieldEmbedding, extension_of
from .poly import (
    SparsePoly,
    exact_div,
    largest_monomial_divisor,
    divide_monomial,
    poly_sort_key,
)

# ---------------------------------------------------------------------------
# dense univariate layer: list of coefficients, index = exponent, trimmed
# ---------------------------------------------------------------------------


def _trim(a: list) -> list:
    while a and a[-1] == 0:
        a.pop()
    return a


def u_deg(a: Sequence[Fe]) -> int:
    return len(a) - 1


def u_add(F: FieldDesc, a, b):
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        x = a[i] if i < len(a) else 0
        y = b[i] if i < len(b) else 0
        out.append(F.add(x, y))
    return _trim(out)


def u_sub(F: FieldDesc, a, b):
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        x = a[i] if i < len(a) else 0
        y = b[i] if i < len(b) else 0
        out.append(F.sub(x, y))
    return _trim(out)


def u_scale(F: FieldDesc, a, c):
    if c == 0:
        return []
    return _trim([F.mul(x, c) for x in a])


def u_mul(F: FieldDesc, a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            if y:
                out[i + j] = F.add(out[i + j], F.mul(x, y))
    return _trim(out)


def u_divmod(F: FieldDesc, a, b):
    if not b:
        raise ZeroDivisionError("dense division by zero")
    a = list(a)
    q = [0] * max(0, len(a) - len(b) + 1)
    inv = F.inv(b[-1])
    db = len(b) - 1
    while len(a) >= len(b) and _trim(a):
        if not a:
            break
        c = F.mul(a[-1], inv)
        off = len(a) - 1 - db
        q[off] = c
        for j, y in enumerate(b):
            if y:
                a[off + j] = F.sub(a[off + j], F.mul(c, y))
        _trim(a)
    return _trim(q), _trim(a)


def u_rem(F: FieldDesc, a, b):
    return u_divmod(F, a, b)[1]


def u_monic(F: FieldDesc, a):
    if not a or a[-1] == 1:
        return list(a)
    return u_scale(F, a, F.inv(a[-1]))


def u_gcd(F: FieldDesc, a, b):
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, u_rem(F, a, b)
    return u_monic(F, a)


def u_deriv(F: FieldDesc, a):
    out = []
    for i in range(1, len(a)):
        out.append(F.mul(a[i], F.of_int(i)))
    return _trim(out)


def u_eval(F: FieldDesc, a, x):
    acc = 0
    for c in reversed(a):
        acc = F.add(F.mul(acc, x), c)
    return acc


def u_powmod(F: FieldDesc, a, e: int, m):
    out = [1]
    base = u_rem(F, a, m)
    while e:
        if e & 1:
            out = u_rem(F, u_mul(F, out, base), m)
        e >>= 1
        if e:
            base = u_rem(F, u_mul(F, base, base), m)
    return out


def _u_frobroot(F: FieldDesc, a):
    """p-th root of a dense polynomial all of whose exponents are
    multiples of p; coefficient roots exist because F_{p^k} is perfect."""
    p = F.p
    root_exp = F.p ** (F.k - 1) if F.k > 1 else 1
    out = []
    for i in range(0, len(a), p):
        c = a[i]
        out.append(F.pow(c, root_exp) if F.k > 1 else c)
    return _trim(out)


# ---------------------------------------------------------------------------
# univariate factoring
# ---------------------------------------------------------------------------


def _u_squarefree(F: FieldDesc, f) -> list[tuple[list, int]]:
    """Monic f -> [(monic squarefree part, exponent)], product exact."""
    out: list[tuple[list, int]] = []
    scale = 1
    f = list(f)
    while u_deg(f) > 0:
        fp = u_deriv(F, f)
        if not fp:
            f = _u_frobroot(F, f)
            scale *= F.p
            continue
        c = u_gcd(F, f, fp)
        w, r = u_divmod(F, f, c)
        if r:
            raise AssertionError("squarefree split: gcd must divide")
        i = 1
        while u_deg(w) > 0:
            y = u_gcd(F, w, c)
            z, r = u_divmod(F, w, y)
            if r:
                raise AssertionError("squarefree split: inner division")
            if u_deg(z) > 0:
                out.append((z, i * scale))
            w = y
            c, r = u_divmod(F, c, y)
            if r:
                raise AssertionError("squarefree split: peel division")
            i += 1
        f = c
    return out


def _u_distinct_degree(F: FieldDesc, g) -> list[tuple[list, int]]:
    """Monic squarefree g -> [(product of its degree-j factors, j)]."""
    out = []
    q = F.size
    h = [0, 1]  # x
    j = 0
    g = list(g)
    while u_deg(g) >= 1:
        j += 1
        if 2 * j > u_deg(g):
            out.append((g, u_deg(g)))
            break
        h = u_powmod(F, h, q, g)
        d = u_gcd(F, g, u_sub(F, h, [0, 1]))
        if u_deg(d) >= 1:
            out.append((d, j))
            g, r = u_divmod(F, g, d)
            if r:
                raise AssertionError("distinct-degree: division")
            h = u_rem(F, h, g)
    return out


def _field_digits(F: FieldDesc, a: Fe) -> list[int]:
    out = []
    for _ in range(F.k):
        out.append(a % F.p)
        a //= F.p
    return out


def _frobenius_fixed_space(F: FieldDesc, g) -> list[list]:
    """Basis of {v in F[x]/(g) : v^p = v} as a vector space over the prime
    subfield.  Its dimension equals the number of irreducible factors."""
    p, k = F.p, F.k
    D = u_deg(g)
    N = k * D
    xp = u_powmod(F, [0, 1], p, g)  # x^p mod g
    # columns of (Frobenius - identity) over F_p
    cols = []
    xip = [1]  # x^{i*p} mod g
    for i in range(D):
        if i > 0:
            xip = u_rem(F, u_mul(F, xip, xp), g)
        for l in range(k):
            elem = p ** l  # the field element t^l encoded positionally
            ep = F.pow(elem, p)
            img = u_scale(F, xip, ep)
            vec = []
            for d in range(D):
                c = img[d] if d < len(img) else 0
                vec.extend(_field_digits(F, c))
            # subtract the basis element itself
            vec[i * k + l] = (vec[i * k + l] - 1) % p
            cols.append(vec)
    # kernel of the N x N matrix whose columns are cols, over F_p
    rows = [[cols[c][r] for c in range(N)] for r in range(N)]
    pivots = {}
    rank_row = 0
    for col in range(N):
        piv = None
        for r in range(rank_row, N):
            if rows[r][col] % p:
                piv = r
                break
        if piv is None:
            continue
        rows[rank_row], rows[piv] = rows[piv], rows[rank_row]
        inv = pow(rows[rank_row][col], -1, p)
        rows[rank_row] = [(v * inv) % p for v in rows[rank_row]]
        for r in range(N):
            if r != rank_row and rows[r][col]:
                fac = rows[r][col]
                rows[r] = [(v - fac * w) % p for v, w in zip(rows[r], rows[rank_row])]
        pivots[col] = rank_row
        rank_row += 1
    basis = []
    free = [c for c in range(N) if c not in pivots]
    for fc in free:
        vec = [0] * N
        vec[fc] = 1
        for col, r in pivots.items():
            vec[col] = (-rows[r][fc]) % p
        basis.append(vec)
    return basis


def _vec_to_elem(F: FieldDesc, vec) -> list:
    """F_p-vector of length k*D -> dense polynomial over F."""
    k = F.k
    D = len(vec) // k
    out = []
    for i in range(D):
        c = 0
        for l in reversed(range(k)):
            c = c * F.p + vec[i * k + l]
        out.append(c)
    return _trim(out)


def _u_equal_degree(F: FieldDesc, g, target_deg: int) -> list[list]:
    """Split monic squarefree g, all of whose irreducible factors have
    degree target_deg, by sweeping v - c over the prime subfield for each
    fixed-space basis vector v."""
    D = u_deg(g)
    if D == target_deg:
        return [list(g)]
    if F.p > UNI_FACTOR_FIELD_CAP:
        raise LimitExceeded(
            f"equal-degree split sweeps the prime subfield; p={F.p} exceeds "
            f"the configured cap {UNI_FACTOR_FIELD_CAP}"
        )
    r = D // target_deg
    basis = _frobenius_fixed_space(F, g)
    parts = [list(g)]
    for vec in basis:
        if len(parts) == r:
            break
        v = _vec_to_elem(F, vec)
        if u_deg(v) < 1:
            continue  # constants split nothing
        new_parts = []
        for part in parts:
            if u_deg(part) == target_deg:
                new_parts.append(part)
                continue
            vr = u_rem(F, v, part)
            found = []
            rem_part = part
            for c in range(F.p):
                if u_deg(rem_part) < 1:
                    break
                d = u_gcd(F, rem_part, u_sub(F, vr, [c]))
                if u_deg(d) >= 1:
                    found.append(d)
                    rem_part, rr = u_divmod(F, rem_part, d)
                    if rr:
                        raise AssertionError("equal-degree: division")
                    vr = u_rem(F, vr, rem_part) if u_deg(rem_part) >= 1 else vr
            if u_deg(rem_part) >= 1:
                found.append(rem_part)
            new_parts.extend(found)
        parts = new_parts
    if len(parts) != r:
        raise AssertionError("equal-degree split incomplete")
    return parts


@dataclass
class Factorization:
    unit: Fe
    factors: list[tuple[SparsePoly, int]]

    def remultiply(self, field: FieldDesc, n: int) -> SparsePoly:
        acc = SparsePoly.const(field, n, self.unit)
        for g, e in self.factors:
            acc = acc * g ** e
        return acc


def _certify(fz: Factorization, original: SparsePoly) -> Factorization:
    # hard remultiplication check, always on
    got = fz.remultiply(original.field, original.n)
    if got != original:
        raise AssertionError(
            f"factorization failed remultiplication: {got.to_text()} != {original.to_text()}"
        )
    fz.factors.sort(key=lambda t: poly_sort_key(t[0]))
    return fz


def _poly_from_dense(F: FieldDesc, n: int, var: int, coeffs) -> SparsePoly:
    items = []
    for j, c in enumerate(coeffs):
        if c:
            items.append((tuple(j if v == var else 0 for v in range(n)), c))
    return SparsePoly.make(F, n, items)


def _dense_from_poly(f: SparsePoly, var: int) -> list:
    d = f.individual_degree(var)
    out = [0] * (d + 1)
    for e, c in f.terms.items():
        out[e[var]] = c
    return _trim(out)


def uni_factor(field: FieldDesc, coeffs: Sequence[Fe]) -> Factorization:
    """Complete irreducible factorization of a dense univariate polynomial.

    Pipeline: squarefree split, then distinct-degree split, then
    deterministic equal-degree split over the prime subfield.
    """
    f = _trim(list(coeffs))
    if not f:
        raise ZeroPolynomial("cannot factor the zero polynomial")
    unit = f[-1]
    f = u_monic(field, f)
    factors: list[tuple[list, int]] = []
    # pull out the power of x first so the squarefree loop sees f(0) != 0
    v = 0
    while f and f[0] == 0:
        f = f[1:]
        v += 1
    if v:
        factors.append(([0, 1], v))
    if u_deg(f) >= 1:
        for g, e in _u_squarefree(field, f):
            for part, j in _u_distinct_degree(field, g):
                for irr in _u_equal_degree(field, part, j):
                    factors.append((u_monic(field, irr), e))
    out = [(_poly_from_dense(field, 1, 0, c), e) for c, e in factors]
    original = _poly_from_dense(field, 1, 0, coeffs)
    return _certify(Factorization(unit, out), original)


# ---------------------------------------------------------------------------
# multivariate gcd: primitive pseudo-remainder sequences
# ---------------------------------------------------------------------------


def _lead_coeff_in(f: SparsePoly, i: int) -> SparsePoly:
    view = f.uni_view(i)
    return view.coeffs[-1]


def _prem(f: SparsePoly, g: SparsePoly, i: int) -> SparsePoly:
    """Pseudo-remainder of f by g in x_i (result is lc(g)^j f mod g)."""
    dg = g.individual_degree(i)
    lg = _lead_coeff_in(g, i)
    while not f.is_zero() and f.individual_degree(i) >= dg:
        df = f.individual_degree(i)
        lf = _lead_coeff_in(f, i)
        shift = SparsePoly.variable(f.field, f.n, i, df - dg) if df > dg else SparsePoly.const(f.field, f.n, 1)
        f = f * lg - g * shift * lf
    return f


def _prem_full(f: SparsePoly, g: SparsePoly, i: int) -> SparsePoly:
    """Pseudo-remainder normalized to exactly lc(g)^(delta+1) f mod g, the
    form the subresultant division theorem speaks about."""
    dg = g.individual_degree(i)
    lg = _lead_coeff_in(g, i)
    steps = f.individual_degree(i) - dg + 1
    while not f.is_zero() and f.individual_degree(i) >= dg:
        df = f.individual_degree(i)
        lf = _lead_coeff_in(f, i)
        shift = SparsePoly.variable(f.field, f.n, i, df - dg) if df > dg else SparsePoly.const(f.field, f.n, 1)
        f = f * lg - g * shift * lf
        steps -= 1
    for _ in range(steps):
        f = f * lg
    return f


def _pp(f: SparsePoly, i: int) -> SparsePoly:
    """Primitive part w.r.t. x_i; constant content is stripped too."""
    if f.is_zero():
        return f
    view = f.uni_view(i)
    cont = SparsePoly.zero(f.field, f.n)
    for c in view.coeffs:
        if c.is_zero():
            continue
        cont = gcd_full(cont, c)
        if cont.is_constant():
            break
    if cont.is_constant():
        return f.canonical()[1]
    q = exact_div(f, cont)
    if q is None:
        raise AssertionError("content must divide")
    return q.canonical()[1]


def gcd_full(f: SparsePoly, g: SparsePoly) -> SparsePoly:
    """Multivariate gcd, canonical associate.  gcd(f, 0) = canonical f."""
    if f.is_zero():
        return g.canonical()[1]
    if g.is_zero():
        return f.canonical()[1]
    if f.is_constant() or g.is_constant():
        return SparsePoly.const(f.field, f.n, 1)
    shared = [i for i in f.active_vars() if i in set(g.active_vars())]
    if not shared:
        return SparsePoly.const(f.field, f.n, 1)
    i = shared[0]
    fv = f.uni_view(i)
    gv = g.uni_view(i)
    cf = SparsePoly.zero(f.field, f.n)
    for c in fv.coeffs:
        if not c.is_zero():
            cf = gcd_full(cf, c)
            if cf.is_constant():
                break
    cg = SparsePoly.zero(f.field, f.n)
    for c in gv.coeffs:
        if not c.is_zero():
            cg = gcd_full(cg, c)
            if cg.is_constant():
                break
    cont_gcd = gcd_full(cf, cg)
    pf = exact_div(f, cf)
    pg = exact_div(g, cg)
    if pf is None or pg is None:
        raise AssertionError("content must divide")
    part = _prs_gcd(pf, pg, i)
    return (cont_gcd * part).canonical()[1]


def _prs_gcd(f: SparsePoly, g: SparsePoly, i: int) -> SparsePoly:
    """Gcd of two x_i-primitive polynomials via the subresultant PRS.

    Each pseudo-remainder is divided by the Brown-Traub factor lc*h^delta,
    which is known a priori to divide it; this keeps coefficient growth
    polynomial without recursive content gcds at every step.  Sign factors
    are units here and are dropped."""
    if f.individual_degree(i) < g.individual_degree(i):
        f, g = g, f
    one = SparsePoly.const(f.field, f.n, 1)
    lead = one
    h = one
    first = True
    while True:
        if g.is_zero():
            return _pp(f, i)
        if g.individual_degree(i) == 0:
            return SparsePoly.const(f.field, f.n, 1)
        delta = f.individual_degree(i) - g.individual_degree(i)
        r = _prem_full(f, g, i)
        if r.is_zero():
            return _pp(g, i)
        if r.individual_degree(i) == 0:
            return SparsePoly.const(f.field, f.n, 1)
        if not first:
            q = exact_div(r, lead * (h ** delta))
            if q is None:
                raise AssertionError("subresultant division must be exact")
            r = q
        lead = _lead_coeff_in(g, i)
        if delta >= 1:
            if first or delta == 1:
                h = lead ** delta if first else lead
            else:
                hq = exact_div(lead ** delta, h ** (delta - 1))
                if hq is None:
                    raise AssertionError("subresultant h update must be exact")
                h = hq
        first = False
        f, g = g, r


def gcd_multi(f: SparsePoly, g: SparsePoly, i: int) -> SparsePoly:
    """Gcd as polynomials in x_i over the fraction field of the other
    variables, returned primitive in x_i and canonical."""
    if f.is_zero() and g.is_zero():
        raise ZeroPolynomial("gcd of two zero polynomials")
    if f.is_zero():
        return _pp(g, i)
    if g.is_zero():
        return _pp(f, i)
    if f.individual_degree(i) == 0 or g.individual_degree(i) == 0:
        return SparsePoly.const(f.field, f.n, 1)
    return _prs_gcd(_pp(f, i), _pp(g, i), i)


# ---------------------------------------------------------------------------
# separable (squarefree) decomposition, characteristic p safe
# ---------------------------------------------------------------------------


def frobroot_full(f: SparsePoly) -> Optional[SparsePoly]:
    """g with g^p == f, or None.  Needs every exponent divisible by p and
    takes p-th roots of coefficients (F_{p^k} is perfect)."""
    F = f.field
    p = F.p
    root_exp = p ** (F.k - 1) if F.k > 1 else 1
    out = {}
    for e, c in f.terms.items():
        if any(x % p for x in e):
            return None
        ne = tuple(x // p for x in e)
        out[ne] = F.pow(c, root_exp) if F.k > 1 else c
    return SparsePoly(F, f.n, out)


def _global_separable(f: SparsePoly) -> list[tuple[SparsePoly, int]]:
    """[(squarefree part, exponent)] with exact product f; parts are
    genuinely squarefree (no repeated irreducible factor) and pairwise
    coprime.  Handles characteristic p via other-variable partials and
    p-th-root extraction."""
    out: list[tuple[SparsePoly, int]] = []
    unit = 1
    if f.is_constant():
        raise ZeroPolynomial("constant input to separable decomposition")
    c, f = f.canonical()
    unit = c

    def rec(g: SparsePoly, scale: int) -> None:
        nonlocal unit
        if g.is_constant():
            if g.constant_value() != 1:
                raise AssertionError("separable recursion lost a unit")
            return
        j = None
        for v in g.active_vars():
            if not g.derivative(v).is_zero():
                j = v
                break
        if j is None:
            root = frobroot_full(g)
            if root is None:
                raise AssertionError("all partials vanish but no p-th root")
            cu, root = root.canonical()
            # g is monic in grevlex lead, so cu^p == 1, which forces cu == 1
            if cu != 1:
                raise AssertionError("p-th root of a canonical input must be canonical")
            rec(root, scale * g.field.p)
            return
        d = gcd_full(g, g.derivative(j))
        w = exact_div(g, d)
        if w is None:
            raise AssertionError("gcd must divide")
        i = 1
        while not w.is_constant():
            y = gcd_full(w, d)
            z = exact_div(w, y)
            if z is None:
                raise AssertionError("separable peel division")
            if not z.is_constant():
                out.append((z.canonical()[1], i * scale))
            w = y
            nd = exact_div(d, y)
            if nd is None:
                raise AssertionError("separable peel division")
            d = nd
            i += 1
        rec(d.canonical()[1], scale)

    rec(f, 1)
    # merge parts sharing an exponent, then order by exponent
    merged: dict[int, SparsePoly] = {}
    for part, e in out:
        merged[e] = merged.get(e, SparsePoly.const(f.field, f.n, 1)) * part
    result = [(merged[e], e) for e in sorted(merged)]
    # fold the overall unit into the result via a constant entry if needed
    if unit != 1:
        result.insert(0, (SparsePoly.const(f.field, f.n, unit), 1))
    return result


def squarefree_decomp(f: SparsePoly, i: int) -> list[tuple[SparsePoly, int]]:
    """Separable decomposition relative to x_i: the x_i-content is reported
    at exponent 1 and the x_i-primitive part is split into squarefree,
    pairwise coprime parts with exact multiplicities.  The product of
    part^exponent over the list equals f exactly."""
    if f.individual_degree(i) < 1:
        raise ZeroPolynomial(f"input has no x{i + 1} dependence")
    from .poly import content_primitive

    cont, prim = content_primitive(f, i)
    parts = _global_separable(prim)
    out: list[tuple[SparsePoly, int]] = []
    cont_entry = cont
    # attach any unit entry from the decomposition to the content entry
    for part, e in parts:
        if part.is_constant():
            cont_entry = cont_entry.scale(part.constant_value() if e == 1 else part.field.pow(part.constant_value(), e))
        else:
            out.append((part, e))
    if not (cont_entry.is_constant() and cont_entry.constant_value() == 1):
        out.insert(0, (cont_entry, 1))
    out.sort(key=lambda t: (t[1], poly_sort_key(t[0])))
    # exact remultiplication is part of the contract
    acc = SparsePoly.const(f.field, f.n, 1)
    for part, e in out:
        acc = acc * part ** e
    if acc != f:
        raise AssertionError("separable decomposition failed remultiplication")
    return out


# ---------------------------------------------------------------------------
# multivariate factoring: Hensel lifting with co-lifted Bezout data
# ---------------------------------------------------------------------------


def _trunc(f: SparsePoly, bounds: dict[int, int]) -> SparsePoly:
    if not bounds:
        return f
    out = {}
    for e, c in f.terms.items():
        ok = True
        for v, b in bounds.items():
            if e[v] > b:
                ok = False
                break
        if ok:
            out[e] = c
    return SparsePoly(f.field, f.n, out)


# when a work cap is active this holds [remaining coefficient-pair budget];
# dense adic series blow through it long before they finish lifting
_WORK_LEFT: Optional[list[int]] = None


def _mul_t(a: SparsePoly, b: SparsePoly, bounds: dict[int, int]) -> SparsePoly:
    if _WORK_LEFT is not None:
        _WORK_LEFT[0] -= len(a.terms) * len(b.terms)
        if _WORK_LEFT[0] < 0:
            raise LiftBudgetExceeded("lift work cap exceeded")
    return _trunc(a * b, bounds)


def _divmod_mu(f: SparsePoly, g: SparsePoly, mu: int, bounds: dict[int, int]):
    """Division with remainder by g monic in x_mu (unit leading coefficient),
    valid over the truncated coefficient ring."""
    dg = g.individual_degree(mu)
    gv = g.uni_view(mu)
    if not (gv.coeffs[-1].is_constant() and gv.coeffs[-1].constant_value() == 1):
        raise AssertionError("divisor must be monic in the main variable")
    fv = f.uni_view(mu)
    coeffs = list(fv.coeffs)
    F = f.field
    n = f.n
    q_items: list[tuple[int, SparsePoly]] = []
    for j in range(len(coeffs) - 1, dg - 1, -1):
        c = coeffs[j]
        if c.is_zero():
            continue
        q_items.append((j - dg, c))
        for t in range(dg + 1):
            if gv.coeffs[t].is_zero():
                continue
            coeffs[j - dg + t] = coeffs[j - dg + t] - _mul_t(c, gv.coeffs[t], bounds)
    q = SparsePoly.zero(F, n)
    for off, c in q_items:
        q = q + c * SparsePoly.variable(F, n, mu, off) if off else q + c
    r = SparsePoly.zero(F, n)
    for j in range(min(dg, len(coeffs))):
        c = coeffs[j]
        if not c.is_zero():
            r = r + (c * SparsePoly.variable(F, n, mu, j) if j else c)
    return q, r


class _PairNode:
    __slots__ = ("left", "right", "value", "sigma", "tau")

    def __init__(self, left=None, right=None, value=None):
        self.left = left
        self.right = right
        self.value = value  # current lifted product for this node's leaf set
        self.sigma = None  # Bezout data: sigma*A + tau*B == 1 at current precision
        self.tau = None


def _build_tree(leaves: list[SparsePoly]) -> _PairNode:
    if len(leaves) == 1:
        return _PairNode(value=leaves[0])
    mid = len(leaves) // 2
    node = _PairNode(_build_tree(leaves[:mid]), _build_tree(leaves[mid:]))
    return node


def _tree_leaves(node: _PairNode, out: list) -> None:
    if node.left is None:
        out.append(node.value)
        return
    _tree_leaves(node.left, out)
    _tree_leaves(node.right, out)


def _init_bezout(node: _PairNode, mu: int) -> None:
    """Univariate Bezout pairs at the base of every internal node."""
    if node.left is None:
        return
    _init_bezout(node.left, mu)
    _init_bezout(node.right, mu)
    A = node.left.value
    B = node.right.value
    node.value = A * B
    F = A.field
    a = _dense_from_poly(A, mu)
    b = _dense_from_poly(B, mu)
    # extended Euclid over F[mu]
    r0, r1 = a, b
    s0, s1 = [1], []
    t0, t1 = [], [1]
    while r1:
        q, r = u_divmod(F, r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, u_sub(F, s0, u_mul(F, q, s1))
        t0, t1 = t1, u_sub(F, t0, u_mul(F, q, t1))
    if u_deg(r0) != 0:
        raise AssertionError("lift images are not coprime")
    inv = F.inv(r0[0])
    sigma = u_scale(F, s0, inv)
    tau = u_scale(F, t0, inv)
    node.sigma = _poly_from_dense(F, A.n, mu, sigma)
    node.tau = _poly_from_dense(F, A.n, mu, tau)


def _lift_node_var(node: _PairNode, target: SparsePoly, mu: int, var: int,
                   bound: int, bounds: dict[int, int]) -> None:
    """Lift this node's pair (and recursively its children) in variable
    `var` from precision 1 to bound+1, quadratically."""
    if node.left is None:
        node.value = target
        return
    A = node.left.value
    B = node.right.value
    sigma, tau = node.sigma, node.tau
    k = 1
    while k <= bound:
        k2 = min(2 * k, bound + 1)
        cur = dict(bounds)
        cur[var] = k2 - 1
        # refresh Bezout to the new precision with the old factors
        d = _mul_t(sigma, A, cur) + _mul_t(tau, B, cur) - SparsePoly.const(A.field, A.n, 1)
        if not d.is_zero():
            sigma = sigma - _mul_t(sigma, d, cur)
            tau = tau - _mul_t(tau, d, cur)
            qs, sigma = _divmod_mu(sigma, B, mu, cur)
            tau = tau + _mul_t(qs, A, cur)
        # factor update
        e = _trunc(target, cur) - _mul_t(A, B, cur)
        if not e.is_zero():
            q, a = _divmod_mu(_mul_t(tau, e, cur), A, mu, cur)
            b = _mul_t(sigma, e, cur) + _mul_t(q, B, cur)
            A = A + a
            B = B + b
        k = k2
    node.sigma, node.tau = sigma, tau
    _lift_node_var(node.left, A, mu, var, bound, bounds)
    _lift_node_var(node.right, B, mu, var, bound, bounds)
    node.value = target


def _hensel_factor_squarefree(f: SparsePoly, mu: int) -> list[SparsePoly]:
    """Irreducible factors (canonical, multiplicity 1 each) of f, where f is
    squarefree, x_mu-primitive, x_mu-separable, with at least one more
    active variable.  Deterministic good-point sweep, with a field
    extension fallback when the base field has no good point."""
    F = f.field
    n = f.n
    others = [v for v in f.active_vars() if v != mu]
    D = f.individual_degree(mu)

    point = _find_good_point(f, mu, others)
    if point is None:
        return _factor_via_extension(f, mu)

    # translate the good point to the origin
    g = f
    for v, a in zip(others, point):
        g = g.translate(v, a)

    # monicize in x_mu
    gv = g.uni_view(mu)
    lc = gv.coeffs[-1]
    monic_input = g
    if not lc.is_constant():
        scaled = [gv.coeffs[j] * lc ** (D - 1 - j) if j < D else SparsePoly.const(F, n, 1)
                  for j in range(D + 1)]
        items = []
        for j, c in enumerate(scaled):
            for e, cc in c.terms.items():
                ne = tuple(x + j if idx == mu else x for idx, x in enumerate(e))
                items.append((ne, cc))
        monic_input = SparsePoly.make(F, n, items)
    else:
        cu = lc.constant_value()
        if cu != 1:
            monic_input = g.scale(F.inv(cu))

    # univariate image and its factors
    image = monic_input.subs_partial({v: 0 for v in others})
    img = _dense_from_poly(image, mu)
    if u_deg(img) != D:
        raise AssertionError("good point lost degree")
    img_factors = [
        _dense_from_poly(p, 0)
        for p, _ in uni_factor(F, img).factors
    ]
    img_factors.sort(key=lambda c: tuple(c))
    if len(img_factors) == 1:
        return [f.canonical()[1]]

    leaves = [_poly_from_dense(F, n, mu, c) for c in img_factors]
    tree = _build_tree(leaves)
    _init_bezout(tree, mu)

    bounds: dict[int, int] = {v: 0 for v in others}
    for v in others:
        b = monic_input.individual_degree(v)
        target = _trunc(monic_input, {w: (bounds[w] if w != v else b) for w in others})
        _lift_node_var(tree, target, mu, v, b, {w: bounds[w] for w in others if w != v})
        bounds[v] = b

    lifted: list[SparsePoly] = []
    _tree_leaves(tree, lifted)

    # recombine: ascending subset size, lexicographic order, trial division
    return _recombine(g, monic_input, lifted, mu, lc, others, point, bounds)


def _image_filter(monic_input: SparsePoly, mu: int,
                  others: list[int]) -> list[tuple[dict[int, Fe], list[Fe]]]:
    """Specialization points (away from the lift anchor at the origin) with
    the dense x_mu-image of the monic input at each.  A true monic factor's
    image divides these; truncation junk almost never does."""
    F = monic_input.field
    elems = list(F.elements())
    L = len(elems)
    out: list[tuple[dict[int, Fe], list[Fe]]] = []
    t = 1
    while len(out) < 3 and t < 40:
        pt = {v: elems[(3 * t + 5 * j * j + (t + 1) * (j + 2)) % L]
              for j, v in enumerate(others)}
        t += 1
        if all(a == 0 for a in pt.values()):
            continue
        if any(pt == seen for seen, _ in out):
            continue
        img = _dense_from_poly(monic_input.subs_partial(pt), mu)
        out.append((pt, img))
    return out


def _recombine(g: SparsePoly, monic_input: SparsePoly,
               lifted: list[SparsePoly], mu: int,
               lc: SparsePoly, others: list[int], point: list[Fe],
               bounds: dict[int, int]) -> list[SparsePoly]:
    from itertools import combinations

    F = g.field
    remaining = g
    avail = list(range(len(lifted)))
    found: list[SparsePoly] = []
    probes = _image_filter(monic_input, mu, others) if others else []
    tried = 0
    size = 1
    while avail:
        if size >= len(avail):
            # every proper sub-product was refuted at smaller sizes, so the
            # cofactor that is left is irreducible
            found.append(remaining)
            remaining = SparsePoly.const(F, g.n, 1)
            break
        hit = False
        for subset in combinations(avail, size):
            tried += 1
            if tried > LIFT_SUBSET_CAP:
                raise LiftBudgetExceeded(
                    f"recombination tried more than {LIFT_SUBSET_CAP} subsets"
                )
            prod = lifted[subset[0]]
            for idx in subset[1:]:
                prod = prod * lifted[idx]
            # a product of truncated leaves carries junk above the lift
            # bounds; a true factor never does
            tprod = _trunc(prod, bounds)
            ok = True
            for pt, img in probes:
                u = _dense_from_poly(tprod.subs_partial(pt), mu)
                if any(c != 0 for c in u_rem(F, img, u)):
                    ok = False
                    break
            if not ok:
                continue
            cand = _unmonicize(tprod, mu, lc)
            q = exact_div(remaining, cand)
            if q is not None:
                found.append(cand)
                remaining = q
                avail = [i for i in avail if i not in subset]
                hit = True
                break
        if not hit:
            size += 1
    if not remaining.is_constant():
        raise AssertionError("recombination left a non-constant remainder")
    out = []
    for cand in found:
        h = cand
        for v, a in zip(others, point):
            h = h.translate(v, F.neg(a))
        out.append(h.canonical()[1])
    return out


def _unmonicize(prod: SparsePoly, mu: int, lc: SparsePoly) -> SparsePoly:
    """Map a monic lifted factor back: substitute x_mu -> lc*x_mu and take
    the primitive part in x_mu."""
    if lc.is_constant():
        return prod.canonical()[1]
    F = prod.field
    n = prod.n
    pv = prod.uni_view(mu)
    items = []
    power = SparsePoly.const(F, n, 1)
    for j, c in enumerate(pv.coeffs):
        if not c.is_zero():
            scaled = c * power
            for e, cc in scaled.terms.items():
                ne = tuple(x + j if idx == mu else x for idx, x in enumerate(e))
                items.append((ne, cc))
        power = power * lc
    cand = SparsePoly.make(F, n, items)
    return _pp(cand, mu)


def _find_good_point(f: SparsePoly, mu: int, others: list[int]) -> Optional[list[Fe]]:
    """First point (canonical sweep order) where the x_mu-image keeps full
    degree and is squarefree.

    The sweep grid per coordinate is capped: the bad locus is cut out by a
    nonzero polynomial of bounded total degree, so a grid strictly larger
    than that degree contains a good point whenever one exists at all.
    """
    F = f.field
    D = f.individual_degree(mu)
    if not others:
        return []
    t = 2 * D * f.total_degree() + 2
    grid = []
    for a in F.elements():
        grid.append(a)
        if len(grid) > t:
            break

    def rec(prefix: list[Fe]) -> Optional[list[Fe]]:
        if len(prefix) == len(others):
            img = f.subs_partial(dict(zip(others, prefix)))
            dense = _dense_from_poly(img, mu)
            if u_deg(dense) != D:
                return None
            der = u_deriv(F, dense)
            if not der:
                return None
            if u_deg(u_gcd(F, dense, der)) != 0:
                return None
            return prefix
        for a in grid:
            got = rec(prefix + [a])
            if got is not None:
                return got
        return None

    return rec([])


def _factor_via_extension(f: SparsePoly, mu: int) -> list[SparsePoly]:
    """No good point exists over the base field: embed into extensions of
    growing degree, factor there, and recombine minimal subsets whose
    products descend to the base field."""
    from itertools import combinations

    F = f.field
    for j in range(2, 9):
        try:
            big = extension_of(F, j)
        except SizeOverflow:
            break
        emb = FieldEmbedding(F, big)
        fb = f.map_coefficients(emb.fwd, big)
        others = [v for v in fb.active_vars() if v != mu]
        if _find_good_point(fb, mu, others) is None:
            continue
        ext_factors = _hensel_factor_squarefree(fb, mu)
        avail = list(range(len(ext_factors)))
        out: list[SparsePoly] = []
        remaining = f
        size = 1
        tried = 0
        while avail:
            if size > len(avail):
                raise AssertionError("extension recombination failed to cover input")
            hit = False
            for subset in combinations(avail, size):
                tried += 1
                if tried > LIFT_SUBSET_CAP:
                    raise LiftBudgetExceeded(
                        f"extension recombination tried more than {LIFT_SUBSET_CAP} subsets"
                    )
                prod = ext_factors[subset[0]]
                for idx in subset[1:]:
                    prod = prod * ext_factors[idx]
                prod = prod.canonical()[1]
                down = {}
                ok = True
                for e, c in prod.terms.items():
                    bc = emb.bwd(c)
                    if bc is None:
                        ok = False
                        break
                    down[e] = bc
                if not ok:
                    continue
                cand = SparsePoly(F, f.n, down)
                q = exact_div(remaining, cand)
                if q is not None:
                    out.append(cand.canonical()[1])
                    remaining = q
                    avail = [i for i in avail if i not in subset]
                    hit = True
                    break
            if not hit:
                size += 1
        if not remaining.is_constant():
            raise AssertionError("extension recombination left a remainder")
        return out
    raise LimitExceeded("no usable field extension found for the point sweep")


def _factor_squarefree(f: SparsePoly) -> list[SparsePoly]:
    """Irreducible factors of a squarefree polynomial, multiplicity 1 each."""
    out: list[SparsePoly] = []
    if f.is_constant():
        return out
    f = f.canonical()[1]
    mono = largest_monomial_divisor(f)
    if not mono.is_one():
        for v, e in enumerate(mono.exps):
            if e:
                # squarefree input: a variable divides at most once
                out.append(SparsePoly.variable(f.field, f.n, v))
        f = divide_monomial(f, mono)
        if f.is_constant():
            return out
    active = f.active_vars()
    if len(active) == 1:
        v = active[0]
        dense = _dense_from_poly(f, v)
        for g, e in uni_factor(f.field, dense).factors:
            gd = _dense_from_poly(g, 0)
            out.extend([_poly_from_dense(f.field, f.n, v, gd)] * e)
        return out
    # main variable: separable, then lowest individual degree, then index;
    # low degree keeps the monicization and the lift tree shallow
    ordered = sorted(active, key=lambda v: (f.individual_degree(v), v))
    mu = None
    for v in ordered:
        if not f.derivative(v).is_zero():
            mu = v
            break
    if mu is None:
        raise AssertionError("squarefree polynomial with all partials zero")
    from .poly import content_primitive

    cont, prim = content_primitive(f, mu)
    if not cont.is_constant():
        out.extend(_factor_squarefree(cont))
    prim = prim.canonical()[1]
    if prim.is_constant():
        return out
    # split off the x_mu-inseparable factors and recurse on them
    insep = gcd_full(prim, prim.derivative(mu))
    if not insep.is_constant():
        out.extend(_factor_squarefree(insep))
        q = exact_div(prim, insep)
        if q is None:
            raise AssertionError("inseparable part must divide")
        prim = q.canonical()[1]
    if prim.is_constant():
        return out
    if prim.individual_degree(mu) == 1 and len(prim.active_vars()) >= 1:
        out.append(prim)
        return out
    if len(prim.active_vars()) == 1:
        v = prim.active_vars()[0]
        dense = _dense_from_poly(prim, v)
        for g, e in uni_factor(prim.field, dense).factors:
            gd = _dense_from_poly(g, 0)
            out.extend([_poly_from_dense(prim.field, prim.n, v, gd)] * e)
        return out
    out.extend(_hensel_factor_squarefree(prim, mu))
    return out


def multi_factor(f: SparsePoly, work_cap: Optional[int] = None) -> Factorization:
    """Complete irreducible factorization in a bounded number of variables.

    With work_cap set, lift-heavy inputs raise LiftBudgetExceeded once the
    truncated-product budget is spent instead of grinding out a dense
    series; callers that can tolerate a missing answer use this."""
    if work_cap is not None:
        global _WORK_LEFT
        saved = _WORK_LEFT
        _WORK_LEFT = [work_cap]
        try:
            return multi_factor(f)
        finally:
            _WORK_LEFT = saved
    if f.is_zero():
        raise ZeroPolynomial("cannot factor the zero polynomial")
    active = f.active_vars()
    if len(active) > MULTI_FACTOR_MAX_VARS:
        raise LimitExceeded(
            f"multi_factor supports at most {MULTI_FACTOR_MAX_VARS} active "
            f"variables, got {len(active)}"
        )
    original = f
    if f.is_constant():
        return _certify(Factorization(f.constant_value(), []), original)
    unit, f = f.canonical()
    factors: dict[SparsePoly, int] = {}

    mono = largest_monomial_divisor(f)
    if not mono.is_one():
        for v, e in enumerate(mono.exps):
            if e:
                xv = SparsePoly.variable(f.field, f.n, v)
                factors[xv] = factors.get(xv, 0) + e
        f = divide_monomial(f, mono)

    if not f.is_constant():
        for part, e in _global_separable(f):
            if part.is_constant():
                unit = f.field.mul(unit, f.field.pow(part.constant_value(), e))
                continue
            for irr in _factor_squarefree(part):
                cu, irr = irr.canonical()
                if cu != 1:
                    unit = f.field.mul(unit, f.field.pow(cu, e))
                factors[irr] = factors.get(irr, 0) + e

    out = Factorization(unit, [(g, e) for g, e in factors.items()])
    return _certify(out, original)
