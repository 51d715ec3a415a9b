"""Deterministic evaluation-point generator and sparse interpolation.

The generator maps a handful of scalar inputs (x, y, z, w, u, v) to an
n-tuple of field values.  Selecting y and z from the designated node sets
collapses each coordinate t to a power map x^(i^t mod q), optionally
perturbed by w on one marked coordinate; u and v graft a fresh variable
onto one revived coordinate.  Nonzero sparse polynomials stay nonzero
under this substitution for a suitable shift i, which is what every
higher-level routine relies on.

Shift images are also available symbolically: slice_poly maps an explicit
polynomial to its 4-variable image (y, x, w, u) under a fixed shift,
marker, and revival.  The factoring pipeline works on those slices
instead of interpolating through astronomically sized grids.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Optional

from .config import DEFAULT_LADDER, LADDER_HARD_CAP, MAX_M
from .errors import (ArityMismatch, DegreeBoundExceeded, FieldTooSmall,
                     LimitExceeded, Overflow, ReconstructFailed)
from .ff import Fe, FieldDesc, next_prime
from .poly import SparsePoly

# pointwise evaluation needs O(m^2) one-time Lagrange setup; above this,
# callers are expected to work with slices instead
_POINTWISE_M_CAP = 4096
_COMPOSE_GRID_CAP = 2_000_000


class Generator:
    """Node sets and parameters for one evaluation-point generator.

    A, B, C, T are consecutive disjoint blocks of canonical field
    elements: |A| = m (shift selectors), |B| = |C| = n (marker and
    revival selectors), |T| = n*d*q (interpolation abscissas).  q is the
    first prime above m.  revived is a 1-based coordinate index or None.
    """

    __slots__ = ("m", "n", "field", "d", "q", "A", "B", "C", "T",
                 "revived", "_dens")

    def __init__(self, m, n, field, d, q, A, B, C, T, revived=None):
        self.m = m
        self.n = n
        self.field = field
        self.d = d
        self.q = q
        self.A = A
        self.B = B
        self.C = C
        self.T = T
        self.revived = revived
        self._dens = {}

    def revived_at(self, r: int) -> "Generator":
        if not 1 <= r <= self.n:
            raise ArityMismatch(f"revived coordinate {r} out of 1..{self.n}")
        g = Generator(self.m, self.n, self.field, self.d, self.q,
                      self.A, self.B, self.C, self.T, revived=r)
        g._dens = self._dens
        return g

    def _dens_inv(self, key: str):
        """Inverted Lagrange denominators for node set A, B, or C."""
        got = self._dens.get(key)
        if got is not None:
            return got
        nodes = getattr(self, key)
        if len(nodes) > _POINTWISE_M_CAP:
            raise LimitExceeded(
                f"pointwise generator evaluation with {len(nodes)} nodes; "
                f"cap is {_POINTWISE_M_CAP}, use slices instead"
            )
        F = self.field
        dens = []
        for i, a in enumerate(nodes):
            acc = 1
            for j, bnode in enumerate(nodes):
                if j != i:
                    acc = F.mul(acc, F.sub(a, bnode))
            dens.append(F.inv(acc))
        self._dens[key] = dens
        return dens


def build(m: int, n: int, field: FieldDesc, d: int) -> Generator:
    if m < 1 or n < 1 or d < 1:
        raise ValueError("m, n, d must be positive")
    q = next_prime(m)
    need = m + 2 * n + n * d * q
    if field.size < need:
        raise FieldTooSmall(need, f"generator node sets need {need} distinct "
                                  f"elements, field has {field.size}")
    elems = []
    it = iter(field.elements())
    for _ in range(need):
        elems.append(next(it))
    A = tuple(elems[:m])
    B = tuple(elems[m:m + n])
    C = tuple(elems[m + n:m + 2 * n])
    T = tuple(elems[m + 2 * n:])
    return Generator(m, n, field, d, q, A, B, C, T)


def feasible_m(field: FieldDesc, n: int, d: int, target: int) -> int:
    """Largest m <= target whose generator fits in the field.

    The node budget m + 2n + n*d*next_prime(m) grows strictly with m, so
    a binary search works.  Results computed at a reduced m stay safe
    because every consumer verifies its candidate before accepting it.
    """
    def room(m: int) -> bool:
        return m + 2 * n + n * d * next_prime(m) <= field.size

    if room(target):
        return target
    if not room(1):
        need = 1 + 2 * n + n * d * 2
        raise FieldTooSmall(need, f"no generator fits: even m=1 needs {need} "
                                  f"elements, field has {field.size}")
    lo, hi = 1, target
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if room(mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


def _basis_all(field: FieldDesc, nodes, dens_inv, y: Fe) -> list[Fe]:
    """All Lagrange basis values L_i(y) for the node set, O(len)."""
    k = len(nodes)
    diffs = [field.sub(y, a) for a in nodes]
    for i, dv in enumerate(diffs):
        if dv == 0:
            out = [0] * k
            out[i] = 1
            return out
    pref = [1] * (k + 1)
    for i in range(k):
        pref[i + 1] = field.mul(pref[i], diffs[i])
    suf = [1] * (k + 1)
    for i in range(k - 1, -1, -1):
        suf[i] = field.mul(suf[i + 1], diffs[i])
    return [field.mul(field.mul(pref[i], suf[i + 1]), dens_inv[i])
            for i in range(k)]


def eval_G(gen: Generator, inputs) -> tuple[Fe, ...]:
    """Evaluate all n coordinates at scalar inputs.

    Unrevived generators take (x, y, z, w, u, v); a generator revived at
    coordinate r takes (x, y, z, w, u) and returns u verbatim in
    coordinate r.
    """
    F = gen.field
    want = 5 if gen.revived is not None else 6
    if len(inputs) != want:
        raise ArityMismatch(f"generator wants {want} inputs, got {len(inputs)}")
    if gen.revived is not None:
        x, y, z, w, u = inputs
        cv = None
    else:
        x, y, z, w, u, v = inputs
        cv = _basis_all(F, gen.C, gen._dens_inv("C"), v)
    ay = _basis_all(F, gen.A, gen._dens_inv("A"), y)
    bz = _basis_all(F, gen.B, gen._dens_inv("B"), z)
    wm1 = F.sub(w, 1)
    xpows: dict[int, Fe] = {}
    coords = []
    for t in range(1, gen.n + 1):
        if gen.revived == t:
            coords.append(u)
            continue
        acc = 0
        for p in range(1, gen.m + 1):
            a = ay[p - 1]
            if a == 0:
                continue
            e = pow(p, t, gen.q)
            xe = xpows.get(e)
            if xe is None:
                xe = F.pow(x, e)
                xpows[e] = xe
            acc = F.add(acc, F.mul(a, xe))
        val = F.mul(F.add(1, F.mul(bz[t - 1], wm1)), acc)
        if gen.revived is None:
            val = F.add(val, F.mul(u, cv[t - 1]))
        coords.append(val)
    return tuple(coords)


def ks_point(gen: Generator, shift: int, marker: int, x: Fe, w: Fe) -> tuple[Fe, ...]:
    """Collapsed coordinates at y = A[shift], z = B[marker]: coordinate t
    is (1 + [t = marker](w - 1)) * x^(shift^t mod q).  No Lagrange work."""
    F = gen.field
    coords = []
    for t in range(1, gen.n + 1):
        xe = F.pow(x, pow(shift, t, gen.q))
        if t == marker:
            xe = F.mul(xe, w)
        coords.append(xe)
    return tuple(coords)


def _node_list(field: FieldDesc, count: int) -> list[Fe]:
    if field.size < count:
        raise FieldTooSmall(count, f"need {count} grid nodes, field has {field.size}")
    out = []
    it = iter(field.elements())
    for _ in range(count):
        out.append(next(it))
    return out


def _coeffs_1d(field: FieldDesc, nodes, values) -> list[Fe]:
    from .blackbox import _lagrange_coeffs
    return _lagrange_coeffs(field, nodes, values)


def compose_dense(b, gen: Generator, extra_bounds: tuple[int, ...] = ()) -> SparsePoly:
    """Dense interpolation of f(extras, G(inputs)) on a tensor grid.

    The box's first len(extra_bounds) slots are fed raw grid values
    (bounded by the given per-variable degrees); the remaining gen.n
    slots receive the generator coordinates.  The result's variables are
    the generator inputs, in eval_G order, followed by the extras.  One
    off-grid spot check guards the declared bounds; a mismatch raises
    DegreeBoundExceeded, which means the box lied about its metadata.
    """
    from .blackbox import query

    F = gen.field
    n_extra = len(extra_bounds)
    if b.n != n_extra + gen.n:
        raise ArityMismatch(f"box arity {b.n} != {n_extra} extras + {gen.n} coords")
    D = b.total_deg_bound
    de = b.d * b.ell
    if gen.revived is not None:
        bounds = [D * (gen.q - 1), D * (gen.m - 1), D * (gen.n - 1), D, de]
    else:
        bounds = [D * (gen.q - 1), D * (gen.m - 1), D * (gen.n - 1), D, D,
                  D * (gen.n - 1)]
    n_in = len(bounds)
    bounds += list(extra_bounds)
    total = 1
    for bd in bounds:
        total *= bd + 1
    if total > _COMPOSE_GRID_CAP:
        raise LimitExceeded(f"composition grid has {total} points, "
                            f"cap is {_COMPOSE_GRID_CAP}")
    axes = [_node_list(F, bd + 1) for bd in bounds]

    from itertools import product as iproduct

    grid: dict[tuple[int, ...], Fe] = {}
    coord_cache: dict[tuple, tuple] = {}
    for idx in iproduct(*(range(len(ax)) for ax in axes)):
        gin = tuple(axes[a][idx[a]] for a in range(n_in))
        coords = coord_cache.get(gin)
        if coords is None:
            coords = eval_G(gen, gin)
            coord_cache[gin] = coords
        extras = tuple(axes[n_in + e][idx[n_in + e]] for e in range(n_extra))
        grid[idx] = query(b, extras + coords)

    nvars = len(bounds)
    for axis in range(nvars):
        per = len(axes[axis])
        new: dict[tuple[int, ...], Fe] = {}
        keys = {idx[:axis] + (None,) + idx[axis + 1:] for idx in grid}
        for key in keys:
            vals = [grid[key[:axis] + (t,) + key[axis + 1:]] for t in range(per)]
            coeffs = _coeffs_1d(F, axes[axis], vals)
            coeffs += [0] * (per - len(coeffs))
            for t in range(per):
                new[key[:axis] + (t,) + key[axis + 1:]] = coeffs[t]
        grid = new
    items = [(idx, c) for idx, c in grid.items() if c]
    result = SparsePoly.make(F, nvars, items)

    # off-grid spot checks: move every axis past its grid where the field
    # allows.  An honest box interpolates exactly, so this never fires for
    # truthful metadata; a box whose true degrees exceed the declaration
    # disagrees with the fitted polynomial off the grid.
    maxn = max(len(ax) for ax in axes)
    pool = _node_list(F, min(F.size, maxn + nvars + 2))
    for trial in (0, 1):
        probe = []
        for a, ax in enumerate(axes):
            idx = len(ax) + a + trial
            probe.append(pool[idx] if idx < len(pool)
                         else ax[(7 * a + 3 * trial) % len(ax)])
        probe = tuple(probe)
        gin = probe[:n_in]
        extras = probe[n_in:]
        want = query(b, extras + eval_G(gen, gin))
        if result.eval(probe) != want:
            raise DegreeBoundExceeded(
                "off-grid check failed: declared degree bounds are wrong")
    return result


def sparse_reconstruct(b, s: int, d: int, m: Optional[int] = None) -> SparsePoly:
    """Recover the explicit sparse form of the box's polynomial.

    d bounds every variable's individual degree, s the number of terms.
    Works shift by shift: the power map x^(i^t mod q) turns f into a
    univariate polynomial whose terms separate for at least one shift
    i <= m = (n*d*s)^2; the w-perturbed coordinate recovers each term's
    exponent in that coordinate.  A candidate is accepted only when it
    matches the box on every grid point of every shift, which pins it
    down among all (n, s, d)-sparse polynomials.
    """
    from .blackbox import query

    F = b.field
    n = b.n
    if m is None:
        m = feasible_m(F, n, d, m_for("SPARSE_INTERP", n, s, d))
    gen = build(m, n, F, d)
    q = gen.q
    xnodes = list(gen.T)
    wnodes = _node_list(F, d + 1)

    def shift_grid(i: int) -> dict[tuple[int, int, int], Fe]:
        data = {}
        for j in range(1, n + 1):
            for wi, w in enumerate(wnodes):
                for xi, x in enumerate(xnodes):
                    data[(j, wi, xi)] = query(b, ks_point(gen, i, j, x, w))
        return data

    def decode(i: int, data) -> Optional[SparsePoly]:
        # per marker j: x-interpolate each w-row, then w-interpolate per power
        per_j = []
        support = None
        for j in range(1, n + 1):
            rows = []
            for wi in range(len(wnodes)):
                vals = [data[(j, wi, xi)] for xi in range(len(xnodes))]
                rows.append(_coeffs_1d(F, xnodes, vals))
            sup = {e for r in rows for e in range(len(r)) if r[e]}
            if support is None:
                support = sup
            elif support != sup:
                return None  # markers disagree on the univariate support
            terms = {}
            for e in sorted(sup):
                wv = [r[e] if e < len(r) else 0 for r in rows]
                wpoly = _coeffs_1d(F, wnodes, wv)
                nz = [t for t, c in enumerate(wpoly) if c]
                if len(nz) != 1:
                    return None  # collision: several exponents merged
                terms[e] = (nz[0], wpoly[nz[0]])
            per_j.append(terms)
        if support is None or not support:
            return SparsePoly.zero(F, n)
        if len(support) > s:
            return None
        items = []
        for e in sorted(support):
            exps = []
            coeff = None
            for j in range(1, n + 1):
                ej, c = per_j[j - 1][e]
                if ej > d:
                    return None
                if coeff is None:
                    coeff = c
                elif coeff != c:
                    return None  # markers disagree on the coefficient
                exps.append(ej)
            if sum(exps[t] * pow(i, t + 1, q) for t in range(n)) != e:
                return None  # exponent vector does not explain the power
            items.append((tuple(exps), coeff))
        return SparsePoly.make(F, n, items)

    def verify(cand: SparsePoly, have: dict[int, dict]) -> bool:
        for i in range(1, m + 1):
            data = have.get(i)
            if data is not None:
                for (j, wi, xi), val in data.items():
                    pt = ks_point(gen, i, j, xnodes[xi], wnodes[wi])
                    if cand.eval(pt) != val:
                        return False
            else:
                for j in range(1, n + 1):
                    for w in wnodes:
                        for x in xnodes:
                            pt = ks_point(gen, i, j, x, w)
                            if cand.eval(pt) != query(b, pt):
                                return False
        return True

    seen: dict[int, dict] = {}
    for i in range(1, m + 1):
        data = shift_grid(i)
        seen[i] = data
        cand = decode(i, data)
        if cand is None:
            continue
        if cand.sparsity() <= s and verify(cand, seen):
            return cand
    raise ReconstructFailed(f"no shift in 1..{m} produced a verified "
                            f"({n},{s},{d})-sparse candidate")


TASKS = ("SPARSE_INTERP", "DIVISOR_ENUM", "PRIMDIV_COPRIME", "CHAR0_COPRIME",
         "DELTA_K", "MULTIQUAD", "RATIONAL_INTERP", "RATIONAL_INTERP_MULTI")

_CHAR_DISPATCHED = ("MULTIQUAD", "RATIONAL_INTERP", "RATIONAL_INTERP_MULTI")


def _base_for(task: str, n: int, s: int, d: int, k: int, char_class: str) -> int:
    if task == "SPARSE_INTERP":
        return n * d * s
    if task == "DIVISOR_ENUM":
        return 2 * n * s * d
    if task == "PRIMDIV_COPRIME":
        return n * (8 * d ** 4) * (factorial(4 * d ** 2) * s ** (8 * d ** 3))
    if task == "CHAR0_COPRIME":
        return n * (8 * d ** 2) * (factorial(4 * d) * s ** (8 * d))
    if task == "DELTA_K":
        return (n + d) * (factorial(d) * (k * s) ** d) * (2 * d ** 2)
    if task == "MULTIQUAD":
        if char_class == "LARGE":
            return _base_for("CHAR0_COPRIME", n, s, d, k, char_class)
        return n * (20 * d ** 2) * (factorial(5 * d) * s ** (10 * d ** 2))
    if task in ("RATIONAL_INTERP", "RATIONAL_INTERP_MULTI"):
        inner = "CHAR0_COPRIME" if char_class == "LARGE" else "PRIMDIV_COPRIME"
        return _base_for(inner, n, s, d, k, char_class)
    raise ValueError(f"unknown task {task!r}")


def m_for(task: str, n: int, s: int, d: int, k: int = 1, ell: int = 1,
          D: int = 1, field: Optional[FieldDesc] = None) -> int:
    """Sufficient shift count for the given task at parameters (n, s, d).

    Product tasks fold the factor count in by calling with s^ell or d*ell
    as the caller's analysis requires; this function only evaluates the
    per-task closed forms.  Char-dispatched tasks need the field to pick
    the large- or small-characteristic formula.
    """
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}; expected one of {TASKS}")
    cc = ""
    if task in _CHAR_DISPATCHED:
        if field is None:
            raise ValueError(f"{task} dispatches on the field characteristic; "
                             f"pass field=")
        cc = field.char_class(d)
    base = _base_for(task, n, s, d, k, cc)
    m = base * base
    if task == "RATIONAL_INTERP_MULTI":
        from .config import RATIONAL_MULTI_D_EXPONENT
        m *= D ** RATIONAL_MULTI_D_EXPONENT
    if m > MAX_M:
        raise Overflow(f"required shift count {m} exceeds the 2^62 cap")
    return m


def default_ladder(target_m: int) -> list[int]:
    """Ascending trial shift counts: cheap rungs first, then the target
    (itself capped).  Results found below the rigorous target are only
    ever accepted when independently verified."""
    cap = min(target_m, LADDER_HARD_CAP)
    rungs = [r for r in DEFAULT_LADDER if r < cap]
    rungs.append(cap)
    return rungs


@dataclass(frozen=True)
class SliceFrame:
    """One symbolic restriction of the generator: fixed shift and marker,
    optional revived coordinate.  Slices live in four variables, in this
    order: y (carried through from an extra leading slot), x (the power
    map image), w (marker perturbation), u (revived coordinate)."""
    q: int
    shift: int
    marker: int = 0      # 1-based coordinate, 0 = no marker
    revived: int = 0     # 1-based coordinate, 0 = none

    def exponent_of(self, t: int) -> int:
        """Image exponent of coordinate t under the power map."""
        return pow(self.shift, t, self.q)


def slice_poly(f: SparsePoly, frame: SliceFrame, has_y: bool = False) -> SparsePoly:
    """Symbolic image of an explicit polynomial under the frame.

    Coordinate t maps to w^[t = marker] * x^(shift^t mod q), the revived
    coordinate maps to u.  With has_y the input's slot 0 passes through
    to the slice's y slot and coordinates start at slot 1.
    """
    F = f.field
    n_coords = f.n - (1 if has_y else 0)
    emap = [frame.exponent_of(t) for t in range(1, n_coords + 1)]
    acc: dict[tuple[int, int, int, int], Fe] = {}
    for e, c in f.terms.items():
        ye = e[0] if has_y else 0
        xe = we = ue = 0
        for t in range(1, n_coords + 1):
            et = e[t] if has_y else e[t - 1]
            if et == 0:
                continue
            if frame.revived == t:
                ue += et
            else:
                xe += et * emap[t - 1]
                if frame.marker == t:
                    we += et
        key = (ye, xe, we, ue)
        prev = acc.get(key)
        acc[key] = c if prev is None else F.add(prev, c)
    return SparsePoly.make(F, 4, [(k, v) for k, v in acc.items() if v])
