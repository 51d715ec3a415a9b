"""Divisibility, multiplicity, divisor enumeration and factorization.

Every operation here reasons about a polynomial through its slice images:
fixing the shift, the marker coordinate and optionally a revived coordinate
of the power-map generator turns the input into an explicit polynomial in
at most four variables (y, x, w, u), small enough for the dense engines in
smallfac.  A structural property of the input (divisibility, multiplicity,
having a given divisor) is inherited by every slice, so one bad slice is a
certificate of failure; the shift-count table says a witnessing slice
exists below m when the property fails.  Positive answers are certified
independently, by exact division, remultiplication or pointwise checks, so
probing fewer shifts than the rigorous m can cost completeness but never
soundness.
"""

from dataclasses import dataclass
from itertools import product as iproduct
from typing import Callable, NamedTuple, Optional, Sequence

from .blackbox import BlackBox, query, _materialize
from .config import (AlgoParams, EXPAND_CAP, LADDER_HARD_CAP,
                     LIFT_SUBSET_CAP, MULTI_FACTOR_MAX_VARS,
                     SLICE_FACTOR_WORK_CAP, STABLE_SHIFTS,
                     VERIFY_POINTS, VERIFY_SHIFTS)
from .errors import (CandidateExplosion, CharModeViolation, FieldTooSmall,
                     HypothesisViolation, LiftBudgetExceeded, LimitExceeded,
                     Overflow, SBudgetExceeded, ZeroPolynomial)
from .ff import FieldDesc, next_prime
from .gen import SliceFrame, build, eval_G, m_for, slice_poly
from .poly import (Monomial, SparsePoly, divide_monomial, exact_div,
                   largest_monomial_divisor, newton_vertices, poly_sort_key)
from .smallfac import Factorization, multi_factor

__all__ = [
    "DivisorSet", "AuditResult", "multiplicity_of", "divides",
    "is_complete_power", "rational_interpolate", "rational_interpolate_multi",
    "sparse_divisors", "divisors_of_product", "factor_product_irreducibles",
    "multiquadratic_factors", "factor_nsd", "factor_product_general",
    "divisor_count_audit",
]

# slice-ring variable slots, fixed order
_SY, _SX, _SW, _SU = 0, 1, 2, 3


@dataclass(frozen=True)
class DivisorSet:
    """Monomial part plus the monomial-free divisors found, 1 included.

    Divisors are canonical (unit-normalized) and sorted; the set is closed
    under the recorded factor lattice to the extent the sweep verified it.
    """
    monomial: Monomial
    divisors: tuple

    def has(self, g: SparsePoly) -> bool:
        return g.canonical()[1] in set(self.divisors)


class AuditResult(NamedTuple):
    count: int
    bound: int
    vertices: int
    ok: bool


# ---------------------------------------------------------------------------
# probing plumbing


def _coprime_task(field: FieldDesc, d: int) -> str:
    return "CHAR0_COPRIME" if field.char_class(d) == "LARGE" else "PRIMDIV_COPRIME"


def _target_m(task: str, params: AlgoParams, field: FieldDesc, n: int,
              k: int = 1, D: int = 1) -> int:
    try:
        return m_for(task, n, params.s, params.d, k=k, ell=params.ell, D=D,
                     field=field)
    except Overflow:
        return LADDER_HARD_CAP


def _probe_m(params: AlgoParams, field: FieldDesc, n: int, task: str,
             D: int = 1) -> int:
    """Shift count for yes/no probes.  The rigorous table value is usually
    astronomical; below it we keep enough shifts that q exceeds the
    (2d+1)^n exponent-encoding threshold, which is where slice decodes
    become provably collision-free for d-bounded inputs."""
    if params.m_override:
        return params.m_override
    target = _target_m(task, params, field, n, D=D)
    if not params.escalate:
        return min(target, LADDER_HARD_CAP)
    floor = max(64, (2 * params.d + 1) ** min(n, 3) + 1)
    return min(target, floor)


def _probe_shifts(params: AlgoParams, m_eff: int) -> list[int]:
    out = set(range(1, params.max_probe_shifts + 1))
    out.add(2 * params.d + 1)
    return sorted(a for a in out if 1 <= a <= m_eff)


def _interp_grid(field: FieldDesc, axes: list[list], value_at) -> dict:
    """Dense tensor interpolation; returns index->coefficient map."""
    from .gen import _coeffs_1d
    grid = {}
    for idx in iproduct(*(range(len(ax)) for ax in axes)):
        grid[idx] = value_at(tuple(axes[a][i] for a, i in enumerate(idx)))
    for axis in range(len(axes)):
        per = len(axes[axis])
        new = {}
        keys = {i[:axis] + (None,) + i[axis + 1:] for i in grid}
        for key in keys:
            vals = [grid[key[:axis] + (t,) + key[axis + 1:]] for t in range(per)]
            coeffs = _coeffs_1d(field, axes[axis], vals)
            coeffs += [0] * (per - len(coeffs))
            for t in range(per):
                new[key[:axis] + (t,) + key[axis + 1:]] = coeffs[t]
        grid = new
    return grid


def _slice_of_box(b: BlackBox, frame: SliceFrame) -> SparsePoly:
    """Slice image of the box's polynomial, in the 4-variable slice ring.

    Explicit and product boxes slice symbolically.  Opaque boxes are
    interpolated on a grid shaped by their declared degree bounds, which
    needs a field with enough elements.
    """
    F = b.field
    if b.kind == "explicit":
        return slice_poly(b.poly, frame)
    if b.kind == "product":
        acc = SparsePoly.const(F, 4, 1)
        for c in b.children:
            cs = _slice_of_box(c, frame)
            if cs.is_zero():
                return SparsePoly.zero(F, 4)
            acc = acc * cs
        return acc
    # opaque: dense interpolation along the slice variables
    T = b.total_deg_bound
    q = frame.q
    exps = [frame.exponent_of(t) for t in range(1, b.n + 1)]
    xb = T * max((e for t, e in enumerate(exps, start=1) if t != frame.revived),
                 default=0)
    pv = min(T, b.d * b.ell)  # per-coordinate degree bound
    wb = pv if frame.marker else 0
    ub = pv if frame.revived else 0
    need = max(xb + 1, wb + 1, ub + 1)
    if F.size < need:
        raise FieldTooSmall(
            need, f"slice interpolation needs {need} nodes, field has {F.size}")
    from .blackbox import _nodes
    xs = _nodes(F, xb + 1)
    ws = _nodes(F, wb + 1)
    us = _nodes(F, ub + 1)

    def value_at(vals):
        x, w, u = vals
        pt = []
        for t in range(1, b.n + 1):
            if t == frame.revived:
                pt.append(u)
            else:
                c = F.pow(x, exps[t - 1])
                if t == frame.marker:
                    c = F.mul(c, w)
                pt.append(c)
        return query(b, tuple(pt))

    grid = _interp_grid(F, [xs, ws, us], value_at)
    items = [((0, i[0], i[1], i[2]), c) for i, c in grid.items() if c]
    return SparsePoly.make(F, 4, items)


def _u_coeff(f: SparsePoly, j: int) -> SparsePoly:
    items = [(e[:_SU] + (0,), c) for e, c in f.terms.items() if e[_SU] == j]
    return SparsePoly.make(f.field, 4, items)


def _pdivmod_u(f: SparsePoly, g: SparsePoly) -> tuple[SparsePoly, SparsePoly]:
    """Pseudo-division along u: lc(g)^k * f = quo * g + rem."""
    dg = g.individual_degree(_SU)
    lc_g = _u_coeff(g, dg)
    quo = SparsePoly.zero(f.field, 4)
    cur = f
    uvar = SparsePoly.variable(f.field, 4, _SU)
    while not cur.is_zero() and cur.individual_degree(_SU) >= dg:
        dc = cur.individual_degree(_SU)
        step = _u_coeff(cur, dc) * uvar ** (dc - dg)
        quo = lc_g * quo + step
        cur = lc_g * cur - step * g
    return quo, cur


def _u_multiplicity(fs: SparsePoly, phis: SparsePoly) -> int:
    """How often phis divides fs along u, working over the fraction field
    of the remaining slice variables.  Leading-coefficient powers picked up
    by pseudo-division are units there and cannot contain phis."""
    du = phis.individual_degree(_SU)
    cap = fs.individual_degree(_SU) // du
    k = 0
    cur = fs
    while k < cap and not cur.is_zero():
        quo, rem = _pdivmod_u(cur, phis)
        if not rem.is_zero():
            break
        cur = quo
        k += 1
    return k


def _expand_box(b: BlackBox) -> Optional[SparsePoly]:
    """Explicit polynomial of the box when that stays desk-sized."""
    if b.kind == "explicit":
        return b.poly
    if b.kind == "product":
        acc = SparsePoly.const(b.field, b.n, 1)
        for c in b.children:
            cp = _expand_box(c)
            if cp is None:
                return None
            acc = acc * cp
            if acc.sparsity() > EXPAND_CAP:
                return None
        return acc
    return None


def _child_polys(b: BlackBox, d: int) -> list[SparsePoly]:
    """Explicit factor list of a box.  Small characteristic requires the
    sparse product structure to be present; over large characteristic an
    opaque box is recovered by dense interpolation at desk scale."""
    if b.kind == "explicit":
        return [b.poly]
    if b.kind == "product":
        out = []
        for c in b.children:
            out.extend(_child_polys(c, d))
        return out
    if b.field.char_class(d) == "SMALL":
        raise CharModeViolation(
            "small characteristic requires sparse-product access to the input")
    return [_materialize(b)]


def _as_box(f) -> BlackBox:
    return f if isinstance(f, BlackBox) else BlackBox.explicit(f)


def _unit_is_eth_power(F: FieldDesc, u, e: int) -> bool:
    from math import gcd
    if u == 0:
        return False
    r = (F.size - 1) // gcd(e, F.size - 1)
    return F.pow(u, r) == 1


def _walk_points(F: FieldDesc, n: int, count: int):
    """Deterministic spread of evaluation points over the canonical elements."""
    elems = []
    it = iter(F.elements())
    for _ in range(min(F.size, 256)):
        try:
            elems.append(next(it))
        except StopIteration:
            break
    L = len(elems)
    for k in range(count):
        yield tuple(elems[((2 * t + 3) * k + 7 * t + k // 7) % L]
                    for t in range(n))


def _verify_points(F: FieldDesc, n: int, d: int, count: int):
    """Evaluation points for remultiplication checks: generator images when
    the field is big enough, the canonical walk otherwise."""
    try:
        gen = build(8, n, F, max(1, d))
        pts = []
        src = _walk_points(F, 6, count)
        for inp in src:
            pts.append(eval_G(gen, inp))
        return pts
    except (FieldTooSmall, LimitExceeded):
        return list(_walk_points(F, n, count))


# ---------------------------------------------------------------------------
# multiplicity and divisibility


def _check_irreducible_input(phi: SparsePoly) -> None:
    # desk-scale guard; larger inputs are trusted as declared
    if phi.is_constant():
        raise HypothesisViolation("multiplicity asks for a non-unit divisor")
    if phi.sparsity() <= 64 and len(phi.active_vars()) <= MULTI_FACTOR_MAX_VARS:
        fz = multi_factor(phi)
        if len(fz.factors) != 1 or fz.factors[0][1] != 1:
            raise HypothesisViolation(
                f"{phi.to_text()} is not irreducible")


def multiplicity_of(phi: SparsePoly, f, params: AlgoParams) -> int:
    """Largest k with phi^k dividing the boxed polynomial.

    Probes revived slices along each variable of phi: the u-multiplicity of
    the slice of phi inside the slice of f never undercounts, so the
    minimum over informative frames is an upper bound that is exact once
    one probed frame separates the factors.
    """
    fb = _as_box(f)
    F = fb.field
    _check_irreducible_input(phi)
    task = _coprime_task(F, params.d)
    m_eff = _probe_m(params, F, fb.n, task)
    q = next_prime(m_eff)
    shifts = _probe_shifts(params, m_eff)
    best = None
    for i in phi.active_vars():
        for a in shifts:
            fr = SliceFrame(q, a, 0, i + 1)
            phis = slice_poly(phi, fr)
            if phis.is_zero() or phis.individual_degree(_SU) == 0:
                continue
            fs = _slice_of_box(fb, fr)
            if fs.is_zero():
                continue
            k = _u_multiplicity(fs, phis)
            best = k if best is None else min(best, k)
            if best == 0:
                return 0
    if best is None:
        fe = _expand_box(fb)
        if fe is not None:
            k = 0
            while True:
                quo = exact_div(fe, phi)
                if quo is None:
                    return k
                fe = quo
                k += 1
        raise HypothesisViolation(
            "no informative generator image; raise m_override")
    return best


def _is_sparse_structured(b: BlackBox) -> bool:
    if b.kind == "explicit":
        return True
    if b.kind == "product":
        return all(_is_sparse_structured(c) for c in b.children)
    return False


def divides(f, g, params: AlgoParams) -> bool:
    """Does the boxed f divide the boxed g.

    Counterexample slices certify False immediately.  When all probed
    frames agree, the answer is confirmed by exact division of the
    expanded polynomials whenever those stay desk-sized; otherwise the
    probed agreement itself is returned.
    """
    fb, gb = _as_box(f), _as_box(g)
    F = fb.field
    if F.char_class(params.d) == "SMALL":
        if not (_is_sparse_structured(fb) and _is_sparse_structured(gb)):
            raise CharModeViolation(
                "small characteristic divisibility needs sparse-product inputs")
    fe = _expand_box(fb)
    if fe is not None and fe.is_zero():
        raise ZeroPolynomial("divisor box is the zero polynomial")
    if fe is not None and fe.is_constant():
        return True
    task = _coprime_task(F, params.d)
    m_eff = _probe_m(params, F, fb.n, task)
    q = next_prime(m_eff)
    shifts = _probe_shifts(params, m_eff)
    live = fe.active_vars() if fe is not None else list(range(fb.n))
    for a in shifts:
        fr0 = SliceFrame(q, a, 0, 0)
        fs = _slice_of_box(fb, fr0)
        gs = _slice_of_box(gb, fr0)
        if fs.is_zero():
            if not gs.is_zero():
                return False
        elif exact_div(gs, fs) is None:
            return False
        for i in live:
            fr = SliceFrame(q, a, 0, i + 1)
            fs = _slice_of_box(fb, fr)
            gs = _slice_of_box(gb, fr)
            if fs.is_zero():
                if not gs.is_zero():
                    return False
                continue
            if fs.individual_degree(_SU) == 0:
                continue
            if not _pdivmod_u(gs, fs)[1].is_zero():
                return False
    ge = _expand_box(gb)
    if fe is not None and ge is not None:
        if ge.is_zero():
            return True
        return exact_div(ge, fe) is not None
    return True


def is_complete_power(f, e: int, params: AlgoParams) -> bool:
    """Is the boxed polynomial an e-th power, unit included.

    Large characteristic only: each slice is factored completely; an e-th
    power forces every slice multiplicity to be divisible by e and the
    slice unit to be an e-th power residue.
    """
    if e < 1:
        raise ValueError("power must be positive")
    fb = _as_box(f)
    F = fb.field
    if F.char_class(params.d) != "LARGE":
        raise CharModeViolation(
            "complete-power detection runs in large characteristic only")
    if e == 1:
        return True
    task = _coprime_task(F, params.d)
    m_eff = _probe_m(params, F, fb.n, task)
    q = next_prime(m_eff)
    shifts = _probe_shifts(params, m_eff)
    fe = _expand_box(fb)
    if fe is not None and fe.is_zero():
        raise ZeroPolynomial("cannot test the zero polynomial")
    if fe is not None and fe.is_constant():
        return _unit_is_eth_power(F, fe.constant_value(), e)
    live = fe.active_vars() if fe is not None else list(range(fb.n))
    saw_frame = False
    for i in live:
        for a in shifts:
            fr = SliceFrame(q, a, 0, i + 1)
            fs = _slice_of_box(fb, fr)
            if fs.is_zero():
                continue
            if fs.is_constant():
                saw_frame = True
                if not _unit_is_eth_power(F, fs.constant_value(), e):
                    return False
                continue
            try:
                fz = multi_factor(fs, work_cap=SLICE_FACTOR_WORK_CAP)
            except (LimitExceeded, LiftBudgetExceeded):
                continue
            saw_frame = True
            if any(mult % e for _, mult in fz.factors):
                return False
            if not _unit_is_eth_power(F, fz.unit, e):
                return False
    if not saw_frame:
        raise HypothesisViolation(
            "no informative generator image; raise m_override")
    return True


# ---------------------------------------------------------------------------
# the divisor sweep


def _y_blocks(field: FieldDesc, fz: Factorization) -> Optional[list]:
    """Factor blocks of a slice of a normalized polynomial, rescaled so each
    block is 1 at y=0.  Returns None when a block does not evaluate to a
    nonzero constant there, which only happens for unusable frames."""
    blocks = []
    for g, mult in fz.factors:
        at0 = g.subs_partial({_SY: 0})
        if not at0.is_constant() or at0.is_zero():
            return None
        blocks.append((g.scale(field.inv(at0.constant_value())), mult))
    return blocks


def _match_vector(img: SparsePoly, base: list) -> Optional[tuple]:
    """Express img as a product of base blocks; components or None."""
    vec = []
    for g, _ in base:
        k = 0
        while True:
            quo = exact_div(img, g)
            if quo is None:
                break
            img = quo
            k += 1
        vec.append(k)
    if not img.is_constant():
        return None
    return tuple(vec)


def _marked_solutions(target: tuple, marked: list, imgvecs: list) -> list:
    """All multiplicity vectors over the marked blocks whose base images
    multiply to the target vector."""
    out = []
    nb = len(marked)

    def rec(r: int, remaining: tuple, acc: list):
        if len(out) > 8:
            return
        if r == nb:
            if all(v == 0 for v in remaining):
                out.append(tuple(acc))
            return
        _, mult = marked[r]
        vec = imgvecs[r]
        top = mult
        for t, v in enumerate(vec):
            if v:
                top = min(top, remaining[t] // v)
        for z in range(top + 1):
            rec(r + 1, tuple(remaining[t] - z * vec[t] for t in range(len(remaining))),
                acc + [z])

    rec(0, target, [])
    return out


def _subset_exponents(blocks: list) -> list:
    counts = [mult for _, mult in blocks]
    total = 1
    for c in counts:
        total *= c + 1
    if total > LIFT_SUBSET_CAP:
        raise CandidateExplosion(
            f"{total} slice-factor subsets exceed the lifting cap")
    return [v for v in iproduct(*(range(c + 1) for c in counts))
            if any(v)]


def _divisor_sweep(children: Sequence[SparsePoly], field: FieldDesc, n: int,
                   params: AlgoParams, s_cap: int, d_cap: int,
                   check: Callable[[SparsePoly], bool],
                   recursion_cap: Optional[int] = None) -> set:
    """Monomial-free divisors of the product of `children`, canonical form,
    at most s_cap terms and individual degrees at most d_cap, every element
    confirmed by `check`.

    Works one shift at a time.  The product is normalized against its
    lowest coefficient in the highest live variable; slices of the
    normalization are factored and subset products are decoded back into
    candidate divisors, reading each variable's exponent off the marked
    coordinate's w-degree.  Recursion along the lowest-coefficient chain
    supplies the units-and-content combinations the decode needs.
    """
    one = SparsePoly.const(field, n, 1)
    live = sorted({v for c in children for v in c.active_vars()})
    found = {one}
    if not live:
        return found
    if recursion_cap is None:
        recursion_cap = s_cap ** max(1, d_cap)
    x0 = live[-1]
    markers = [t for t in live if t != x0]

    views = [c.uni_view(x0).coeffs for c in children]
    f0_children = [v[0] for v in views]
    f0_cores = []
    for g in f0_children:
        f0_cores.append(divide_monomial(g, largest_monomial_divisor(g)))

    # the decode needs the divisor set of the lowest coefficient, checked
    # against that coefficient itself
    f0_full = SparsePoly.const(field, n, 1)
    for g in f0_cores:
        if f0_full is not None:
            f0_full = f0_full * g
            if f0_full.sparsity() > EXPAND_CAP:
                f0_full = None
    if f0_full is not None:
        check_rec = lambda u: exact_div(f0_full, u) is not None
    else:
        f0_box = BlackBox.product([BlackBox.explicit(g) for g in f0_cores])
        check_rec = lambda u: divides(BlackBox.explicit(u), f0_box, params)
    cands_c = _divisor_sweep(f0_cores, field, n, params, s_cap, d_cap,
                             check_rec, recursion_cap)
    if len(cands_c) > recursion_cap:
        raise CandidateExplosion(
            f"{len(cands_c)} lowest-coefficient divisors exceed the "
            f"s^d enumeration bound {recursion_cap}")

    def admissible(u: SparsePoly) -> bool:
        if u.is_constant():
            return False
        if u.sparsity() > s_cap:
            return False
        return all(u.individual_degree(v) <= d_cap for v in u.active_vars())

    def offer(u: SparsePoly) -> bool:
        u = u.canonical()[1]
        if u in found or not admissible(u):
            return False
        if check(u):
            found.add(u)
            return True
        return False

    # seeds: the recursion's divisors, the children, the full product
    for c in cands_c:
        offer(c)
    full = one
    for c in children:
        offer(divide_monomial(c, largest_monomial_divisor(c)))
        if full is not None:
            full = full * c
            if full.sparsity() > EXPAND_CAP:
                full = None
    if full is not None:
        offer(divide_monomial(full, largest_monomial_divisor(full)))

    pre = one
    for t in markers:
        pre = pre * SparsePoly.variable(field, n, t, d_cap)
    yv = SparsePoly.variable(field, 4, _SY)

    target = _target_m("DIVISOR_ENUM", params, field, max(params.n, n))
    m_eff = params.m_override or min(target, LADDER_HARD_CAP)
    q = next_prime(m_eff)

    def tilde_slice(fr: SliceFrame) -> Optional[tuple]:
        f0s = SparsePoly.const(field, 4, 1)
        for g in f0_children:
            gs = slice_poly(g, fr)
            if gs.is_zero():
                return None
            f0s = f0s * gs
        prod = SparsePoly.const(field, 4, 1)
        for vw in views:
            yf = yv * f0s
            acc = SparsePoly.zero(field, 4)
            pw = SparsePoly.const(field, 4, 1)
            for i, coeff in enumerate(vw):
                if i:
                    pw = pw * yf
                if not coeff.is_zero():
                    acc = acc + slice_poly(coeff, fr) * pw
            if acc.is_zero():
                return None
            prod = prod * acc
        B = exact_div(prod, f0s)
        if B is None:
            return None
        return B, f0s

    stable = 0
    for a in range(1, m_eff + 1):
        fr0 = SliceFrame(q, a, 0, 0)
        base = tilde_slice(fr0)
        new_here = False
        if base is not None:
            B, f0s0 = base
            try:
                base_blocks = _y_blocks(
                    field, multi_factor(B, work_cap=SLICE_FACTOR_WORK_CAP))
            except (LimitExceeded, LiftBudgetExceeded):
                base_blocks = None
            if base_blocks is not None:
                new_here = _sweep_one_shift(
                    field, n, x0, fr0, base_blocks, f0s0, cands_c, markers,
                    pre, d_cap, tilde_slice, offer)
        stable = 0 if new_here else stable + 1
        if params.escalate and stable >= STABLE_SHIFTS:
            break

    # lattice closure: products of found divisors that still check out
    budget = 200_000
    grew = True
    while grew and budget > 0:
        grew = False
        snapshot = sorted(found, key=poly_sort_key)
        for g in snapshot:
            for h in snapshot:
                if g.is_constant() or h.is_constant():
                    continue
                budget -= 1
                if budget <= 0:
                    break
                cand = g * h
                if admissible(cand) and offer(cand):
                    grew = True
            if budget <= 0:
                break
    return found


def _sweep_one_shift(field, n, x0, fr0, base_blocks, f0s0, cands_c, markers,
                     pre, d_cap, tilde_slice, offer) -> bool:
    """Candidate extraction at one shift; returns whether anything new
    passed the check."""
    q, a = fr0.q, fr0.shift
    subset_vecs = [v for v in _subset_exponents(base_blocks)
                   if sum(z * g.individual_degree(_SY)
                          for z, (g, _) in zip(v, base_blocks)) <= d_cap]
    if not subset_vecs:
        return False

    # marked slices, factored and matched against the base blocks
    marked = {}
    for t in markers:
        frM = SliceFrame(q, a, t + 1, 0)
        got = tilde_slice(frM)
        if got is None:
            return False
        BM, f0sM = got
        try:
            mb = _y_blocks(
                field, multi_factor(BM, work_cap=SLICE_FACTOR_WORK_CAP))
        except (LimitExceeded, LiftBudgetExceeded):
            return False
        if mb is None:
            return False
        imgvecs = []
        for g, _ in mb:
            vec = _match_vector(g.subs_partial({_SW: 1}).canonical()[1],
                                base_blocks)
            if vec is None:
                return False
            imgvecs.append(vec)
        marked[t] = (frM, mb, imgvecs, f0sM)

    new_any = False
    for v in subset_vecs:
        hhat = SparsePoly.const(field, 4, 1)
        for z, (g, _) in zip(v, base_blocks):
            if z:
                hhat = hhat * g ** z
        h_coeffs = hhat.uni_view(_SY).coeffs
        dy = len(h_coeffs) - 1
        if dy < 1:
            continue
        for c in cands_c:
            prec = pre * c
            pc0 = slice_poly(prec, fr0)
            S = [pc0]
            ok = True
            den = SparsePoly.const(field, 4, 1)
            for j in range(1, dy + 1):
                den = den * f0s0
                Sj = exact_div(pc0 * h_coeffs[j], den)
                if Sj is None:
                    ok = False
                    break
                S.append(Sj)
            if not ok:
                continue
            sup = [sorted({e[_SX] for e in Sj.terms}) for Sj in S]

            # per-marker exponent maps, one per consistent marked subset
            per_marker = []
            for t in markers:
                frM, mb, imgvecs, f0sM = marked[t]
                sols = _marked_solutions(v, mb, imgvecs)
                pcM = slice_poly(prec, frM)
                emaps = []
                for z in sols:
                    Hhat = SparsePoly.const(field, 4, 1)
                    for zi, (g, _) in zip(z, mb):
                        if zi:
                            Hhat = Hhat * g ** zi
                    Hc = Hhat.uni_view(_SY).coeffs
                    if len(Hc) - 1 != dy:
                        continue
                    emap = {}
                    good = True
                    denM = SparsePoly.const(field, 4, 1)
                    for j in range(0, dy + 1):
                        if j:
                            denM = denM * f0sM
                        Sj = exact_div(pcM * Hc[j], denM) if j else pcM
                        if Sj is None or Sj.subs_partial({_SW: 1}) != S[j]:
                            good = False
                            break
                        bucket = {}
                        for e, coeff in Sj.terms.items():
                            bucket.setdefault(e[_SX], []).append((e[_SW], coeff))
                        for E, pairs in bucket.items():
                            if len(pairs) != 1:
                                good = False
                                break
                            emap[(j, E)] = pairs[0][0]
                        if not good:
                            break
                    if good:
                        emaps.append(emap)
                if not emaps:
                    per_marker = None
                    break
                if len(emaps) > 8:
                    emaps = emaps[:8]
                per_marker.append((t, emaps))
            if per_marker is None:
                continue

            combos = [()]
            for t, emaps in per_marker:
                combos = [cb + ((t, em),) for cb in combos for em in emaps]
                if len(combos) > 16:
                    combos = combos[:16]
            for cb in combos:
                poly_items = []
                good = True
                for j in range(0, dy + 1):
                    for E in sup[j]:
                        coeff = S[j].terms.get((0, E, 0, 0))
                        if coeff is None:
                            good = False
                            break
                        evec = [0] * n
                        evec[x0] = j
                        total = 0
                        for t, em in cb:
                            e_t = em.get((j, E))
                            if e_t is None:
                                good = False
                                break
                            evec[t] = e_t
                            total += e_t * fr0.exponent_of(t + 1)
                        if not good or total != E:
                            good = False
                            break
                        poly_items.append((tuple(evec), coeff))
                    if not good:
                        break
                if not good or not poly_items:
                    continue
                U = SparsePoly.make(field, n, poly_items)
                if U.is_zero():
                    continue
                U = divide_monomial(U, largest_monomial_divisor(U))
                if offer(U):
                    new_any = True
    return new_any


# ---------------------------------------------------------------------------
# divisor enumeration entry points


def sparse_divisors(f: SparsePoly, params: AlgoParams) -> DivisorSet:
    """All divisors of the explicit polynomial f that are themselves
    (n, s, d)-sparse: the largest monomial divisor recorded separately,
    the monomial-free divisors enumerated by the slice sweep and each one
    confirmed by exact division."""
    if f.is_zero():
        raise ZeroPolynomial("the zero polynomial has no divisor set")
    mono = largest_monomial_divisor(f)
    core = divide_monomial(f, mono)
    if core.is_constant():
        return DivisorSet(mono, (SparsePoly.const(f.field, f.n, 1),))
    check = lambda u: exact_div(core, u) is not None
    got = _divisor_sweep([core], f.field, f.n, params, params.s, params.d,
                         check)
    return DivisorSet(mono, tuple(sorted(got, key=poly_sort_key)))


def divisors_of_product(f, params: AlgoParams) -> DivisorSet:
    """Divisor set of a product box: per-factor monomials are stripped
    structurally, candidates come from the same sweep run on the explicit
    factor list, and each candidate is confirmed with the divisibility
    test against the stripped product."""
    fb = _as_box(f)
    field = fb.field
    n = fb.n
    children = _child_polys(fb, params.d)
    exps = [0] * n
    cores = []
    for c in children:
        if c.is_zero():
            raise ZeroPolynomial("a product factor is the zero polynomial")
        m = largest_monomial_divisor(c)
        for v, e in enumerate(m.exps):
            exps[v] += e
        cc = divide_monomial(c, m)
        if not cc.is_constant():
            cores.append(cc)
    mono = Monomial(tuple(exps))
    one = SparsePoly.const(field, n, 1)
    if not cores:
        return DivisorSet(mono, (one,))
    ell = max(1, len(cores))
    cap = params.s ** max(1, params.d * (2 + max(1, ell - 1).bit_length()))
    stripped = BlackBox.product([BlackBox.explicit(c) for c in cores])
    check = lambda u: divides(BlackBox.explicit(u), stripped, params)
    got = _divisor_sweep(cores, field, n, params, params.s, params.d, check,
                         recursion_cap=cap)
    return DivisorSet(mono, tuple(sorted(got, key=poly_sort_key)))


# ---------------------------------------------------------------------------
# factorization pipelines


def _monomial_factors(field: FieldDesc, n: int, mono: Monomial) -> list:
    out = []
    for v, e in enumerate(mono.exps):
        if e:
            out.append((SparsePoly.variable(field, n, v), e))
    out.sort(key=lambda t: poly_sort_key(t[0]))
    return out


def _unit_of(fb: BlackBox, factors: list, params: AlgoParams):
    """Scalar unit making unit * prod(factors^mult) match the box."""
    F = fb.field
    for pt in _walk_points(F, fb.n, 4 * VERIFY_POINTS):
        denom = 1
        for g, e in factors:
            gv = g.eval(pt)
            if gv == 0:
                denom = 0
                break
            denom = F.mul(denom, F.pow(gv, e))
        if denom:
            return F.div(query(fb, pt), denom)
    raise HypothesisViolation("found no evaluation point avoiding all factors")


def _remultiply_check(fb: BlackBox, unit, factors: list,
                      params: AlgoParams) -> bool:
    F = fb.field
    for pt in _verify_points(F, fb.n, params.d, VERIFY_POINTS):
        want = query(fb, pt)
        got = unit
        for g, e in factors:
            got = F.mul(got, F.pow(g.eval(pt), e))
        if got != want:
            return False
    return True


def _proper_divisor_exists(g: SparsePoly, pool) -> bool:
    for h in pool:
        if h is g or h == g:
            continue
        quo = exact_div(g, h)
        if quo is not None and not quo.is_constant():
            return True
    return False


def factor_nsd(f: SparsePoly, params: AlgoParams) -> Factorization:
    """Complete factorization of an explicit polynomial whose irreducible
    factors are (n, s, d)-sparse.  Divisors are enumerated up to the
    sparsity budget S; a divisor is irreducible when no two smaller
    enumerated divisors multiply to it; multiplicities fall out of repeated
    exact division.  A non-constant remainder after peeling means the
    budget missed a factor."""
    if f.is_zero():
        raise ZeroPolynomial("cannot factor the zero polynomial")
    field, n = f.field, f.n
    mono = largest_monomial_divisor(f)
    core = divide_monomial(f, mono)
    factors = _monomial_factors(field, n, mono)
    if core.is_constant():
        return Factorization(core.constant_value(), factors)
    S = params.sparsity_budget()
    check = lambda u: exact_div(core, u) is not None
    got = _divisor_sweep([core], field, n, params, S, params.d, check)
    pool = sorted((g for g in got if not g.is_constant()), key=poly_sort_key)
    irred = [g for g in pool if not _proper_divisor_exists(g, pool)]
    for g in irred:
        fz = multi_factor(g) if len(g.active_vars()) <= MULTI_FACTOR_MAX_VARS \
            else None
        if fz is not None and (len(fz.factors) != 1 or fz.factors[0][1] != 1):
            raise SBudgetExceeded(
                f"divisor enumeration at budget {S} missed the parts of "
                f"{g.to_text()}; raise S")
    rem = core
    for g in irred:
        k = 0
        while True:
            quo = exact_div(rem, g)
            if quo is None:
                break
            rem = quo
            k += 1
        if k:
            factors.append((g, k))
    if not rem.is_constant():
        raise SBudgetExceeded(
            f"budget {S} left an unfactored remainder of {rem.sparsity()} "
            f"terms; raise S")
    unit = field.mul(rem.constant_value(), 1)
    factors.sort(key=lambda t: poly_sort_key(t[0]))
    out = Factorization(unit, factors)
    if out.remultiply(field, n) != f:
        raise SBudgetExceeded("factor list failed remultiplication")
    return out


def factor_product_irreducibles(f, params: AlgoParams) -> Factorization:
    """Factor a product box whose factors are promised irreducible and
    (n, s, d)-sparse.  The minimal non-unit divisors are the irreducible
    factors; exponents come from the multiplicity probe.  The result is
    confirmed on evaluation points and by degree accounting."""
    fb = _as_box(f)
    field, n = fb.field, fb.n
    ds = divisors_of_product(fb, params)
    pool = [g for g in ds.divisors if not g.is_constant()]
    minimal = [g for g in pool if not _proper_divisor_exists(g, pool)]
    factors = []
    for g in minimal:
        k = multiplicity_of(g, fb, params)
        if k < 1:
            raise HypothesisViolation(
                f"enumerated divisor {g.to_text()} has multiplicity zero")
        factors.append((g, k))
    all_factors = _monomial_factors(field, n, ds.monomial) + factors
    all_factors.sort(key=lambda t: poly_sort_key(t[0]))
    unit = _unit_of(fb, all_factors, params)
    children = _child_polys(fb, params.d)
    want_deg = sum(c.total_degree() for c in children)
    have_deg = sum(e * g.total_degree() for g, e in all_factors)
    if want_deg != have_deg:
        raise HypothesisViolation(
            f"degree accounting failed: factors explain {have_deg} of "
            f"{want_deg}; some factor is not (n, s, d)-sparse irreducible")
    if not _remultiply_check(fb, unit, all_factors, params):
        raise HypothesisViolation("factor list failed the evaluation check")
    return Factorization(unit, all_factors)


def factor_product_general(f, params: AlgoParams) -> Factorization:
    """Factor a product box with no irreducibility promise on the factors.
    Runs the divisor sweep at the sparsity budget S, keeps the divisors
    with no proper enumerated divisor, and reads exponents off the
    multiplicity probe."""
    fb = _as_box(f)
    field, n = fb.field, fb.n
    children = _child_polys(fb, params.d)
    exps = [0] * n
    cores = []
    for c in children:
        if c.is_zero():
            raise ZeroPolynomial("a product factor is the zero polynomial")
        m = largest_monomial_divisor(c)
        for v, e in enumerate(m.exps):
            exps[v] += e
        cc = divide_monomial(c, m)
        if not cc.is_constant():
            cores.append(cc)
    mono = Monomial(tuple(exps))
    factors = _monomial_factors(field, n, mono)
    S = params.sparsity_budget()
    if cores:
        ell = len(cores)
        cap = S ** max(1, params.d * (2 + max(1, ell - 1).bit_length()))
        stripped = BlackBox.product([BlackBox.explicit(c) for c in cores])
        check = lambda u: divides(BlackBox.explicit(u), stripped, params)
        got = _divisor_sweep(cores, field, n, params, S, params.d, check,
                             recursion_cap=cap)
        pool = [g for g in got if not g.is_constant()]
        minimal = [g for g in pool if not _proper_divisor_exists(g, pool)]
        for g in sorted(minimal, key=poly_sort_key):
            k = multiplicity_of(g, BlackBox.product(
                [BlackBox.explicit(c) for c in cores]), params)
            if k < 1:
                raise SBudgetExceeded(
                    f"enumerated divisor {g.to_text()} has multiplicity zero")
            factors.append((g, k))
    factors.sort(key=lambda t: poly_sort_key(t[0]))
    unit = _unit_of(fb, factors, params)
    want_deg = sum(c.total_degree() for c in children)
    have_deg = sum(e * g.total_degree() for g, e in factors)
    if want_deg != have_deg or not _remultiply_check(fb, unit, factors, params):
        raise SBudgetExceeded(
            f"budget {S} did not explain the product; raise S")
    return Factorization(unit, factors)


def multiquadratic_factors(f, params: AlgoParams) -> list:
    """Irreducible factors of the boxed polynomial that have individual
    degrees at most 2, with multiplicities.  The scalar unit is not part
    of the answer."""
    fb = _as_box(f)
    field, n = fb.field, fb.n
    children = _child_polys(fb, params.d)
    exps = [0] * n
    cores = []
    for c in children:
        if c.is_zero():
            raise ZeroPolynomial("a product factor is the zero polynomial")
        m = largest_monomial_divisor(c)
        for v, e in enumerate(m.exps):
            exps[v] += e
        cc = divide_monomial(c, m)
        if not cc.is_constant():
            cores.append(cc)
    out = _monomial_factors(field, n, Monomial(tuple(exps)))
    if cores:
        stripped = BlackBox.product([BlackBox.explicit(c) for c in cores])
        check = lambda u: divides(BlackBox.explicit(u), stripped, params)
        got = _divisor_sweep(cores, field, n, params, params.s, 2, check)
        pool = [g for g in got if not g.is_constant()]
        for g in sorted(pool, key=poly_sort_key):
            if _proper_divisor_exists(g, pool):
                continue
            k = multiplicity_of(g, stripped, params)
            if k >= 1:
                out.append((g, k))
    out.sort(key=lambda t: poly_sort_key(t[0]))
    return out


def divisor_count_audit(f: SparsePoly, params: AlgoParams) -> AuditResult:
    """Count irreducible factors of a monomial-free f with multiplicity and
    compare against the d*ceil(log2 s) bound; the vertex count of the
    Newton polytope is audited against s alongside, and both checks fold
    into the ok flag."""
    fz = factor_nsd(f, params)
    count = sum(e for _, e in fz.factors)
    bound = params.d * max(0, params.s - 1).bit_length()
    vertices = newton_vertices(f)
    ok = count <= bound and vertices <= params.s
    return AuditResult(count, bound, vertices, ok)


# ---------------------------------------------------------------------------
# rational interpolation


def _qslice_mult(phi: SparsePoly, qb: BlackBox, q: int,
                 shifts: list) -> Optional[int]:
    best = None
    for i in phi.active_vars():
        for a in shifts:
            fr = SliceFrame(q, a, 0, i + 1)
            phis = slice_poly(phi, fr)
            if phis.is_zero() or phis.individual_degree(_SU) == 0:
                continue
            qs = _slice_of_box(qb, fr)
            if qs.is_zero():
                continue
            k = _u_multiplicity(qs, phis)
            best = k if best is None else min(best, k)
            if best == 0:
                return 0
    return best


def _decode_ratio(qb: BlackBox, fb: BlackBox, bpoly: SparsePoly, jpow: int,
                  params: AlgoParams, q: int, m_dec: int) -> SparsePoly:
    """Reconstruct the polynomial q*b/f^jpow from its slices.

    Division happens symbolically in the slice ring, so points where f
    vanishes never get probed.  Decoding mirrors the sparse-interpolation
    exponent read-off: per marker, each surviving power of x must carry a
    single w-term."""
    F = qb.field
    n = qb.n
    s, d = params.s, params.d

    def slices_at(i: int) -> Optional[list]:
        out = []
        for j in range(1, n + 1):
            fr = SliceFrame(q, i, j, 0)
            fs = _slice_of_box(fb, fr)
            if fs.is_zero():
                return None
            qs = _slice_of_box(qb, fr)
            bs = slice_poly(bpoly, fr)
            if qs.is_zero():
                out.append(SparsePoly.zero(F, 4))
                continue
            Aj = exact_div(qs * bs, fs ** jpow)
            if Aj is None:
                return None
            out.append(Aj)
        return out

    def decode(i: int, As: list) -> Optional[SparsePoly]:
        support = None
        per_j = []
        for Aj in As:
            bucket = {}
            for e, coeff in Aj.terms.items():
                if e[_SY] or e[_SU]:
                    return None
                bucket.setdefault(e[_SX], []).append((e[_SW], coeff))
            sup = set(bucket)
            if support is None:
                support = sup
            elif support != sup:
                return None
            terms = {}
            for E, pairs in bucket.items():
                if len(pairs) != 1:
                    return None
                terms[E] = pairs[0]
            per_j.append(terms)
        if support is None or not support:
            return SparsePoly.zero(F, n)
        if len(support) > s:
            return None
        items = []
        for E in sorted(support):
            exps = []
            coeff = None
            for j in range(1, n + 1):
                ej, c = per_j[j - 1][E]
                if ej > d:
                    return None
                if coeff is None:
                    coeff = c
                elif coeff != c:
                    return None
                exps.append(ej)
            if sum(exps[t] * pow(i, t + 1, q) for t in range(n)) != E:
                return None
            items.append((tuple(exps), coeff))
        return SparsePoly.make(F, n, items)

    for i in range(1, m_dec + 1):
        As = slices_at(i)
        if As is None:
            continue
        cand = decode(i, As)
        if cand is None:
            continue
        ok = True
        extra = 0
        v = i + 1
        while extra < VERIFY_SHIFTS and v <= m_dec:
            Bs = slices_at(v)
            v += 1
            if Bs is None:
                continue
            extra += 1
            for j in range(1, n + 1):
                if slice_poly(cand, SliceFrame(q, v - 1, j, 0)) != Bs[j - 1]:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return cand
    raise HypothesisViolation(
        "no shift produced a consistent numerator; the denominator guess "
        "may be short, raise m_override")


def rational_interpolate(qbox, f, F_set: Sequence[SparsePoly],
                         params: AlgoParams) -> tuple:
    """Write the boxed ratio q = a*f/b as the pair (a, b) with b supported
    on the supplied factor list of f.

    Denominator exponents per factor: the multiplicity of the factor in f
    minus its multiplicity in q, clamped at zero.  The numerator is then a
    polynomial, reconstructed from symbolic slice divisions, and the pair
    is confirmed pointwise through a*f == q*b, which needs no division."""
    qb, fb = _as_box(qbox), _as_box(f)
    F = qb.field
    n = qb.n
    m_eff = _probe_m(params, F, n, "RATIONAL_INTERP")
    q = next_prime(m_eff)
    shifts = _probe_shifts(params, m_eff)
    b = SparsePoly.const(F, n, 1)
    for phi in F_set:
        phi = phi.canonical()[1]
        t = multiplicity_of(phi, fb, params)
        mq = _qslice_mult(phi, qb, q, shifts)
        if mq is None:
            raise HypothesisViolation(
                f"no informative generator image for {phi.to_text()}")
        k = max(0, t - mq)
        if k:
            b = b * phi ** k
    a = _decode_ratio(qb, fb, b, 1, params, q, m_eff)
    for pt in _verify_points(F, n, params.d, VERIFY_POINTS):
        lhs = F.mul(a.eval(pt), query(fb, pt))
        rhs = F.mul(query(qb, pt), b.eval(pt))
        if lhs != rhs:
            raise HypothesisViolation(
                "candidate pair fails a*f == q*b on an evaluation point")
    return a, b


def rational_interpolate_multi(qboxes: Sequence, f,
                               F_set: Sequence[SparsePoly],
                               params: AlgoParams) -> tuple:
    """Shared-denominator variant: the j-th box holds a_j * f^j / b.  The
    denominator exponent of a factor is the largest over j of j times its
    multiplicity in f minus its multiplicity in the j-th box, clamped at
    zero; numerators decode independently against f^j."""
    fb = _as_box(f)
    qbs = [_as_box(qv) for qv in qboxes]
    if not qbs:
        raise ValueError("need at least one ratio box")
    F = fb.field
    n = fb.n
    m_eff = _probe_m(params, F, n, "RATIONAL_INTERP_MULTI", D=len(qbs))
    q = next_prime(m_eff)
    shifts = _probe_shifts(params, m_eff)
    b = SparsePoly.const(F, n, 1)
    for phi in F_set:
        phi = phi.canonical()[1]
        t = multiplicity_of(phi, fb, params)
        k = 0
        for j, qb in enumerate(qbs, start=1):
            mq = _qslice_mult(phi, qb, q, shifts)
            if mq is None:
                raise HypothesisViolation(
                    f"no informative generator image for {phi.to_text()}")
            k = max(k, j * t - mq)
        if k:
            b = b * phi ** k
    nums = []
    for j, qb in enumerate(qbs, start=1):
        a = _decode_ratio(qb, fb, b, j, params, q, m_eff)
        for pt in _verify_points(F, n, params.d, VERIFY_POINTS):
            lhs = F.mul(a.eval(pt), F.pow(query(fb, pt), j))
            rhs = F.mul(query(qb, pt), b.eval(pt))
            if lhs != rhs:
                raise HypothesisViolation(
                    "candidate pair fails a*f^j == q*b on an evaluation point")
        nums.append(a)
    return nums, b
