"""Sylvester matrices, resultants, discriminants and exact kernel dimension.

Conventions, fixed once:
  * sylvester(f, g, i) lists the f-block columns first (mu^j * f for
    j = 0..deg_i(g)-1), then the g-block (mu^j * g for j = 0..deg_i(f)-1);
    rows are the monomials mu^0 .. mu^{d1+d2-1}, ascending.  Under this
    layout res(x-a, x-b) = b - a and res(x^2+bx+c, x) = c.
  * discriminant(f, i) is res(f, df/dx_i) with no leading-coefficient or
    sign normalization; for the monic quadratic it equals 4c - b^2.
  * higher-order multiplicity detectors are homogeneous of degree
    deg_i(f) in the lambda block; only (non)vanishing is consumed anywhere.

All determinants and ranks use Bareiss fraction-free elimination with
full pivoting on the nonzero entry of minimal total degree (ties broken
by position, row-major), so every division is exact and the result is
deterministic.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .errors import BothConstant, CharTooSmallWarning, ConstantInVar, FieldMismatch
from .poly import SparsePoly, exact_div


@dataclass
class PolyMatrix:
    rows: int
    cols: int
    entries: list[list[SparsePoly]]

    def __post_init__(self) -> None:
        if len(self.entries) != self.rows:
            raise ValueError("row count mismatch")
        field = None
        n = None
        for row in self.entries:
            if len(row) != self.cols:
                raise ValueError("matrix is not rectangular")
            for e in row:
                if field is None:
                    field, n = e.field, e.n
                elif e.field != field or e.n != n:
                    raise FieldMismatch("matrix entries live in different rings")

    def ring(self):
        e = self.entries[0][0]
        return e.field, e.n


def sylvester(f: SparsePoly, g: SparsePoly, i: int) -> PolyMatrix:
    """Matrix of (h1, h2) -> h1*g + h2*f on ascending monomial bases."""
    if f.field != g.field or f.n != g.n:
        raise FieldMismatch("operands live in different rings")
    d1 = f.individual_degree(i)
    d2 = g.individual_degree(i)
    if d1 == 0 and d2 == 0:
        raise BothConstant(f"neither operand involves x{i + 1}")
    F, n = f.field, f.n
    fv = f.uni_view(i).coeffs
    gv = g.uni_view(i).coeffs
    zero = SparsePoly.zero(F, n)

    def coeff(view, t):
        return view[t] if 0 <= t < len(view) else zero

    N = d1 + d2
    entries = []
    for r in range(N):
        row = []
        for j in range(d2):  # f-block
            row.append(coeff(fv, r - j))
        for j in range(d1):  # g-block
            row.append(coeff(gv, r - j))
        entries.append(row)
    return PolyMatrix(N, N, entries)


def _bareiss(M: PolyMatrix) -> tuple[int, SparsePoly, int]:
    """(rank, last pivot, sign) by fraction-free elimination with full
    pivoting on the nonzero entry of minimal total degree."""
    field, n = M.ring()
    A = [row[:] for row in M.entries]
    rows, cols = M.rows, M.cols
    one = SparsePoly.const(field, n, 1)
    prev = one
    sign = 1
    rank = 0
    last_pivot = one
    for step in range(min(rows, cols)):
        best = None
        for ri in range(step, rows):
            for ci in range(step, cols):
                e = A[ri][ci]
                if e.is_zero():
                    continue
                deg = e.total_degree()
                if best is None or deg < best[0]:
                    best = (deg, ri, ci)
        if best is None:
            break
        _, pr, pc = best
        if pr != step:
            A[step], A[pr] = A[pr], A[step]
            sign = -sign
        if pc != step:
            for row in A:
                row[step], row[pc] = row[pc], row[step]
            sign = -sign
        piv = A[step][step]
        for ri in range(step + 1, rows):
            for ci in range(step + 1, cols):
                num = A[ri][ci] * piv - A[ri][step] * A[step][ci]
                q = exact_div(num, prev)
                if q is None:
                    raise AssertionError("Bareiss division must be exact")
                A[ri][ci] = q
            A[ri][step] = SparsePoly.zero(field, n)
        prev = piv
        last_pivot = piv
        rank += 1
    return rank, last_pivot, sign


def determinant(M: PolyMatrix) -> SparsePoly:
    if M.rows != M.cols:
        raise ValueError("determinant needs a square matrix")
    field, n = M.ring()
    rank, last, sign = _bareiss(M)
    if rank < M.rows:
        return SparsePoly.zero(field, n)
    return last if sign == 1 else -last


def kernel_dim(M: PolyMatrix) -> int:
    """cols - rank over the fraction field of the entry ring."""
    rank, _, _ = _bareiss(M)
    return M.cols - rank


def resultant(f: SparsePoly, g: SparsePoly, i: int) -> SparsePoly:
    return determinant(sylvester(f, g, i))


def discriminant(f: SparsePoly, i: int) -> SparsePoly:
    if f.individual_degree(i) < 1:
        raise ConstantInVar(f"operand does not involve x{i + 1}")
    return resultant(f, f.derivative(i), i)


def delta_k(f: SparsePoly, i: int, k: int) -> SparsePoly:
    """Multiplicity-(k+1) detector: the resultant in x_i of f against the
    lambda-weighted sum of its first k formal derivatives.

    The result lives in n+k variables: the original slots, then lambda_j
    at slot n+j-1.  It vanishes identically iff f has an irreducible
    factor of multiplicity at least k+1 involving x_i, provided the
    characteristic exceeds deg_i(f); below that regime the value is still
    computed but the equivalence is void and a CharTooSmallWarning is
    emitted.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    d = f.individual_degree(i)
    if d < 1:
        raise ConstantInVar(f"operand does not involve x{i + 1}")
    F = f.field
    if F.p <= d:
        warnings.warn(
            f"characteristic {F.p} <= deg {d}: multiplicity equivalence is void",
            CharTooSmallWarning,
        )
    n = f.n
    wide = f.with_vars(n + k, tuple(range(n)))
    g = SparsePoly.zero(F, n + k)
    deriv = wide
    for j in range(1, k + 1):
        deriv = deriv.derivative(i)
        lam = SparsePoly.variable(F, n + k, n + j - 1)
        g = g + lam * deriv
    if g.is_zero():
        # every derivative collapsed (tiny characteristic): detector is 0
        return SparsePoly.zero(F, n + k)
    return resultant(wide, g, i)
