"""Structured evaluation points: generator construction, composition,
sparse interpolation, symbolic slices."""

import random

import pytest

from sparsefactor.blackbox import BlackBox
from sparsefactor.errors import FieldTooSmall, Overflow
from sparsefactor.ff import build_extension, next_prime
from sparsefactor.gen import (
    SliceFrame,
    TASKS,
    build,
    compose_dense,
    eval_G,
    ks_point,
    m_for,
    slice_poly,
    sparse_reconstruct,
)
from sparsefactor.poly import SparsePoly


def test_build_shapes():
    F101 = build_extension(101, 1)
    g = build(4, 2, F101, 2)
    assert g.q == next_prime(4) == 5
    assert len(g.A) == 4 and len(g.B) == 2 and len(g.C) == 2
    assert len(g.T) == 2 * 2 * 5

    F7 = build_extension(7, 1)
    g2 = build(1, 1, F7, 1)
    assert g2.q == 2 and len(g2.T) == 2

    F1009 = build_extension(1009, 1)
    g3 = build(25, 3, F1009, 2)
    assert g3.q == 29
    pools = [set(g3.A), set(g3.B), set(g3.C), set(g3.T)]
    for i in range(4):
        for j in range(i + 1, 4):
            assert not (pools[i] & pools[j])


def test_build_needs_room():
    F7 = build_extension(7, 1)
    with pytest.raises(FieldTooSmall):
        build(25, 3, F7, 2)


def test_builds_deterministic():
    F = build_extension(211, 1)
    a, b = build(9, 2, F, 1), build(9, 2, F, 1)
    assert (a.q, a.A, a.B, a.C, a.T) == (b.q, b.A, b.B, b.C, b.T)


def test_eval_revived_passes_through():
    F = build_extension(101, 1)
    g = build(4, 2, F, 2)
    gr = g.revived_at(1)
    out = eval_G(gr, (3, 9, g.B[0], 1, 7))
    assert out[0] == 7


def test_revived_agrees_off_coordinate():
    # with v at the coordinate tag, only the revived slot can differ
    F = build_extension(101, 1)
    g = build(4, 2, F, 2)
    rnd = random.Random(3)
    for _ in range(25):
        x, y, z, w, u = (rnd.randrange(101) for _ in range(5))
        for r in (1, 2):
            un = eval_G(g, (x, y, z, w, u, g.C[r - 1]))
            rv = eval_G(g.revived_at(r), (x, y, z, w, u))
            for t in range(2):
                if t != r - 1:
                    assert un[t] == rv[t]


def test_ks_point_formula():
    F = build_extension(101, 1)
    g = build(4, 2, F, 2)
    kp = ks_point(g, 2, 1, 3, 5)
    assert kp == ((5 * pow(3, 2, 101)) % 101, pow(3, 4, 101))
    # no marker: plain power map
    assert ks_point(g, 2, 0, 3, 5) == (pow(3, 2, 101), pow(3, 4, 101))


def test_compose_constant_and_revived_variable():
    F = build_extension(211, 1)
    g = build(4, 2, F, 1)
    c = BlackBox.explicit(SparsePoly.const(F, 2, 9), d=1, s=1)
    cc = compose_dense(c, g)
    assert cc.is_constant() and cc.constant_value() == 9

    xb = BlackBox.explicit(SparsePoly.variable(F, 2, 0), d=1, s=1)
    xu = compose_dense(xb, g.revived_at(1))
    assert xu == SparsePoly.variable(F, 5, 4)


def test_compose_pointwise_agreement(P):
    F = build_extension(211, 1)
    g = build(4, 2, F, 1)
    f = P(F, "x1*x2 + 3*x1 + 1")
    comp = compose_dense(BlackBox.explicit(f, d=1, s=3), g)
    rnd = random.Random(7)
    for _ in range(50):
        pt = tuple(rnd.randrange(211) for _ in range(6))
        assert comp.eval(pt) == f.eval(eval_G(g, pt))


def test_sparse_reconstruct_basics(P):
    F = build_extension(101, 1)
    z = SparsePoly.zero(F, 2)
    assert sparse_reconstruct(BlackBox.explicit(z, d=1, s=1), 1, 1) == z

    mono = P(F, "x1^2", n=2)
    assert sparse_reconstruct(BlackBox.explicit(mono, d=2, s=1), 1, 2) == mono

    f = P(F, "x1*x2 + 3*x1 + 1")
    assert sparse_reconstruct(BlackBox.explicit(f, d=1, s=3), 3, 1) == f


def test_sparse_reconstruct_roundtrip_corpus():
    F = build_extension(401, 1)
    rnd = random.Random(11)
    for _ in range(20):
        n = rnd.randint(1, 2)
        d = rnd.randint(1, 2)
        s = rnd.randint(1, 3)
        items = {}
        for _ in range(s):
            e = tuple(rnd.randint(0, d) for _ in range(n))
            items[e] = rnd.randrange(1, 401)
        f = SparsePoly.make(F, n, list(items.items()))
        got = sparse_reconstruct(BlackBox.explicit(f, d=d, s=s), s, d)
        assert got == f


def test_m_for_values():
    assert m_for("SPARSE_INTERP", 2, 3, 1) == 36
    assert m_for("DIVISOR_ENUM", 2, 3, 1) == 144
    assert m_for("CHAR0_COPRIME", 2, 2, 1) == 9663676416
    assert set(TASKS) >= {"SPARSE_INTERP", "DIVISOR_ENUM", "CHAR0_COPRIME"}
    with pytest.raises(Overflow):
        m_for("PRIMDIV_COPRIME", 3, 4, 3)
    with pytest.raises(ValueError):
        m_for("NO_SUCH_TASK", 2, 2, 1)


def test_slice_poly_exponent_maps(P):
    F = build_extension(101, 1)
    f = P(F, "x1*x2 + 1")
    plain = slice_poly(f, SliceFrame(q=5, shift=2))
    assert sorted(plain.terms.items()) == [((0, 0, 0, 0), 1), ((0, 6, 0, 0), 1)]
    marked = slice_poly(f, SliceFrame(q=5, shift=2, marker=2))
    assert sorted(marked.terms.items()) == [((0, 0, 0, 0), 1), ((0, 6, 1, 0), 1)]
    revived = slice_poly(f, SliceFrame(q=5, shift=2, revived=1))
    assert sorted(revived.terms.items()) == [((0, 0, 0, 0), 1), ((0, 4, 0, 1), 1)]


def test_slice_matches_collapsed_point(P):
    # symbolic slice evaluated at (x, w) equals f at the collapsed point
    F = build_extension(101, 1)
    g = build(4, 2, F, 1)
    f = P(F, "x1*x2 + 3*x1 + 1")
    rnd = random.Random(23)
    for marker in (0, 1, 2):
        fr = SliceFrame(q=g.q, shift=2, marker=marker)
        img = slice_poly(f, fr)
        for _ in range(20):
            x0, w0 = rnd.randrange(1, 101), rnd.randrange(101)
            assert img.eval((0, x0, w0, 0)) == f.eval(ks_point(g, 2, marker, x0, w0))


def _grow_corpus(rnd, F, count):
    """Random explicit members of the bounded-factor family, desk scale."""
    out = []
    while len(out) < count:
        n = rnd.randint(1, 2)
        d = rnd.randint(1, 2)
        s = rnd.randint(1, 3)
        items = {}
        for _ in range(s):
            e = tuple(rnd.randint(0, d) for _ in range(n))
            items[e] = rnd.randrange(1, F.size)
        f = SparsePoly.make(F, n, list(items.items()))
        if f.is_zero():
            continue
        out.append((f, n, max(1, s), d))
    return out


def test_nonvanishing_and_degree_preservation():
    # composed image of a nonzero factor stays nonzero, and reviving a
    # coordinate preserves that variable's degree in the u slot
    F = build_extension(2003, 1)
    rnd = random.Random(5)
    for f, n, s, d in _grow_corpus(rnd, F, 200):
        m = (n * d * s) ** 2
        g = build(m, n, F, d)
        witness = False
        for _ in range(60):
            pt = tuple(rnd.randrange(F.size) for _ in range(6))
            if f.eval(eval_G(g, pt)) != 0:
                witness = True
                break
        assert witness, f"composed image vanished everywhere sampled: {f!r}"

        for i in range(n):
            di = f.individual_degree(i)
            gr = g.revived_at(i + 1)
            got = None
            for _ in range(40):
                base = tuple(rnd.randrange(F.size) for _ in range(4))
                vals = [(u, f.eval(eval_G(gr, base + (u,)))) for u in range(di + 2)]
                deg = _interp_degree(F, vals)
                if deg == di:
                    got = deg
                    break
                assert deg <= di
            assert got == di, f"u-degree {got} != {di} for {f!r}"


def _interp_degree(F, pairs):
    """Degree of the unique interpolant through (u, value) pairs."""
    xs = [u for u, _ in pairs]
    ys = [v for _, v in pairs]
    k = len(xs)
    coeffs = [0] * k
    for j in range(k):
        denom = 1
        for t in range(k):
            if t != j:
                denom = F.mul(denom, F.sub(xs[j], xs[t]))
        w = F.div(ys[j], denom)
        basis = [1]
        for t in range(k):
            if t == j:
                continue
            nxt = [0] * (len(basis) + 1)
            for a, c in enumerate(basis):
                nxt[a + 1] = F.add(nxt[a + 1], c)
                nxt[a] = F.add(nxt[a], F.mul(c, F.neg(xs[t])))
            basis = nxt
        for a, c in enumerate(basis):
            coeffs[a] = F.add(coeffs[a], F.mul(w, c))
    deg = -1
    for a, c in enumerate(coeffs):
        if c != 0:
            deg = a
    return deg
