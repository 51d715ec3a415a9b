"""Sparse polynomial representation and ring operations."""

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from sparsefactor.errors import ArityMismatch, FieldMismatch
from sparsefactor.ff import build_extension
from sparsefactor.poly import (
    Monomial,
    SparsePoly,
    content_primitive,
    divide_monomial,
    exact_div,
    largest_monomial_divisor,
    newton_vertices,
    poly_sort_key,
    ring_ops,
    uni_view,
)


def sparse_polys(p=5, n=2, d=3, max_terms=4, allow_zero=False):
    """Strategy: random polynomials over F_p in n vars, degree <= d per var."""
    F = build_extension(p, 1)
    exp = st.tuples(*[st.integers(0, d) for _ in range(n)])
    term = st.tuples(exp, st.integers(1, p - 1))
    return st.lists(term, min_size=0 if allow_zero else 1, max_size=max_terms).map(
        lambda items: SparsePoly.make(F, n, items)
    )


def test_product_example(F5, P):
    f = P(F5, "x1 + 1") * P(F5, "x1 + 4")
    assert f == P(F5, "x1^2 + 4")


def test_exact_div_examples(F5, P):
    assert exact_div(P(F5, "x1^2 + 4"), P(F5, "x1 + 1")) == P(F5, "x1 + 4")
    assert exact_div(P(F5, "x1^2 + 1"), P(F5, "x1 + 1")) is None
    f = P(F5, "x1^2*x2 + 3")
    assert exact_div(f, SparsePoly.const(F5, 2, 1)) == f


def test_eval_examples(F5, P):
    f = P(F5, "x1*x2 + 1")
    assert f.eval((2, 3)) == 2
    assert f.eval((0, 0)) == 1
    g = P(F5, "x1 + 4")
    assert g.eval((1,)) == 0


def test_uni_view_shapes(F5, P):
    # f = x1 + x2*x3 seen in x3: coefficient list [x1, x2]
    f = P(F5, "x1 + x2*x3")
    v = uni_view(f, 2)
    assert v.coeffs == [P(F5, "x1", n=3), P(F5, "x2", n=3)]
    assert v.degree() == 1
    assert v.rebuild() == f

    c = SparsePoly.const(F5, 1, 3)
    assert uni_view(c, 0).coeffs == [c]

    sq = P(F5, "x1^2")
    v2 = uni_view(sq, 0)
    assert [g.is_zero() for g in v2.coeffs] == [True, True, False]
    assert v2.coeffs[2] == SparsePoly.const(F5, 1, 1)


def test_largest_monomial_divisor(F5, P):
    assert largest_monomial_divisor(P(F5, "x1^2*x2 + x1*x2^2")) == Monomial((1, 1))
    assert largest_monomial_divisor(P(F5, "x1 + 1")).is_one()
    assert largest_monomial_divisor(P(F5, "x1^3")) == Monomial((3,))


def test_divide_monomial(F5, P):
    f = P(F5, "x1^2*x2 + x1*x2^2")
    assert divide_monomial(f, Monomial((1, 1))) == P(F5, "x1 + x2")


def test_newton_vertices(F5, P):
    assert newton_vertices(P(F5, "x1^2 + 4")) == 2
    square = P(F5, "x1^2*x2^2 + x1^2 + x2^2 + 1")
    assert newton_vertices(square) == 4
    prod = (P(F5, "x1^2 + 4", n=2)) * (P(F5, "x2^2 + 4"))
    assert newton_vertices(prod) == 4
    assert newton_vertices(SparsePoly.const(F5, 2, 3)) == 1


def test_content_primitive(F5, P):
    # content in x1 of x2*x1 + x2 is x2 itself
    f = P(F5, "x2*x1 + x2")
    cont, prim = content_primitive(f, 0)
    assert cont == P(F5, "x2") and prim == P(F5, "x1 + 1", n=2)

    g = P(F5, "x1^2 + 1")
    cont2, prim2 = content_primitive(g, 0)
    assert cont2.is_constant() and prim2 == g.scale(F5.inv(cont2.constant_value()))

    h = P(F5, "x2 + 1") * P(F5, "x1", n=2) + (P(F5, "x2 + 1") ** 2)
    cont3, prim3 = content_primitive(h, 0)
    assert cont3 == P(F5, "x2 + 1") and prim3 == P(F5, "x1 + x2 + 1")


def test_arity_and_field_guards(F5, F7):
    a = SparsePoly.variable(F5, 2, 0)
    b = SparsePoly.variable(F5, 3, 0)
    with pytest.raises(ArityMismatch):
        _ = a + b
    c = SparsePoly.variable(F7, 2, 0)
    with pytest.raises(FieldMismatch):
        _ = a * c


def test_ring_ops_dispatch(F5, P):
    f, g = P(F5, "x1 + 1"), P(F5, "x1 + 4")
    assert ring_ops(f, g, "add") == P(F5, "2*x1")
    assert ring_ops(f, g, "sub") == SparsePoly.const(F5, 1, 2)
    assert ring_ops(f, g, "mul") == P(F5, "x1^2 + 4")
    with pytest.raises(ValueError):
        ring_ops(f, g, "pow")


def test_canonical_unit_times_monic(F5, P):
    f = P(F5, "3*x1 + 1")
    u, m = f.canonical()
    assert m.scale(u) == f
    _, c = m.lead()
    assert c == 1
    # scaling does not change the monic part
    assert f.scale(2).canonical()[1] == m


def test_translate_and_substitute(F7, P):
    f = P(F7, "x1^2")
    assert f.translate(0, 1) == P(F7, "x1^2 + 2*x1 + 1")
    g = P(F7, "x1 + 1", n=2)
    assert g.substitute(0, P(F7, "x2^2", n=2)) == P(F7, "x2^2 + 1")


def test_derivative(F5, P):
    f = P(F5, "x1^3 + 2*x1*x2 + 4")
    assert f.derivative(0) == P(F5, "3*x1^2 + 2*x2")
    assert f.derivative(1) == P(F5, "2*x1", n=2)
    # char divides the exponent: derivative of x1^5 vanishes
    assert P(F5, "x1^5").derivative(0).is_zero()


@settings(max_examples=80, deadline=None)
@given(sparse_polys(), sparse_polys())
def test_exact_div_roundtrip(f, g):
    # terms with equal exponents may cancel during construction
    assume(not g.is_zero())
    prod = f * g
    h = exact_div(prod, g)
    assert h is not None and h * g == prod


@settings(max_examples=80, deadline=None)
@given(sparse_polys(allow_zero=True))
def test_uni_view_roundtrip(f):
    for i in range(f.n):
        if f.is_zero():
            continue
        assert uni_view(f, i).rebuild() == f


@settings(max_examples=60, deadline=None)
@given(sparse_polys(), sparse_polys(), sparse_polys())
def test_ring_axioms(f, g, h):
    assert f * (g + h) == f * g + f * h
    assert (f - g) + g == f
    assert f * g == g * f


@settings(max_examples=40, deadline=None)
@given(sparse_polys(), sparse_polys())
def test_newton_vertices_submultiplicative(f, g):
    # vertex count of a product is at most the product of vertex counts
    assert newton_vertices(f * g) <= newton_vertices(f) * newton_vertices(g)


@settings(max_examples=40, deadline=None)
@given(sparse_polys(), st.integers(0, 3))
def test_pow_matches_repeated_mul(f, e):
    acc = SparsePoly.const(f.field, f.n, 1)
    for _ in range(e):
        acc = acc * f
    assert f ** e == acc


def test_eval_at_all_points_distinguishes(F5, P):
    # two distinct low-degree polys differ somewhere on the full grid
    f, g = P(F5, "x1*x2 + 1"), P(F5, "x1*x2 + x1 + 1")
    pts = [(a, b) for a in range(5) for b in range(5)]
    assert any(f.eval(pt) != g.eval(pt) for pt in pts)


def test_sort_key_total_order(F5, P):
    polys = [P(F5, t, n=2) for t in ("x1", "x2", "x1 + 1", "x1*x2", "2*x1")]
    keys = [poly_sort_key(f) for f in polys]
    assert len(set(keys)) == len(keys)
    assert sorted(keys) == sorted(keys, key=lambda k: k)
