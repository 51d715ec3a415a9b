"""Evaluation boxes: querying, normalization, monomial stripping."""

import pytest

from sparsefactor.blackbox import (
    BlackBox,
    normalize_access,
    query,
    strip_monomial,
    strip_var_power,
)
from sparsefactor.errors import ArityMismatch
from sparsefactor.poly import Monomial, SparsePoly


def test_query_explicit(F5, P):
    b = BlackBox.explicit(P(F5, "x1 + 1"), d=1, s=2)
    assert query(b, (4,)) == 0
    assert query(b, (1,)) == 2


def test_query_product(F5, P):
    child = BlackBox.explicit(P(F5, "x1 + 1"), d=1, s=2)
    child2 = BlackBox.explicit(P(F5, "x1 + 1"), d=1, s=2)
    b = BlackBox.product([child, child2])
    assert query(b, (1,)) == 4


def test_query_arity_guard(F5, P):
    b = BlackBox.explicit(P(F5, "x1 + 1"), d=1, s=2)
    with pytest.raises(ArityMismatch):
        query(b, (1, 2))


def test_query_counts_accumulate(F5, P):
    c1 = BlackBox.explicit(P(F5, "x1 + 1"), d=1, s=2)
    c2 = BlackBox.explicit(P(F5, "x1 + 2"), d=1, s=2)
    b = BlackBox.product([c1, c2])
    query(b, (2,))
    assert b.query_count == 1
    assert c1.query_count == c2.query_count == 1
    # re-registering the same child counts every pass through it
    twice = BlackBox.product([c1, c1])
    query(twice, (2,))
    assert c1.query_count == 3


def test_normalize_access_linear(F7, P):
    # x_0-coefficients of x2 + x3*x1 are (x2, x3); normalized value is 1 + a2*y
    f = P(F7, "x2 + x3*x1")
    nb = normalize_access(BlackBox.explicit(f, d=1, s=2))
    assert nb.n == 3
    assert query(nb, (2, 3, 4)) == (1 + 4 * 2) % 7
    assert query(nb, (0, 3, 4)) == 1


def test_normalize_access_degree_zero(F7, P):
    # nothing depends on the first variable: image is constantly 1
    nb = normalize_access(BlackBox.explicit(P(F7, "x2 + x3"), d=1, s=2))
    assert all(query(nb, (y, 2, 5)) == 1 for y in range(4))


def test_normalize_access_quadratic(F7, P):
    f = P(F7, "x1 + x2", n=3) * P(F7, "x1 + x3")
    nb = normalize_access(BlackBox.explicit(f, d=2, s=4))
    for (y0, a1, a2) in [(3, 2, 6), (1, 1, 1), (5, 0, 4), (2, 3, 0)]:
        want = (1 + (a1 + a2) * y0 + a1 * a2 * y0 * y0) % 7
        assert query(nb, (y0, a1, a2)) == want


def test_normalize_reverse_monic_everywhere(F11, P):
    # free term of the normalized polynomial is 1: y = 0 always answers 1
    f = P(F11, "x1 + x2", n=3) * P(F11, "x1 + x3") * P(F11, "x2 + 2", n=3)
    nb = normalize_access(BlackBox.explicit(f, d=2, s=8))
    for a1 in range(11):
        for a2 in range(11):
            assert query(nb, (0, a1, a2)) == 1


def test_strip_var_power(F5, P):
    b = BlackBox.explicit(P(F5, "x1^2*x2 + x1^2"), d=2, s=2)
    k, g = strip_var_power(b, 0)
    assert k == 2
    assert query(g, (3, 2)) == 3  # x2 + 1 at x2 = 2

    b2 = BlackBox.explicit(P(F5, "x1 + 1"), d=1, s=2)
    k2, g2 = strip_var_power(b2, 0)
    assert k2 == 0
    assert query(g2, (2,)) == 3

    b3 = BlackBox.explicit(P(F5, "x1^2 + x1*x2"), d=2, s=2)
    k3, g3 = strip_var_power(b3, 0)
    assert k3 == 1
    pts = [(a, c) for a in range(5) for c in range(5)]
    want = P(F5, "x1 + x2")
    assert all(query(g3, pt) == want.eval(pt) for pt in pts)


def test_strip_monomial(F5, P):
    b = BlackBox.explicit(P(F5, "x1^2*x2 + x1*x2^2"), d=2, s=2)
    M, g = strip_monomial(b)
    assert M == Monomial((1, 1))
    assert query(g, (0, 1)) == 1  # zero coordinate handled by shifted interpolation

    b2 = BlackBox.explicit(P(F5, "x1 + x2"), d=1, s=2)
    M2, g2 = strip_monomial(b2)
    assert M2.is_one()
    assert query(g2, (2, 2)) == 4

    b3 = BlackBox.explicit(P(F5, "x1^3*x2 + x1^2"), d=3, s=2)
    M3, g3 = strip_monomial(b3)
    assert M3 == Monomial((2, 0))
    assert query(g3, (0, 0)) == 1


def test_purity_repeated_queries(F7, P):
    f = P(F7, "x1 + x2", n=3) * P(F7, "x1 + x3")
    nb = normalize_access(BlackBox.explicit(f, d=2, s=4))
    pt = (3, 2, 6)
    first = query(nb, pt)
    deltas = []
    for _ in range(1000):
        before = nb.query_count
        assert query(nb, pt) == first
        deltas.append(nb.query_count - before)
    assert len(set(deltas)) == 1


def test_derived_counts_induced_queries(F5, P):
    base = BlackBox.explicit(P(F5, "x1^2 + 4"), d=2, s=2)
    b = BlackBox.derived(base, 1, fn=lambda pt: query(base, tuple(pt)),
                         total_deg_bound=2)
    query(b, (2,))
    query(b, (3,))
    assert b.query_count == base.query_count == 2


def test_stripped_divisors_carry_no_monomial(F5, P):
    # after stripping, any explicit divisor recovered later has trivial
    # monomial part
    from sparsefactor.poly import largest_monomial_divisor

    f = P(F5, "x1^2*x2 + x1*x2^2")
    M, g = strip_monomial(BlackBox.explicit(f, d=2, s=2))
    grid = [(a, c) for a in range(5) for c in range(5)]
    core = P(F5, "x1 + x2")
    assert all(query(g, pt) == core.eval(pt) for pt in grid)
    assert largest_monomial_divisor(core).is_one()
