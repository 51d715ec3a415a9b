"""Sylvester matrices, resultants, discriminants, higher multiplicity
detectors, and exact kernel dimension."""

import math
import random
import warnings

import pytest

from sparsefactor.errors import BothConstant, CharTooSmallWarning, ConstantInVar
from sparsefactor.ff import build_extension
from sparsefactor.poly import SparsePoly
from sparsefactor.resmat import (
    PolyMatrix,
    delta_k,
    determinant,
    discriminant,
    kernel_dim,
    resultant,
    sylvester,
)
from sparsefactor.smallfac import gcd_multi


def test_sylvester_two_linear(F5, P):
    # res of x - a and x - b is b - a up to the fixed sign
    f, g = P(F5, "x1 + 4*x2", n=3), P(F5, "x1 + 4*x3")
    M = sylvester(f, g, 0)
    assert (M.rows, M.cols) == (2, 2)
    det = determinant(M)
    diff = P(F5, "x2 + 4*x3")
    assert det == diff or det == -diff


def test_resultant_of_equal_inputs_vanishes(F5, P):
    f = P(F5, "x1^2 + x2*x1 + x3")
    assert resultant(f, f, 0).is_zero()


def test_resultant_against_variable(F5, P):
    f = P(F5, "x1^2 + x2*x1 + x3")
    r = resultant(f, P(F5, "x1", n=3), 0)
    c = P(F5, "x3")
    assert r == c or r == -c


def test_kernel_dim_equals_gcd_degree_example(F5, P):
    M = sylvester(P(F5, "x1^2 + 4"), P(F5, "x1 + 4"), 0)
    assert kernel_dim(M) == 1


def test_both_constant_rejected(F5):
    c = SparsePoly.const(F5, 1, 2)
    with pytest.raises(BothConstant):
        sylvester(c, c, 0)


def test_discriminant_examples(F5, P):
    d = discriminant(P(F5, "x1^2 + x2*x1 + x3"), 0)
    # b^2 - 4c up to a unit; here the convention lands on -(b^2 - 4c)
    assert d == P(F5, "4*x2^2 + 4*x3")
    assert discriminant(P(F5, "x1^2 + 3*x1 + 1"), 0).is_zero()
    assert not discriminant(P(F5, "x1^2 + 1"), 0).is_zero()
    with pytest.raises(ConstantInVar):
        discriminant(P(F5, "x2 + 1", n=2), 0)


def test_delta_1_is_lambda_power_times_discriminant(F7, P):
    # convention: the k = 1 detector equals lambda_1^deg(f) * disc(f)
    f = P(F7, "x1^2 + 4*x1 + 2")
    d1 = delta_k(f, 0, 1)
    disc = discriminant(f, 0)
    lam = SparsePoly.variable(F7, 2, 1)
    assert d1 == (lam ** 2).scale(disc.constant_value())


def test_delta_2_detects_triple_factor(F7, P):
    f = P(F7, "x1 + 6") ** 3
    assert delta_k(f, 0, 2).is_zero()
    g = (P(F7, "x1 + 6") ** 2) * P(F7, "x1 + 5")
    assert not delta_k(g, 0, 2).is_zero()


def test_delta_k_validation(F7, P):
    with pytest.raises(ValueError):
        delta_k(P(F7, "x1^2 + 1"), 0, 0)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        delta_k(P(build_extension(5, 1), "x1^5 + x1 + 1"), 0, 1)
    assert any(issubclass(x.category, CharTooSmallWarning) for x in w)


def test_kernel_dim_trivial_matrices(F5):
    one = SparsePoly.const(F5, 1, 1)
    zero = SparsePoly.zero(F5, 1)
    I = PolyMatrix(3, 3, [[one if i == j else zero for j in range(3)]
                          for i in range(3)])
    assert kernel_dim(I) == 0
    Z = PolyMatrix(2, 3, [[zero] * 3 for _ in range(2)])
    assert kernel_dim(Z) == 3


def _random_poly(rnd, F, n, d, terms):
    items = {}
    for _ in range(terms):
        e = tuple(rnd.randint(0, d) for _ in range(n))
        items[e] = rnd.randrange(1, F.size)
    return SparsePoly.make(F, n, list(items.items()))


def test_kernel_dim_equals_gcd_degree_random():
    F = build_extension(7, 1)
    rnd = random.Random(41)
    done = 0
    while done < 25:
        f = _random_poly(rnd, F, 2, 2, rnd.randint(1, 3))
        g = _random_poly(rnd, F, 2, 2, rnd.randint(1, 3))
        h = _random_poly(rnd, F, 2, 1, 2)
        if any(t.is_zero() or t.individual_degree(0) == 0 for t in (f, g, h)):
            continue
        a, b = f * h, g * h
        gcd = gcd_multi(a, b, 0)
        assert kernel_dim(sylvester(a, b, 0)) == gcd.individual_degree(0)
        done += 1


def test_resultant_sparsity_and_degree_bounds():
    F = build_extension(11, 1)
    rnd = random.Random(17)
    done = 0
    while done < 30:
        d = rnd.randint(1, 2)
        s = rnd.randint(2, 3)
        f = _random_poly(rnd, F, 2, d, s)
        g = _random_poly(rnd, F, 2, d, s)
        if f.individual_degree(0) == 0 and g.individual_degree(0) == 0:
            continue
        r = resultant(f, g, 0)
        assert r.sparsity() <= math.factorial(2 * d) * s ** (2 * d)
        assert max(r.degrees(), default=0) <= 2 * d * d
        done += 1


def test_delta_k_bounds():
    F = build_extension(13, 1)
    rnd = random.Random(29)
    done = 0
    while done < 20:
        d = 2
        s = rnd.randint(2, 3)
        k = rnd.randint(1, 2)
        f = _random_poly(rnd, F, 1, d, s)
        if f.individual_degree(0) < 1:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            dk = delta_k(f, 0, k)
        assert dk.sparsity() <= math.factorial(2 * d) * (k * s) ** (2 * d)
        assert max(dk.degrees(), default=0) <= 2 * d * d
        done += 1


def test_discriminant_iff_squarefree(F11, P):
    # char comfortably above every degree here
    from sparsefactor.smallfac import squarefree_decomp

    cases = [
        P(F11, "x1^2 + 1"),
        P(F11, "x1 + 3") ** 2,
        P(F11, "x1^2 + x2", n=2) * P(F11, "x1 + x2"),
        (P(F11, "x1 + x2") ** 2) * P(F11, "x1 + 1", n=2),
    ]
    for f in cases:
        dec = squarefree_decomp(f, 0)
        is_squarefree = all(e == 1 for _, e in dec)
        assert (not discriminant(f, 0).is_zero()) == is_squarefree
