"""Field construction and arithmetic."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsefactor.errors import DivisionByZero, NotPrime, SizeOverflow
from sparsefactor.ff import (
    FieldDesc,
    build_extension,
    extension_of,
    field_arith,
    is_prime,
    next_prime,
)


def test_prime_field_basics(F5):
    assert F5.p == 5 and F5.k == 1 and F5.size == 5
    assert F5.modulus is None
    assert F5.add(2, 4) == 1
    assert F5.inv(2) == 3
    assert F5.mul(2, 3) == 1
    assert F5.neg(0) == 0
    assert F5.sub(1, 3) == 3


def test_f4_arithmetic():
    F4 = build_extension(2, 2)
    # elements are integer codes: 2 encodes t, 3 encodes t + 1
    assert F4.modulus == (1, 1, 1)
    assert F4.mul(2, 2) == 3
    assert F4.add(2, 3) == 1
    assert F4.inv(2) == 3


def test_f9_modulus_is_first_irreducible():
    # monic quadratics over F_3 ordered by coefficient tuple: t^2 + 1 wins
    F9 = build_extension(3, 2)
    assert F9.modulus == (1, 0, 1)
    # independent check: no root in F_3
    for a in range(3):
        assert (a * a + 1) % 3 != 0


def test_builds_are_deterministic():
    a = build_extension(2, 5)
    b = build_extension(2, 5)
    assert a == b
    assert a.modulus == b.modulus
    assert a.to_json() == b.to_json()


def test_not_prime_rejected():
    with pytest.raises(NotPrime):
        build_extension(4, 1)
    with pytest.raises(NotPrime):
        build_extension(1, 2)


def test_size_overflow_rejected():
    with pytest.raises(SizeOverflow):
        build_extension(2, 50)


def test_division_by_zero():
    F5 = build_extension(5, 1)
    with pytest.raises(DivisionByZero):
        F5.inv(0)


@pytest.mark.parametrize("p,k", [(5, 1), (2, 2), (3, 2), (7, 1), (2, 3)])
def test_fermat_all_elements(p, k):
    F = build_extension(p, k)
    for a in F.elements():
        if a == 0:
            continue
        assert F.pow(a, F.size - 1) == 1
        assert F.mul(a, F.inv(a)) == 1


def test_char_class_threshold():
    F5 = build_extension(5, 1)
    F2 = build_extension(2, 1)
    assert F5.char_class(2) == "LARGE"      # 5 > 4
    assert F5.char_class(3) == "SMALL"      # 5 <= 6
    assert F2.char_class(1) == "SMALL"
    assert build_extension(11, 1).char_class(2) == "LARGE"


def test_field_arith_dispatch(F7):
    assert field_arith(F7, 3, 5, "add") == 1
    assert field_arith(F7, 3, 5, "sub") == 5
    assert field_arith(F7, 3, 5, "mul") == 1
    assert field_arith(F7, 3, 5, "div") == 2
    with pytest.raises(ValueError):
        field_arith(F7, 3, 5, "xor")


def test_of_int_reduces_mod_p(F5):
    assert F5.of_int(12) == 2
    assert F5.of_int(-1) == 4


def test_extension_of_prime_field(F5):
    E = extension_of(F5, 2)
    assert E.p == 5 and E.k == 2 and E.size == 25


@given(st.integers(min_value=2, max_value=500))
def test_next_prime_is_prime_and_minimal(n):
    # strictly greater than n, and nothing prime in between
    q = next_prime(n)
    assert q > n and is_prime(q)
    assert all(not is_prime(t) for t in range(n + 1, q))


@settings(max_examples=60)
@given(st.integers(min_value=0, max_value=24), st.integers(min_value=0, max_value=24))
def test_f25_ring_axioms(a, b):
    F = build_extension(5, 2)
    assert F.add(a, b) == F.add(b, a)
    assert F.mul(a, b) == F.mul(b, a)
    assert F.sub(F.add(a, b), b) == a
    if b != 0:
        assert F.mul(F.div(a, b), b) == a


def test_repr_and_hash_stable():
    F = build_extension(3, 2)
    assert hash(F) == hash(build_extension(3, 2))
    assert isinstance(repr(F), str)
    assert isinstance(F, FieldDesc)
