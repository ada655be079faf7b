"""Finite field tests."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core import gf
from core.errors import (
    DegreeMismatchError,
    NotPrimeError,
    OrderTooLargeError,
    OutOfRangeError,
    ReducibleModulusError,
    ZeroInverseError,
)

SUPPORTED = [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2), (2, 4), (3, 3)]


def test_f4_default_modulus(f4):
    """F_4 uses x^2 + x + 1."""
    assert f4.modulus == (1, 1, 1)
    assert f4.q == 4


def test_f4_inverse(f4):
    """x (x + 1) = 1 in F_4."""
    assert gf.inv(2, f4) == 3
    assert gf.mul(2, 3, f4) == 1


@pytest.mark.parametrize("p,k", SUPPORTED)
def test_inverses_exhaustive(p, k):
    """Every nonzero element has an inverse."""
    field = gf.make_field(p, k)
    for x in range(1, field.q):
        assert gf.mul(x, gf.inv(x, field), field) == 1


@pytest.mark.parametrize("p,k", SUPPORTED)
def test_frobenius_fixes_prime_field(p, k):
    """x^p = x exactly on the prime subfield; x^q = x everywhere."""
    field = gf.make_field(p, k)
    for x in gf.prime_subfield(field):
        assert gf.frobenius(x, field) == x
    for x in gf.elements(field):
        assert gf.power(x, field.q, field) == x


@settings(max_examples=200)
@given(
    st.sampled_from(SUPPORTED),
    st.integers(min_value=0, max_value=26),
    st.integers(min_value=0, max_value=26),
    st.integers(min_value=0, max_value=26),
)
def test_field_axioms(pk, x, y, z):
    """Commutativity, associativity and distributivity."""
    field = gf.make_field(*pk)
    x, y, z = x % field.q, y % field.q, z % field.q
    assert gf.add(x, y, field) == gf.add(y, x, field)
    assert gf.mul(x, y, field) == gf.mul(y, x, field)
    assert gf.mul(gf.mul(x, y, field), z, field) == gf.mul(x, gf.mul(y, z, field), field)
    assert gf.mul(x, gf.add(y, z, field), field) == gf.add(
        gf.mul(x, y, field), gf.mul(x, z, field), field
    )
    assert gf.add(x, gf.neg(x, field), field) == 0
    assert gf.sub(x, y, field) == gf.add(x, gf.neg(y, field), field)


def test_zero_has_no_inverse(f3):
    with pytest.raises(ZeroInverseError):
        gf.inv(0, f3)


def test_negative_power(f5):
    assert gf.power(2, -1, f5) == 3


@pytest.mark.parametrize(
    "p,k,error",
    [(4, 1, NotPrimeError), (2, 5, OrderTooLargeError), (29, 1, OrderTooLargeError)],
)
def test_make_field_rejects(p, k, error):
    with pytest.raises(error):
        gf.make_field(p, k)


def test_reducible_modulus():
    """x^2 + 1 = (x + 1)^2 over F_2."""
    with pytest.raises(ReducibleModulusError):
        gf.make_field(2, 2, modulus=(1, 0, 1))


def test_modulus_degree():
    with pytest.raises(DegreeMismatchError):
        gf.make_field(3, 2, modulus=(1, 0, 0, 1))


def test_irreducibility():
    assert gf.is_irreducible((1, 1, 1), 2)
    assert not gf.is_irreducible((1, 0, 1), 2)
    assert gf.is_irreducible((1, 0, 1), 3)
    # x^4 + x^2 + 1 = (x^2 + x + 1)^2 has no roots but is reducible
    assert not gf.is_irreducible((1, 0, 1, 0, 1), 2)


@pytest.mark.parametrize(
    "text,q",
    [("2", 2), ("3", 3), ("4", 4), ("2^2", 4), ("3^2", 9), ("27", 27), ("3^3", 27)],
)
def test_field_from_order(text, q):
    assert gf.field_from_order(text).q == q


@pytest.mark.parametrize("text", ["6", "1", "abc", "12"])
def test_field_from_order_rejects(text):
    with pytest.raises(NotPrimeError):
        gf.field_from_order(text)


def test_encode_range(f3):
    assert gf.decode(gf.encode(2, f3), f3) == 2
    with pytest.raises(OutOfRangeError):
        gf.encode(3, f3)
    with pytest.raises(OutOfRangeError):
        gf.decode(-1, f3)
