"""Finite field arithmetic for F_q, q = p^k <= 27, through lookup tables."""

import itertools
from typing import NamedTuple, Optional, Sequence

import numpy as np
from cachetools import LRUCache, cached

from core.errors import (
    DegreeMismatchError,
    NotPrimeError,
    OrderTooLargeError,
    OutOfRangeError,
    ReducibleModulusError,
    ZeroInverseError,
)
from core.logger import logger
from models import FieldSpec

MAX_ORDER = 27

FieldElement = int


def is_prime(n: int) -> bool:
    """Trial-division primality test."""
    if n < 2:
        return False
    return all(n % d for d in range(2, int(n**0.5) + 1))


def _poly_rem(num: Sequence[int], den: Sequence[int], p: int) -> list[int]:
    """Remainder of num / den over F_p, both highest degree first, den monic."""
    rem = list(num)
    shift = len(rem) - len(den)
    for i in range(shift + 1):
        lead = rem[i] % p
        if lead:
            for j, coeff in enumerate(den):
                rem[i + j] = (rem[i + j] - lead * coeff) % p
    return [c % p for c in rem[shift + 1 :]] if shift >= 0 else [c % p for c in rem]


def monic_polynomials(p: int, degree: int):
    """Yield monic polynomials of a degree in lexicographic order (highest first)."""
    for tail in itertools.product(range(p), repeat=degree):
        yield (1, *tail)


def is_irreducible(poly: Sequence[int], p: int) -> bool:
    """
    Exhaustive irreducibility test over F_p.

    Parameters
    ----------
    poly : Sequence[int]
        Monic polynomial, highest degree first
    p : int
        Characteristic

    Returns
    -------
    bool
        True when no monic polynomial of degree 1..deg/2 divides poly
    """
    degree = len(poly) - 1
    if degree < 1:
        return False
    for d in range(1, degree // 2 + 1):
        for divisor in monic_polynomials(p, d):
            if not any(_poly_rem(poly, divisor, p)):
                return False
    return True


@cached(cache=LRUCache(maxsize=64))
def smallest_irreducible(p: int, k: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible polynomial of degree k over F_p."""
    for poly in monic_polynomials(p, k):
        if is_irreducible(poly, p):
            return poly
    raise ReducibleModulusError(f"No irreducible polynomial of degree {k} over F_{p}")


def make_field(p: int, k: int = 1, modulus: Optional[Sequence[int]] = None) -> FieldSpec:
    """
    Build a validated field specification.

    Parameters
    ----------
    p : int
        Prime characteristic
    k : int
        Extension degree, at least 1
    modulus : Sequence[int], optional
        Monic modulus of degree k, highest degree first. Ignored for k = 1.
        When omitted the lexicographically smallest irreducible is used.

    Returns
    -------
    FieldSpec
        The field

    Raises
    ------
    NotPrimeError
        p is not prime
    OrderTooLargeError
        p^k exceeds 27
    DegreeMismatchError
        modulus has the wrong degree or is not monic
    ReducibleModulusError
        modulus factors over F_p
    """
    if not is_prime(p):
        raise NotPrimeError(f"{p} is not prime")
    if k < 1:
        raise DegreeMismatchError(f"Extension degree must be at least 1, got {k}")
    q = p**k
    if q > MAX_ORDER:
        raise OrderTooLargeError(f"q = {p}^{k} = {q} exceeds {MAX_ORDER}")
    if k == 1:
        return FieldSpec(p=p, k=1, q=q)

    if modulus is None:
        poly = smallest_irreducible(p, k)
    else:
        poly = tuple(int(c) % p for c in modulus)
        if len(poly) != k + 1 or poly[0] != 1:
            raise DegreeMismatchError(f"Modulus {list(modulus)} is not monic of degree {k}")
        if not is_irreducible(poly, p):
            raise ReducibleModulusError(f"Modulus {list(modulus)} is reducible over F_{p}")
    return FieldSpec(p=p, k=k, q=q, modulus=poly)


def field_from_order(text: str) -> FieldSpec:
    """Parse "p^k" or a plain prime power "q" into a field with the default modulus."""
    text = str(text).strip()
    try:
        if "^" in text:
            base, exponent = text.split("^", 1)
            return make_field(int(base), int(exponent))
        q = int(text)
    except ValueError as e:
        raise NotPrimeError(f"Cannot parse field order {text!r}") from e
    if q > MAX_ORDER:
        raise OrderTooLargeError(f"q = {q} exceeds {MAX_ORDER}")
    for p in range(2, q + 1):
        if q % p == 0:
            k, rest = 0, q
            while rest % p == 0:
                rest //= p
                k += 1
            if rest != 1:
                raise NotPrimeError(f"{q} is not a prime power")
            return make_field(p, k)
    raise NotPrimeError(f"{q} is not a prime power")


class FieldTables(NamedTuple):
    """Dense lookup tables of one field, indexed by element value."""

    add: np.ndarray
    sub: np.ndarray
    neg: np.ndarray
    mul: np.ndarray
    inv: np.ndarray  # inv[0] = -1
    digits: np.ndarray  # digits[x, i] = coefficient of x^i


def _digits(value: int, p: int, k: int) -> list[int]:
    return [(value // p**i) % p for i in range(k)]


def _from_digits(digits: Sequence[int], p: int) -> int:
    return sum(int(d) * p**i for i, d in enumerate(digits))


def _poly_mul(a: Sequence[int], b: Sequence[int], field: FieldSpec) -> list[int]:
    """Multiply two elements given as coefficient lists, lowest degree first."""
    p, k = field.p, field.k
    prod = [0] * (2 * k - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] = (prod[i + j] + x * y) % p
    # x^k = -(m_{k-1} x^{k-1} + ... + m_0)
    reduction = [(-c) % p for c in reversed(field.modulus[1:])]
    for deg in range(2 * k - 2, k - 1, -1):
        lead = prod[deg]
        if lead:
            prod[deg] = 0
            for i, c in enumerate(reduction):
                prod[deg - k + i] = (prod[deg - k + i] + lead * c) % p
    return prod[:k]


@cached(cache=LRUCache(maxsize=64))
def tables(field: FieldSpec) -> FieldTables:
    """Build (once per field) the add/sub/neg/mul/inv tables."""
    p, k, q = field.p, field.k, field.q
    digits = np.array([_digits(x, p, k) for x in range(q)], dtype=np.int64)
    weights = p ** np.arange(k, dtype=np.int64)

    add = ((digits[:, None, :] + digits[None, :, :]) % p) @ weights
    sub = ((digits[:, None, :] - digits[None, :, :]) % p) @ weights
    neg = ((-digits) % p) @ weights

    if k == 1:
        values = np.arange(q, dtype=np.int64)
        mul = np.outer(values, values) % p
    else:
        mul = np.zeros((q, q), dtype=np.int64)
        for x in range(q):
            for y in range(x, q):
                mul[x, y] = mul[y, x] = _from_digits(_poly_mul(digits[x], digits[y], field), p)

    inv = np.full(q, -1, dtype=np.int64)
    rows, cols = np.nonzero(mul == 1)
    inv[rows] = cols
    logger.debug(f"Built lookup tables for F_{q} (p={p}, k={k}, modulus={field.modulus})")
    return FieldTables(add=add, sub=sub, neg=neg, mul=mul, inv=inv, digits=digits)


def add(x: FieldElement, y: FieldElement, field: FieldSpec) -> FieldElement:
    return int(tables(field).add[x, y])


def sub(x: FieldElement, y: FieldElement, field: FieldSpec) -> FieldElement:
    return int(tables(field).sub[x, y])


def neg(x: FieldElement, field: FieldSpec) -> FieldElement:
    return int(tables(field).neg[x])


def mul(x: FieldElement, y: FieldElement, field: FieldSpec) -> FieldElement:
    return int(tables(field).mul[x, y])


def inv(x: FieldElement, field: FieldSpec) -> FieldElement:
    """
    Multiplicative inverse.

    Raises
    ------
    ZeroInverseError
        x is zero
    """
    if x == 0:
        raise ZeroInverseError(f"0 has no inverse in F_{field.q}")
    return int(tables(field).inv[x])


def power(x: FieldElement, n: int, field: FieldSpec) -> FieldElement:
    """x^n by square-and-multiply; negative n goes through the inverse."""
    if n < 0:
        return power(inv(x, field), -n, field)
    mul_table = tables(field).mul
    result, base = 1, x
    while n:
        if n & 1:
            result = int(mul_table[result, base])
        base = int(mul_table[base, base])
        n >>= 1
    return result


def frobenius(x: FieldElement, field: FieldSpec) -> FieldElement:
    return power(x, field.p, field)


def elements(field: FieldSpec) -> range:
    return range(field.q)


def prime_subfield(field: FieldSpec) -> list[FieldElement]:
    """Values of the copy of F_p inside F_q (the constants)."""
    return list(range(field.p))


def encode(x: FieldElement, field: FieldSpec) -> int:
    if not 0 <= x < field.q:
        raise OutOfRangeError(f"{x} is not an element of F_{field.q}")
    return int(x)


def decode(value: int, field: FieldSpec) -> FieldElement:
    return encode(value, field)
