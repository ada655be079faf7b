"""Set algebra tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core import gf, mat2
from core.errors import FieldMismatchError, NotInvertibleSetError, OutOfRangeError
from core.mat2 import Mat2
from core.setalg import (
    MatSet,
    additive_energy,
    convolve,
    count_I,
    count_I_bruteforce,
    count_J,
    count_J_bruteforce,
    count_sum_times_collisions,
    difference,
    energy_bruteforce,
    indicator,
    intersection,
    multiplicative_energy,
    rep_AB_plus_C,
    rep_function,
    set_inverse,
    set_neg,
    set_prod,
    set_sum,
    translate,
    union,
)
from models import Op


def random_set(field, size, seed):
    rng = np.random.default_rng(seed)
    return MatSet(field, rng.choice(field.q**4, size=size, replace=False))


def index_sets(q: int, max_size: int = 12):
    return st.lists(st.integers(min_value=0, max_value=q**4 - 1), min_size=1, max_size=max_size)


def test_full_sets(f2):
    full = MatSet.full(f2)
    assert len(full) == 16
    assert set_sum(full, full) == full
    assert len(MatSet.gl2(f2)) == 6


def test_group_energy(f2):
    """GL2(F_2) is a group of order 6, so E_x = 6^3."""
    assert multiplicative_energy(MatSet.gl2(f2)) == 216


@settings(max_examples=100, deadline=None)
@given(index_sets(3), index_sets(3))
def test_moment_identities(a, b):
    """sum r = |A||B| and the Cauchy-Schwarz lower bound on the energy."""
    field = gf.make_field(3)
    A, B = MatSet(field, a), MatSet(field, b)
    for op in (Op.ADD, Op.MUL):
        r = rep_function(A, B, op)
        assert r.total == len(A) * len(B)
        image = len(r.support())
        assert r.second_moment() * image >= (len(A) * len(B)) ** 2


@pytest.mark.parametrize("op", [Op.ADD, Op.MUL])
def test_energy_matches_quadruple_loop(op, f2):
    A, B = random_set(f2, 5, 1), random_set(f2, 4, 2)
    expected = energy_bruteforce(A, B, op)
    if op == Op.ADD:
        assert additive_energy(A, B) == expected
    else:
        assert multiplicative_energy(A, B) == expected


def test_image_is_support(f3):
    A, B = random_set(f3, 10, 3), random_set(f3, 7, 4)
    assert set_sum(A, B) == rep_function(A, B, Op.ADD).support()
    assert set_prod(A, B) == rep_function(A, B, Op.MUL).support()


def test_set_operations(f3):
    A, B = random_set(f3, 20, 5), random_set(f3, 20, 6)
    assert union(difference(A, B), intersection(A, B)) == A
    assert len(intersection(difference(A, B), B)) == 0
    assert set_neg(set_neg(A)) == A
    assert A.issubset(union(A, B))


def test_inverse_and_translate(f3):
    G = MatSet.gl2(f3)
    assert set_inverse(G) == G
    g = Mat2(1, 1, 0, 1)
    assert translate(G, g) == G
    assert translate(G, g, left=False) == G
    with pytest.raises(NotInvertibleSetError):
        set_inverse(MatSet.full(f3))


def test_field_mismatch(f2, f3):
    with pytest.raises(FieldMismatchError):
        set_sum(MatSet.full(f2), MatSet.full(f3))


def test_index_out_of_range(f2):
    with pytest.raises(OutOfRangeError):
        MatSet(f2, [0, 16])
    with pytest.raises(OutOfRangeError):
        MatSet(f2, np.array([-1, 3]))
    assert len(MatSet(f2, [15, 15, 0])) == 2


def test_membership(f2):
    A = MatSet.from_matrices(f2, [Mat2.identity(), Mat2.zero()])
    assert Mat2.identity() in A
    assert Mat2(1, 1, 0, 1) not in A
    assert len(A) == 2


@pytest.mark.parametrize("q", ["2", "3", "5"])
def test_convolution_against_direct(q):
    field = gf.field_from_order(q)
    A, B = random_set(field, 8, 10), random_set(field, 9, 11)
    assert np.array_equal(convolve(indicator(A), indicator(B)).counts, rep_function(A, B, Op.ADD).counts)


@pytest.mark.parametrize("order,sizes", [("3^3", (200, 150)), ("2^4", (1100, 40))])
def test_convolution_through_transform(order, sizes):
    """Large supports take the FFT path for odd p and the Walsh-Hadamard path for p = 2."""
    field = gf.field_from_order(order)
    A, B = random_set(field, sizes[0], 12), random_set(field, sizes[1], 13)
    assert np.array_equal(convolve(indicator(A), indicator(B)).counts, rep_function(A, B, Op.ADD).counts)


def test_count_I_full(f2):
    """Over the full ring, d is determined by (a, b, c, e, f)."""
    full = MatSet.full(f2)
    assert count_I(full, full, full, full, full, full) == 2**20


@pytest.mark.parametrize("seed", range(20))
def test_count_I_matches_enumeration(seed, f2):
    sets = [random_set(f2, 4, 6 * seed + i) for i in range(6)]
    assert count_I(*sets) == count_I_bruteforce(*sets)


@pytest.mark.parametrize("seed", range(5))
def test_count_J_matches_enumeration(seed, f3):
    sets = [random_set(f3, 6, 4 * seed + i) for i in range(4)]
    assert count_J(*sets) == count_J_bruteforce(*sets)


def test_count_J_full(f2):
    full = MatSet.full(f2)
    assert count_J(full, full, full, full) == 4096


def test_sum_product_collision_identity(f3):
    """sum t^2 = I(A, B, C, -C, -A, B)."""
    A, B, C = random_set(f3, 6, 20), random_set(f3, 5, 21), random_set(f3, 7, 22)
    t = rep_AB_plus_C(A, B, C)
    assert t.total == len(A) * len(B) * len(C)
    assert t.second_moment() == count_I(A, B, C, set_neg(C), set_neg(A), B)


def test_sum_times_collisions(f2):
    A, B, C = random_set(f2, 3, 30), random_set(f2, 3, 31), MatSet.gl2(f2)
    values = {}
    for a in A:
        for b in B:
            for c in C:
                key = mat2.multiply(mat2.add(a, b, f2), c, f2)
                values[key] = values.get(key, 0) + 1
    direct = sum(v * v for v in values.values())
    assert count_sum_times_collisions(A, B, C) == direct


def test_empty_sets(f2):
    empty = MatSet.empty(f2)
    full = MatSet.full(f2)
    assert count_I(empty, full, full, full, full, full) == 0
    assert multiplicative_energy(empty) == 0
    assert len(set_sum(empty, full)) == 0
