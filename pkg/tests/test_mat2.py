"""2x2 matrix tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core import gf, mat2
from core.errors import FormatError, RankMismatchError, SingularError
from core.mat2 import Block2x4, Mat2
from models import CompatibilityTag


def matrices(q: int):
    return st.integers(min_value=0, max_value=q**4 - 1)


@pytest.mark.parametrize("q,expected", [(2, 6), (3, 48), (4, 180), (5, 480)])
def test_gl2_order(q, expected):
    """|GL2(F_q)| = (q^2 - 1)(q^2 - q)."""
    field = gf.field_from_order(str(q))
    assert mat2.gl2_indices(field).size == expected
    assert mat2.singular_indices(field).size == q**4 - expected


def test_index_round_trip(f3):
    m = Mat2(1, 2, 0, 1)
    assert m.index(f3) == ((1 * 3 + 2) * 3 + 0) * 3 + 1
    assert Mat2.from_index(m.index(f3), f3) == m


@settings(max_examples=200)
@given(matrices(3), matrices(3))
def test_determinant_multiplicative(x, y):
    field = gf.make_field(3)
    a, b = Mat2.from_index(x, field), Mat2.from_index(y, field)
    assert mat2.det(mat2.multiply(a, b, field), field) == gf.mul(
        mat2.det(a, field), mat2.det(b, field), field
    )


@settings(max_examples=200)
@given(matrices(4), matrices(4), matrices(4))
def test_ring_axioms(x, y, z):
    """Associativity and both distributive laws over F_4."""
    field = gf.make_field(2, 2)
    a, b, c = (Mat2.from_index(i, field) for i in (x, y, z))
    mul, add = mat2.multiply, mat2.add
    assert mul(mul(a, b, field), c, field) == mul(a, mul(b, c, field), field)
    assert mul(a, add(b, c, field), field) == add(mul(a, b, field), mul(a, c, field), field)
    assert mul(add(a, b, field), c, field) == add(mul(a, c, field), mul(b, c, field), field)


def test_inverse_exhaustive(f3):
    identity = Mat2.identity()
    for index in mat2.gl2_indices(f3):
        m = Mat2.from_index(index, f3)
        assert mat2.multiply(m, mat2.inverse(m, f3), f3) == identity


def test_inverse_of_singular(f2):
    with pytest.raises(SingularError):
        mat2.inverse(Mat2(1, 1, 1, 1), f2)


def test_vectorised_matches_scalar(f4):
    rng = np.random.default_rng(7)
    x = rng.integers(0, 256, size=200)
    y = rng.integers(0, 256, size=200)
    products = mat2.mat_mul(x, y, f4)
    sums = mat2.mat_add(x, y, f4)
    for i in range(200):
        a, b = Mat2.from_index(x[i], f4), Mat2.from_index(y[i], f4)
        assert products[i] == mat2.multiply(a, b, f4).index(f4)
        assert sums[i] == mat2.add(a, b, f4).index(f4)


def test_vectorised_inverse(f5):
    units = mat2.gl2_indices(f5)
    inverses = mat2.mat_inverse(units, f5)
    assert np.all(mat2.mat_mul(units, inverses, f5) == mat2.identity_index(f5))


@pytest.mark.parametrize(
    "m,r",
    [(Mat2.zero(), 0), (Mat2(1, 0, 0, 0), 1), (Mat2(1, 2, 2, 1), 1), (Mat2(1, 2, 0, 1), 2)],
)
def test_rank(m, r, f3):
    assert mat2.rank(m, f3) == r


def test_rank_table_agrees(f3):
    ranks, _, _ = mat2.subspace_tables(f3)
    for index in range(81):
        assert ranks[index] == mat2.rank(Mat2.from_index(index, f3), f3)


def test_rank2x4(f3):
    assert mat2.rank2x4(Block2x4(Mat2.zero(), Mat2.zero()), f3) == 0
    assert mat2.rank2x4(Block2x4(Mat2(1, 0, 0, 0), Mat2.zero()), f3) == 1
    assert mat2.rank2x4(Block2x4(Mat2(1, 0, 0, 0), Mat2(0, 0, 0, 1)), f3) == 2


def test_proportionality(f3):
    t = Block2x4(Mat2(1, 0, 2, 0), Mat2.zero())
    assert mat2.proportionality_class(t, Mat2(1, 1, 2, 2), f3) == CompatibilityTag.SAME_FACTOR
    assert mat2.proportionality_class(t, Mat2.zero(), f3) == CompatibilityTag.SAME_FACTOR
    assert mat2.proportionality_class(t, Mat2(1, 1, 1, 1), f3) == CompatibilityTag.INCOMPATIBLE
    with pytest.raises(RankMismatchError):
        mat2.proportionality_class(Block2x4(Mat2.identity(), Mat2.zero()), Mat2.zero(), f3)


def test_column_space_of_rank_one(f3):
    _, row_space, col_space = mat2.subspace_tables(f3)
    m = Mat2(1, 2, 2, 1).index(f3)
    # columns are multiples of (1, 2), rows multiples of (1, 2)
    assert col_space[m] == mat2.line_id(1, 2, f3)
    assert row_space[m] == mat2.line_id(1, 2, f3)
    assert mat2.subspace_dim(col_space[Mat2.identity().index(f3)], f3) == 2


def test_parse_and_format(f3):
    assert Mat2.parse("1,2,0,1", f3) == Mat2(1, 2, 0, 1)
    assert Mat2(1, 2, 0, 1).format() == "1,2,0,1"
    for bad in ("1,2,0", "1,2,0,3", "a,b,c,d"):
        with pytest.raises(FormatError):
            Mat2.parse(bad, f3)
