"""The ring M2(F_q): scalar matrices, index-array kernels and subspace tables."""

from typing import NamedTuple, Sequence

import numpy as np
from cachetools import LRUCache, cached

from core import gf
from core.errors import FormatError, RankMismatchError, SingularError
from core.gf import FieldElement
from models import CompatibilityTag, FieldSpec


class Mat2(NamedTuple):
    """
    A 2x2 matrix over F_q, entries stored as field element values.

    Attributes
    ----------
    m11, m12, m21, m22 : int
        Entries in row-major order
    """

    m11: FieldElement
    m12: FieldElement
    m21: FieldElement
    m22: FieldElement

    def index(self, field: FieldSpec) -> int:
        """Canonical index ((m11 q + m12) q + m21) q + m22 in [0, q^4)."""
        q = field.q
        return ((self.m11 * q + self.m12) * q + self.m21) * q + self.m22

    @classmethod
    def from_index(cls, index: int, field: FieldSpec) -> "Mat2":
        q = field.q
        index, m22 = divmod(int(index), q)
        index, m21 = divmod(index, q)
        m11, m12 = divmod(index, q)
        return cls(m11, m12, m21, m22)

    @classmethod
    def identity(cls) -> "Mat2":
        return cls(1, 0, 0, 1)

    @classmethod
    def zero(cls) -> "Mat2":
        return cls(0, 0, 0, 0)

    @classmethod
    def scalar(cls, value: FieldElement) -> "Mat2":
        return cls(value, 0, 0, value)

    @classmethod
    def parse(cls, line: str, field: FieldSpec) -> "Mat2":
        """Parse the text format "m11,m12,m21,m22"."""
        try:
            values = [int(v) for v in line.strip().split(",")]
        except ValueError as e:
            raise FormatError(f"Malformed matrix line {line!r}") from e
        if len(values) != 4 or not all(0 <= v < field.q for v in values):
            raise FormatError(f"Malformed matrix line {line!r} for F_{field.q}")
        return cls(*values)

    def format(self) -> str:
        return f"{self.m11},{self.m12},{self.m21},{self.m22}"

    def rows(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return (self.m11, self.m12), (self.m21, self.m22)


class Block2x4(NamedTuple):
    """The 2x4 matrix t = (left right) of two stacked-side-by-side 2x2 blocks."""

    left: Mat2
    right: Mat2

    def rows(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        a, e = self.left, self.right
        return (a.m11, a.m12, e.m11, e.m12), (a.m21, a.m22, e.m21, e.m22)


def det(m: Mat2, field: FieldSpec) -> FieldElement:
    """m11 m22 - m12 m21."""
    return gf.sub(gf.mul(m.m11, m.m22, field), gf.mul(m.m12, m.m21, field), field)


def add(x: Mat2, y: Mat2, field: FieldSpec) -> Mat2:
    return Mat2(*(gf.add(a, b, field) for a, b in zip(x, y)))


def subtract(x: Mat2, y: Mat2, field: FieldSpec) -> Mat2:
    return Mat2(*(gf.sub(a, b, field) for a, b in zip(x, y)))


def negate(x: Mat2, field: FieldSpec) -> Mat2:
    return Mat2(*(gf.neg(a, field) for a in x))


def multiply(x: Mat2, y: Mat2, field: FieldSpec) -> Mat2:
    """Matrix product xy."""
    m, s = gf.mul, gf.add
    return Mat2(
        s(m(x.m11, y.m11, field), m(x.m12, y.m21, field), field),
        s(m(x.m11, y.m12, field), m(x.m12, y.m22, field), field),
        s(m(x.m21, y.m11, field), m(x.m22, y.m21, field), field),
        s(m(x.m21, y.m12, field), m(x.m22, y.m22, field), field),
    )


def inverse(m: Mat2, field: FieldSpec) -> Mat2:
    """
    Inverse of an invertible matrix via the adjugate.

    Raises
    ------
    SingularError
        det(m) = 0
    """
    d = det(m, field)
    if d == 0:
        raise SingularError(f"Matrix {m.format()} is singular over F_{field.q}")
    d_inv = gf.inv(d, field)
    return Mat2(
        gf.mul(m.m22, d_inv, field),
        gf.mul(gf.neg(m.m12, field), d_inv, field),
        gf.mul(gf.neg(m.m21, field), d_inv, field),
        gf.mul(m.m11, d_inv, field),
    )


def is_invertible(m: Mat2, field: FieldSpec) -> bool:
    return det(m, field) != 0


def _scale_row(row: Sequence[int], factor: int, field: FieldSpec) -> tuple[int, ...]:
    return tuple(gf.mul(factor, v, field) for v in row)


def _row_factor(first: Sequence[int], second: Sequence[int], field: FieldSpec):
    """Return alpha with second = alpha * first, or None; first must be nonzero."""
    pivot = next(j for j, v in enumerate(first) if v)
    alpha = gf.mul(second[pivot], gf.inv(first[pivot], field), field)
    return alpha if _scale_row(first, alpha, field) == tuple(second) else None


def rank_rows(rows: Sequence[Sequence[int]], field: FieldSpec) -> int:
    """Row rank of a two-row matrix by direct case analysis."""
    r1, r2 = rows
    nonzero = [r for r in (r1, r2) if any(r)]
    if not nonzero:
        return 0
    if len(nonzero) == 1:
        return 1
    return 1 if _row_factor(r1, r2, field) is not None else 2


def rank(m: Mat2, field: FieldSpec) -> int:
    return rank_rows(m.rows(), field)


def rank2x4(t: Block2x4, field: FieldSpec) -> int:
    """
    Row rank of the 2x4 block matrix t over F_q.

    Zero matrix, one nonzero row or proportional rows give the answer
    without elimination.
    """
    return rank_rows(t.rows(), field)


def proportionality_class(t: Block2x4, c_bar: Mat2, field: FieldSpec) -> CompatibilityTag:
    """
    Compare the row-factor structure of a rank-one block with c_bar.

    A rank-one t factors as u (x) r with u a row-factor vector. Anchoring on
    the lowest-index nonzero row of t, u = (1, alpha) or u = (0, 1). The
    right-hand side is compatible when every row j of c_bar equals u_j times
    its anchor row, which covers the zero matrix.

    Parameters
    ----------
    t : Block2x4
        The block (a_bar e_bar), of rank one
    c_bar : Mat2
        The difference c - c'
    field : FieldSpec
        Field

    Returns
    -------
    CompatibilityTag
        SAME_FACTOR or INCOMPATIBLE

    Raises
    ------
    RankMismatchError
        rank2x4(t) != 1
    """
    if rank2x4(t, field) != 1:
        raise RankMismatchError("Row-factor comparison needs a rank-one block")
    t1, t2 = t.rows()
    if any(t1):
        anchor, factor = 0, (1, _row_factor(t1, t2, field))
    else:
        anchor, factor = 1, (0, 1)
    c_rows = c_bar.rows()
    anchor_row = c_rows[anchor]
    for j in (0, 1):
        if tuple(c_rows[j]) != _scale_row(anchor_row, factor[j], field):
            return CompatibilityTag.INCOMPATIBLE
    return CompatibilityTag.SAME_FACTOR


# Vectorised kernels over arrays of matrix indices.


def split(indices, field: FieldSpec):
    """Entry arrays (m11, m12, m21, m22) of an index array."""
    q = field.q
    rest, m22 = np.divmod(np.asarray(indices, dtype=np.int64), q)
    rest, m21 = np.divmod(rest, q)
    m11, m12 = np.divmod(rest, q)
    return m11, m12, m21, m22


def join(m11, m12, m21, m22, field: FieldSpec) -> np.ndarray:
    q = field.q
    return ((m11 * q + m12) * q + m21) * q + m22


def mat_add(x, y, field: FieldSpec) -> np.ndarray:
    add_t = gf.tables(field).add
    a, b = split(x, field), split(y, field)
    return join(*(add_t[u, v] for u, v in zip(a, b)), field)


def mat_sub(x, y, field: FieldSpec) -> np.ndarray:
    sub_t = gf.tables(field).sub
    a, b = split(x, field), split(y, field)
    return join(*(sub_t[u, v] for u, v in zip(a, b)), field)


def mat_neg(x, field: FieldSpec) -> np.ndarray:
    neg_t = gf.tables(field).neg
    return join(*(neg_t[u] for u in split(x, field)), field)


def mat_mul(x, y, field: FieldSpec) -> np.ndarray:
    """Elementwise (broadcasting) matrix products of two index arrays."""
    t = gf.tables(field)
    add_t, mul_t = t.add, t.mul
    a11, a12, a21, a22 = split(x, field)
    b11, b12, b21, b22 = split(y, field)
    return join(
        add_t[mul_t[a11, b11], mul_t[a12, b21]],
        add_t[mul_t[a11, b12], mul_t[a12, b22]],
        add_t[mul_t[a21, b11], mul_t[a22, b21]],
        add_t[mul_t[a21, b12], mul_t[a22, b22]],
        field,
    )


def mat_det(x, field: FieldSpec) -> np.ndarray:
    t = gf.tables(field)
    m11, m12, m21, m22 = split(x, field)
    return t.sub[t.mul[m11, m22], t.mul[m12, m21]]


def mat_inverse(x, field: FieldSpec) -> np.ndarray:
    """
    Inverses of an index array.

    Raises
    ------
    SingularError
        Any entry is singular
    """
    t = gf.tables(field)
    m11, m12, m21, m22 = split(x, field)
    d = t.sub[t.mul[m11, m22], t.mul[m12, m21]]
    if np.any(d == 0):
        raise SingularError("Cannot invert a set containing singular matrices")
    d_inv = t.inv[d]
    return join(
        t.mul[m22, d_inv],
        t.mul[t.neg[m12], d_inv],
        t.mul[t.neg[m21], d_inv],
        t.mul[m11, d_inv],
        field,
    )


def transpose(x, field: FieldSpec) -> np.ndarray:
    m11, m12, m21, m22 = split(x, field)
    return join(m11, m21, m12, m22, field)


def scalar_index(value: FieldElement, field: FieldSpec) -> int:
    return Mat2.scalar(value).index(field)


def identity_index(field: FieldSpec) -> int:
    return Mat2.identity().index(field)


def all_matrices(field: FieldSpec) -> np.ndarray:
    return np.arange(field.q**4, dtype=np.int64)


@cached(cache=LRUCache(maxsize=16))
def det_table(field: FieldSpec) -> np.ndarray:
    """det of every matrix, indexed by matrix index."""
    return mat_det(all_matrices(field), field)


def gl2_indices(field: FieldSpec) -> np.ndarray:
    return np.flatnonzero(det_table(field) != 0)


def singular_indices(field: FieldSpec) -> np.ndarray:
    return np.flatnonzero(det_table(field) == 0)


# Subspaces of F_q^2: 0 is {0}, 1..q+1 are lines, q+2 is the plane.


def plane_id(field: FieldSpec) -> int:
    return field.q + 2


def subspace_dim(ids, field: FieldSpec) -> np.ndarray:
    ids = np.asarray(ids)
    return np.where(ids == 0, 0, np.where(ids == plane_id(field), 2, 1))


def line_id(v0, v1, field: FieldSpec) -> np.ndarray:
    """Line through the vector (v0, v1); 0 for the zero vector."""
    t = gf.tables(field)
    v0, v1 = np.asarray(v0), np.asarray(v1)
    slope = t.mul[v1, np.where(v0 != 0, t.inv[v0], 0)]
    return np.where(v0 != 0, 1 + slope, np.where(v1 != 0, field.q + 1, 0))


def line_direction(ids, field: FieldSpec):
    """A spanning vector (d0, d1) of each line id."""
    ids = np.asarray(ids)
    vertical = ids == field.q + 1
    return np.where(vertical, 0, 1), np.where(vertical, 1, ids - 1)


def join_subspaces(s1, s2, field: FieldSpec) -> np.ndarray:
    s1, s2 = np.asarray(s1), np.asarray(s2)
    plane = plane_id(field)
    return np.where(
        s1 == 0, s2, np.where(s2 == 0, s1, np.where(s1 == s2, s1, plane))
    )


def _span_of_two(u0, u1, w0, w1, field: FieldSpec, rank_two) -> np.ndarray:
    first = line_id(u0, u1, field)
    second = line_id(w0, w1, field)
    spanned = np.where(first != 0, first, second)
    return np.where(rank_two, plane_id(field), spanned)


@cached(cache=LRUCache(maxsize=16))
def subspace_tables(field: FieldSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Rank, row space and column space of every matrix.

    Returns
    -------
    tuple[np.ndarray, np.ndarray, np.ndarray]
        rank[m], row_space[m], col_space[m] indexed by matrix index
    """
    m11, m12, m21, m22 = split(all_matrices(field), field)
    invertible = det_table(field) != 0
    row_space = _span_of_two(m11, m12, m21, m22, field, invertible)
    col_space = _span_of_two(m11, m21, m12, m22, field, invertible)
    ranks = subspace_dim(row_space, field)
    return ranks, row_space, col_space
