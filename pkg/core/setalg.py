"""Set algebra on M2(F_q): sum and product sets, representation functions,
energies and the solution counters I and J."""

import itertools
from typing import Iterable, Iterator, Optional, Union

import numpy as np

from core import mat2
from core.errors import FieldMismatchError, NotInvertibleSetError, OutOfRangeError
from core.logger import logger
from core.mat2 import Mat2
from core.transform import (
    character_transform,
    exact_dot,
    exact_dtype,
    to_exact,
)
from models import FieldSpec, Op

PAIR_CHUNK = 1 << 22
NAIVE_CONVOLUTION_MAX_Q = 4
NAIVE_CONVOLUTION_BUDGET = 1 << 26


class MatSet:
    """
    A deduplicated set of matrices over one field.

    Parameters
    ----------
    field : FieldSpec
        The field
    indices : Iterable[int]
        Matrix indices in [0, q^4); duplicates are dropped
    """

    __slots__ = ("field", "indices", "_bitmap")

    def __init__(self, field: FieldSpec, indices: Iterable[int] = ()):
        self.field = field
        values = np.unique(np.fromiter((int(i) for i in indices), dtype=np.int64)
                           if not isinstance(indices, np.ndarray)
                           else indices.astype(np.int64).ravel())
        if values.size and (values[0] < 0 or values[-1] >= field.q**4):
            raise OutOfRangeError(f"Matrix index out of range for F_{field.q}")
        self.indices = values
        self._bitmap: Optional[np.ndarray] = None

    @classmethod
    def from_matrices(cls, field: FieldSpec, matrices: Iterable[Mat2]) -> "MatSet":
        return cls(field, np.array([m.index(field) for m in matrices], dtype=np.int64))

    @classmethod
    def from_bitmap(cls, field: FieldSpec, bitmap: np.ndarray) -> "MatSet":
        result = cls(field, np.flatnonzero(bitmap))
        result._bitmap = np.asarray(bitmap, dtype=bool)
        return result

    @classmethod
    def empty(cls, field: FieldSpec) -> "MatSet":
        return cls(field, np.empty(0, dtype=np.int64))

    @classmethod
    def full(cls, field: FieldSpec) -> "MatSet":
        return cls(field, mat2.all_matrices(field))

    @classmethod
    def gl2(cls, field: FieldSpec) -> "MatSet":
        return cls(field, mat2.gl2_indices(field))

    @property
    def bitmap(self) -> np.ndarray:
        """Membership indicator of length q^4."""
        if self._bitmap is None:
            bitmap = np.zeros(self.field.q**4, dtype=bool)
            bitmap[self.indices] = True
            self._bitmap = bitmap
        return self._bitmap

    def __len__(self) -> int:
        return int(self.indices.size)

    def __contains__(self, item: Union[Mat2, int]) -> bool:
        index = item.index(self.field) if isinstance(item, Mat2) else int(item)
        return 0 <= index < self.field.q**4 and bool(self.bitmap[index])

    def __iter__(self) -> Iterator[Mat2]:
        return (Mat2.from_index(i, self.field) for i in self.indices)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MatSet):
            return NotImplemented
        return self.field == other.field and np.array_equal(self.indices, other.indices)

    __hash__ = None

    def __repr__(self) -> str:
        return f"MatSet(q={self.field.q}, size={len(self)})"

    def members(self) -> list[Mat2]:
        return list(self)

    def issubset(self, other: "MatSet") -> bool:
        require_same_field(self, other)
        return bool(np.all(other.bitmap[self.indices]))

    def is_invertible(self) -> bool:
        """Every member lies in GL2."""
        return bool(np.all(mat2.det_table(self.field)[self.indices] != 0))


class FreqTable:
    """
    A frequency table counts[lambda] over M2(F_q).

    Parameters
    ----------
    field : FieldSpec
        The field
    counts : np.ndarray
        Nonnegative integer array of length q^4
    """

    __slots__ = ("field", "counts")

    def __init__(self, field: FieldSpec, counts: np.ndarray):
        self.field = field
        self.counts = counts

    def __getitem__(self, item: Union[Mat2, int]) -> int:
        index = item.index(self.field) if isinstance(item, Mat2) else int(item)
        return int(self.counts[index])

    @property
    def total(self) -> int:
        """Sum of all counts, the number of generating tuples."""
        if self.counts.dtype == object:
            return sum(int(c) for c in self.counts)
        return int(self.counts.sum())

    def support(self) -> MatSet:
        return MatSet(self.field, np.flatnonzero(self.counts != 0))

    def second_moment(self) -> int:
        return exact_dot(self.counts, self.counts)

    def items(self) -> Iterator[tuple[int, int]]:
        for index in np.flatnonzero(self.counts != 0):
            yield int(index), int(self.counts[index])


def require_same_field(*sets: Union[MatSet, FreqTable]) -> FieldSpec:
    field = sets[0].field
    for s in sets[1:]:
        if s.field != field:
            raise FieldMismatchError(
                f"Sets over F_{field.q} and F_{s.field.q} cannot be combined"
            )
    return field


def _combine(x, y, op: Op, field: FieldSpec) -> np.ndarray:
    if op == Op.ADD:
        return mat2.mat_add(x, y, field)
    return mat2.mat_mul(x, y, field)


def pair_results(A: MatSet, B: MatSet, op: Op) -> Iterator[np.ndarray]:
    """Yield a op b over A x B in chunks of flat index arrays."""
    field = require_same_field(A, B)
    if not len(A) or not len(B):
        return
    rows = max(1, PAIR_CHUNK // len(B))
    for start in range(0, len(A), rows):
        block = A.indices[start : start + rows]
        yield _combine(block[:, None], B.indices[None, :], op, field).ravel()


def set_sum(A: MatSet, B: MatSet) -> MatSet:
    """{a + b : a in A, b in B}."""
    return _image(A, B, Op.ADD)


def set_prod(A: MatSet, B: MatSet) -> MatSet:
    """{ab : a in A, b in B}, order-sensitive."""
    return _image(A, B, Op.MUL)


def _image(A: MatSet, B: MatSet, op: Op) -> MatSet:
    field = require_same_field(A, B)
    bitmap = np.zeros(field.q**4, dtype=bool)
    for chunk in pair_results(A, B, op):
        bitmap[chunk] = True
    return MatSet.from_bitmap(field, bitmap)


def set_neg(A: MatSet) -> MatSet:
    return MatSet(A.field, mat2.mat_neg(A.indices, A.field))


def set_inverse(A: MatSet) -> MatSet:
    """
    {a^-1 : a in A}.

    Raises
    ------
    NotInvertibleSetError
        A contains a singular matrix
    """
    if not A.is_invertible():
        raise NotInvertibleSetError("Set contains singular matrices")
    return MatSet(A.field, mat2.mat_inverse(A.indices, A.field))


def translate(A: MatSet, g: Mat2, left: bool = True) -> MatSet:
    """gA (or Ag when left is False)."""
    gi = g.index(A.field)
    if left:
        return MatSet(A.field, mat2.mat_mul(gi, A.indices, A.field))
    return MatSet(A.field, mat2.mat_mul(A.indices, gi, A.field))


def union(*sets: MatSet) -> MatSet:
    field = require_same_field(*sets)
    return MatSet(field, np.concatenate([s.indices for s in sets]))


def difference(A: MatSet, B: MatSet) -> MatSet:
    require_same_field(A, B)
    return MatSet(A.field, A.indices[~B.bitmap[A.indices]])


def intersection(A: MatSet, B: MatSet) -> MatSet:
    require_same_field(A, B)
    return MatSet(A.field, A.indices[B.bitmap[A.indices]])


def indicator(A: MatSet) -> FreqTable:
    return FreqTable(A.field, A.bitmap.astype(np.int64))


def rep_function(A: MatSet, B: MatSet, op: Op) -> FreqTable:
    """
    Representation function r(lambda) = |{(a, b) in A x B : a op b = lambda}|.

    Parameters
    ----------
    A, B : MatSet
        Sets over the same field
    op : Op
        ADD or MUL

    Returns
    -------
    FreqTable
        Counts summing to |A||B|
    """
    field = require_same_field(A, B)
    counts = np.zeros(field.q**4, dtype=np.int64)
    for chunk in pair_results(A, B, op):
        counts += np.bincount(chunk, minlength=field.q**4)
    return FreqTable(field, counts)


def energy(A: MatSet, B: Optional[MatSet] = None, op: Op = Op.ADD) -> int:
    """Number of quadruples (a, a', b, b') with a op b = a' op b'."""
    B = A if B is None else B
    return rep_function(A, B, op).second_moment()


def additive_energy(A: MatSet, B: Optional[MatSet] = None) -> int:
    return energy(A, B, Op.ADD)


def multiplicative_energy(A: MatSet, B: Optional[MatSet] = None) -> int:
    return energy(A, B, Op.MUL)


def convolve(f: FreqTable, g: FreqTable) -> FreqTable:
    """
    Additive convolution (f + g)(lambda) = sum_x f(x) g(lambda - x).

    Naive over the support of f for q <= 4 or small supports, through the
    character transform over (Z_p)^{4k} otherwise.
    """
    field = require_same_field(f, g)
    size = field.q**4
    bound = f.total * g.total
    support = np.flatnonzero(f.counts != 0)
    if bound == 0:
        return FreqTable(field, np.zeros(size, dtype=np.int64))

    if field.q <= NAIVE_CONVOLUTION_MAX_Q or support.size * size <= NAIVE_CONVOLUTION_BUDGET:
        dtype = exact_dtype(bound)
        result = np.zeros(size, dtype=dtype)
        everything = mat2.all_matrices(field)
        g_counts = g.counts.astype(dtype)
        for x in support:
            result += int(f.counts[x]) * g_counts[mat2.mat_sub(everything, x, field)]
        return FreqTable(field, result)

    logger.debug(f"Convolution through the character transform, q={field.q}")
    if field.p == 2:
        dtype = exact_dtype(bound * size)
        f_hat = character_transform(f.counts.astype(dtype), 2)
        g_hat = character_transform(g.counts.astype(dtype), 2)
        return FreqTable(field, to_exact(character_transform(f_hat * g_hat, 2), scale=size))
    n = 4 * field.k
    shape = (field.p,) * n
    f_hat = np.fft.fftn(f.counts.astype(np.float64).reshape(shape))
    g_hat = np.fft.fftn(g.counts.astype(np.float64).reshape(shape))
    product = np.fft.ifftn(f_hat * g_hat).reshape(size)
    return FreqTable(field, to_exact(product, magnitude=float(bound)))


def count_I(A: MatSet, B: MatSet, C: MatSet, D: MatSet, E: MatSet, F: MatSet) -> int:
    """
    Number of (a, b, c, d, e, f) with ab + ef = c + d.

    Computed as sum_lambda (r_AB + r_EF)(lambda) (1_C + 1_D)(lambda).
    """
    require_same_field(A, B, C, D, E, F)
    if not all(len(s) for s in (A, B, C, D, E, F)):
        return 0
    left = convolve(rep_function(A, B, Op.MUL), rep_function(E, F, Op.MUL))
    right = convolve(indicator(C), indicator(D))
    return exact_dot(left.counts, right.counts)


def count_I_bruteforce(A: MatSet, B: MatSet, C: MatSet, D: MatSet, E: MatSet, F: MatSet) -> int:
    """Direct enumeration over (a, b, e, f, c); d = ab + ef - c is tested for membership."""
    field = require_same_field(A, B, C, D, E, F)
    if not all(len(s) for s in (A, B, C, D, E, F)):
        return 0
    ab = mat2.mat_mul(A.indices[:, None], B.indices[None, :], field).ravel()
    ef = mat2.mat_mul(E.indices[:, None], F.indices[None, :], field).ravel()
    sums = mat2.mat_add(ab[:, None], ef[None, :], field).ravel()
    d = mat2.mat_sub(sums[:, None], C.indices[None, :], field)
    return int(np.count_nonzero(D.bitmap[d]))


def count_J(A: MatSet, B: MatSet, C: MatSet, D: MatSet) -> int:
    """Number of (a, b, c, d) with a + b = cd."""
    require_same_field(A, B, C, D)
    if not all(len(s) for s in (A, B, C, D)):
        return 0
    sums = convolve(indicator(A), indicator(B))
    return exact_dot(sums.counts, rep_function(C, D, Op.MUL).counts)


def count_J_bruteforce(A: MatSet, B: MatSet, C: MatSet, D: MatSet) -> int:
    """Direct enumeration over (b, c, d); a = cd - b is tested for membership."""
    field = require_same_field(A, B, C, D)
    if not all(len(s) for s in (A, B, C, D)):
        return 0
    cd = mat2.mat_mul(C.indices[:, None], D.indices[None, :], field).ravel()
    a = mat2.mat_sub(cd[:, None], B.indices[None, :], field)
    return int(np.count_nonzero(A.bitmap[a]))


def rep_AB_plus_C(A: MatSet, B: MatSet, C: MatSet) -> FreqTable:
    """t(lambda) = |{(a, b, c) : ab + c = lambda}|, supported on AB + C."""
    require_same_field(A, B, C)
    return convolve(rep_function(A, B, Op.MUL), indicator(C))


def weighted_products(weights: FreqTable, C: MatSet) -> FreqTable:
    """counts[lambda] = sum over (s, c) with sc = lambda of weights[s]."""
    field = require_same_field(weights, C)
    support = np.flatnonzero(weights.counts != 0)
    dtype = exact_dtype(weights.total * max(len(C), 1))
    counts = np.zeros(field.q**4, dtype=dtype)
    if not support.size or not len(C):
        return FreqTable(field, counts)
    rows = max(1, PAIR_CHUNK // len(C))
    for start in range(0, support.size, rows):
        block = support[start : start + rows]
        products = mat2.mat_mul(block[:, None], C.indices[None, :], field)
        w = np.broadcast_to(weights.counts[block][:, None], products.shape).astype(dtype)
        np.add.at(counts, products.ravel(), w.ravel())
    return FreqTable(field, counts)


def count_sum_times_collisions(A: MatSet, B: MatSet, C: MatSet) -> int:
    """Number of (a, b, c, a', b', c') with (a + b)c = (a' + b')c'."""
    require_same_field(A, B, C)
    if not all(len(s) for s in (A, B, C)):
        return 0
    return weighted_products(convolve(indicator(A), indicator(B)), C).second_moment()


def energy_bruteforce(A: MatSet, B: MatSet, op: Op) -> int:
    """Quadruple loop over (a, a', b, b'); a test oracle for small sets."""
    field = require_same_field(A, B)
    combine = mat2.add if op == Op.ADD else mat2.multiply
    count = 0
    for a, a2, b, b2 in itertools.product(A, A, B, B):
        if combine(a, b, field) == combine(a2, b2, field):
            count += 1
    return count

