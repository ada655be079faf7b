"""Structured and random sets of matrices."""

from typing import Iterable, Optional

import numpy as np

from core import gf, mat2
from core.errors import (
    BadParametersError,
    EmptyXError,
    LabError,
    NotSubgroupError,
    SizeTooLargeError,
)
from core.logger import logger
from core.setalg import MatSet
from models import ConstructionKind, ConstructionSpec, FieldSpec


def _entries(field: FieldSpec):
    return mat2.split(mat2.all_matrices(field), field)


def _where(field: FieldSpec, mask: np.ndarray) -> MatSet:
    return MatSet(field, np.flatnonzero(mask))


def lower_triangular(field: FieldSpec) -> MatSet:
    """Matrices with m12 = 0 (q^3 of them)."""
    _, m12, _, _ = _entries(field)
    return _where(field, m12 == 0)


def x23_restricted(field: FieldSpec, X: Iterable[int]) -> MatSet:
    """
    Matrices whose (1, 2) entry lies in X.

    Raises
    ------
    EmptyXError
        X is empty
    """
    values = sorted({int(x) for x in X})
    if not values:
        raise EmptyXError("The restricting set X is empty")
    if values[0] < 0 or values[-1] >= field.q:
        raise BadParametersError(f"X must lie in F_{field.q}, got {values}")
    _, m12, _, _ = _entries(field)
    return _where(field, np.isin(m12, values))


def sharpness_ab_plus_c(field: FieldSpec, X: Iterable[int]) -> tuple[MatSet, MatSet, MatSet]:
    """A = B = lower triangular, C = x23_restricted(X), so AB + C = C."""
    C = x23_restricted(field, X)
    A = lower_triangular(field)
    return A, A, C


def subspace_V(field: FieldSpec) -> np.ndarray:
    """
    The F_p-span of 1, x, ..., x^(k-2) inside F_q, as element values.

    Raises
    ------
    BadParametersError
        k < 2
    """
    if field.k < 2:
        raise BadParametersError(f"The subspace construction needs k >= 2, got k = {field.k}")
    return np.arange(field.p ** (field.k - 1), dtype=np.int64)


def subspace_ab(field: FieldSpec) -> MatSet:
    """Matrices with m11, m12 in V and m21, m22 free."""
    V = subspace_V(field)
    m11, m12, _, _ = _entries(field)
    return _where(field, np.isin(m11, V) & np.isin(m12, V))


def subfield_c(field: FieldSpec) -> MatSet:
    """Matrices with m12, m22 in the prime field and m11, m21 free."""
    prime = gf.prime_subfield(field)
    _, m12, _, m22 = _entries(field)
    return _where(field, np.isin(m12, prime) & np.isin(m22, prime))


def sharpness_a_plus_b_c(p: int, k: int) -> tuple[MatSet, MatSet, MatSet]:
    """
    A = B = subspace_ab, C = subfield_c over F_{p^k}; (A + B)C has q^(4 - 1/k) elements.

    Raises
    ------
    BadParametersError
        k < 2 or p^k is not a supported field
    """
    if k < 2:
        raise BadParametersError(f"The subspace construction needs k >= 2, got k = {k}")
    try:
        field = gf.make_field(p, k)
    except LabError as e:
        raise BadParametersError(f"Unsupported field {p}^{k}: {e}") from e
    A = subspace_ab(field)
    return A, A, subfield_c(field)


def det_subgroup_set(field: FieldSpec, G: Iterable[int]) -> MatSet:
    """
    {M in GL2 : det M in G} for a multiplicative subgroup G.

    Raises
    ------
    NotSubgroupError
        G is empty, contains 0 or is not closed under multiplication
    """
    subgroup = sorted({int(g) for g in G})
    if not subgroup or subgroup[0] <= 0 or subgroup[-1] >= field.q:
        raise NotSubgroupError(f"{subgroup} is not a subset of F_{field.q}*")
    members = set(subgroup)
    mul = gf.tables(field).mul
    for x in subgroup:
        for y in subgroup:
            if int(mul[x, y]) not in members:
                raise NotSubgroupError(f"{subgroup} is not closed under multiplication")
    return _where(field, np.isin(mat2.det_table(field), subgroup))


def singular_set(field: FieldSpec) -> MatSet:
    return MatSet(field, mat2.singular_indices(field))


def singular_c(field: FieldSpec) -> tuple[MatSet, MatSet, MatSet]:
    """A = B = M2(F_q), C = singular matrices."""
    full = MatSet.full(field)
    return full, full, singular_set(field)


def random_subset(
    field: FieldSpec, size: int, seed: Optional[int] = None, invertible: bool = False
) -> MatSet:
    """
    Uniform sample without replacement from M2 (or GL2), deterministic in seed.

    Raises
    ------
    SizeTooLargeError
        size exceeds the universe
    """
    universe = mat2.gl2_indices(field) if invertible else mat2.all_matrices(field)
    if size < 0 or size > universe.size:
        raise SizeTooLargeError(f"Cannot sample {size} of {universe.size} matrices")
    rng = np.random.Generator(np.random.Philox(seed))
    return MatSet(field, rng.choice(universe, size=size, replace=False))


def int_list(value) -> list[int]:
    if isinstance(value, str):
        return [int(x) for x in value.split(",") if x.strip()]
    if isinstance(value, int):
        return [value]
    return [int(x) for x in value]


def build(spec: ConstructionSpec, field: FieldSpec) -> MatSet:
    """
    Build one named set.

    Parameters
    ----------
    spec : ConstructionSpec
        Kind and parameters (X, G, size, seed)
    field : FieldSpec
        The field

    Returns
    -------
    MatSet
        The constructed set
    """
    params = spec.parameters
    kind = spec.kind
    logger.debug(f"Building {kind.value} over F_{field.q} with {params}")
    if kind == ConstructionKind.LOWER_TRIANGULAR:
        return lower_triangular(field)
    if kind == ConstructionKind.X23_RESTRICTED:
        return x23_restricted(field, int_list(params.get("X", [])))
    if kind == ConstructionKind.SUBSPACE_AB:
        return subspace_ab(field)
    if kind == ConstructionKind.SUBFIELD_C:
        return subfield_c(field)
    if kind == ConstructionKind.DET_SUBGROUP:
        return det_subgroup_set(field, int_list(params.get("G", [1])))
    if kind == ConstructionKind.SINGULAR:
        return singular_set(field)
    if kind == ConstructionKind.FULL_M2:
        return MatSet.full(field)
    if kind == ConstructionKind.FULL_GL2:
        return MatSet.gl2(field)
    if "size" not in params:
        raise BadParametersError(f"{kind.value} needs a size parameter")
    return random_subset(
        field,
        int(params["size"]),
        seed=int(params.get("seed", 0)),
        invertible=kind == ConstructionKind.RANDOM_GL2,
    )
