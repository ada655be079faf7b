"""Construction tests."""

import pytest

from core import constructions, gf
from core.errors import BadParametersError, EmptyXError, NotSubgroupError, SizeTooLargeError
from core.setalg import MatSet, set_inverse, set_prod, set_sum
from models import ConstructionKind, ConstructionSpec


def test_ab_plus_c_family(f4):
    A, B, C = constructions.sharpness_ab_plus_c(f4, [0, 1])
    assert (len(A), len(B), len(C)) == (64, 64, 128)
    assert set_prod(A, B) == A
    assert set_sum(set_prod(A, B), C) == C


def test_a_plus_b_c_family():
    A, B, C = constructions.sharpness_a_plus_b_c(2, 2)
    assert len(A) * len(B) * len(C) == 2 ** (10 * 2 - 2)
    assert set_sum(A, B) == A
    assert len(set_prod(set_sum(A, B), C)) == 2 ** (4 * 2 - 1)


def test_a_plus_b_c_needs_extension():
    with pytest.raises(BadParametersError):
        constructions.sharpness_a_plus_b_c(3, 1)
    with pytest.raises(BadParametersError):
        constructions.sharpness_a_plus_b_c(5, 3)


def test_subspace_v():
    field = gf.make_field(3, 2)
    assert list(constructions.subspace_V(field)) == [0, 1, 2]
    with pytest.raises(BadParametersError):
        constructions.subspace_V(gf.make_field(3))


def test_det_subgroup(f5):
    A = constructions.det_subgroup_set(f5, [1, 4])
    assert len(A) == 240
    assert set_prod(A, A) == A
    assert set_inverse(A) == A
    assert len(constructions.det_subgroup_set(f5, [1])) == 120


@pytest.mark.parametrize("G", [[2], [1, 2], [], [0, 1]])
def test_det_subgroup_rejects(G, f5):
    with pytest.raises(NotSubgroupError):
        constructions.det_subgroup_set(f5, G)


def test_singular_c(f3):
    A, B, C = constructions.singular_c(f3)
    assert len(C) == 81 - 48
    assert not C.is_invertible()
    assert len(A) == 81


def test_x23_rejects(f3):
    with pytest.raises(EmptyXError):
        constructions.x23_restricted(f3, [])
    with pytest.raises(BadParametersError):
        constructions.x23_restricted(f3, [5])


def test_random_subset_deterministic(f3):
    first = constructions.random_subset(f3, 10, seed=5)
    assert first == constructions.random_subset(f3, 10, seed=5)
    assert first != constructions.random_subset(f3, 10, seed=6)
    assert constructions.random_subset(f3, 48, seed=1, invertible=True) == MatSet.gl2(f3)


def test_random_subset_too_large(f2):
    with pytest.raises(SizeTooLargeError):
        constructions.random_subset(f2, 7, seed=0, invertible=True)


@pytest.mark.parametrize(
    "kind,params,size",
    [
        (ConstructionKind.LOWER_TRIANGULAR, {}, 27),
        (ConstructionKind.X23_RESTRICTED, {"X": "0,1"}, 54),
        (ConstructionKind.DET_SUBGROUP, {"G": "1,2"}, 48),
        (ConstructionKind.SINGULAR, {}, 33),
        (ConstructionKind.FULL_M2, {}, 81),
        (ConstructionKind.FULL_GL2, {}, 48),
        (ConstructionKind.RANDOM_M2, {"size": 12, "seed": 3}, 12),
        (ConstructionKind.RANDOM_GL2, {"size": 12}, 12),
    ],
)
def test_build(kind, params, size, f3):
    assert len(constructions.build(ConstructionSpec(kind=kind, parameters=params), f3)) == size


def test_build_random_needs_size(f3):
    with pytest.raises(BadParametersError):
        constructions.build(ConstructionSpec(kind=ConstructionKind.RANDOM_M2), f3)


def test_int_list():
    assert constructions.int_list("0, 2,") == [0, 2]
    assert constructions.int_list(3) == [3]
    assert constructions.int_list((1, 2)) == [1, 2]
