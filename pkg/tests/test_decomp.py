"""Pigeonhole and decomposition tests."""

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from core import mat2
from core.decomp import (
    bw_decompose,
    dyadic_pigeonhole,
    energy_pigeonhole,
    low_energy_subset,
    param_M,
    pigeonhole_ratios,
    subadditivity_gap,
    trace_summary,
    verify_certificate,
)
from core.errors import EmptyDomainError, NotInvertibleSetError, TooSmallError, ZeroMassError
from core.mat2 import Mat2
from core.setalg import MatSet, additive_energy, intersection, multiplicative_energy, union
from models import Branch


def random_gl2(field, size, seed):
    rng = np.random.default_rng(seed)
    return MatSet(field, rng.choice(mat2.gl2_indices(field), size=size, replace=False))


def test_dyadic_example():
    result = dyadic_pigeonhole([0, 1, 2, 3], [1, 1, 2, 4])
    assert result.tau == 4
    assert result.level == 2
    assert result.members == [3]
    assert result.contribution == 4
    assert result.threshold == 1


def test_dyadic_ties_go_low():
    """Levels 0 and 1 both carry mass 2."""
    result = dyadic_pigeonhole([0, 1, 2], [1, 1, 2])
    assert result.level == 0
    assert result.members == [0, 1]


def test_dyadic_drops_values_below_threshold():
    """Twenty 1s sit below K / (2W) = 50 / 48 and never form the level."""
    f = [1] * 20 + [2, 4, 8, 16]
    result = dyadic_pigeonhole(range(len(f)), f)
    assert result.threshold == pytest.approx(50 / 48)
    assert result.level == 4
    assert result.tau == 16
    assert result.members == [23]
    assert result.contribution == 16


@settings(max_examples=1000)
@given(
    st.lists(
        st.tuples(st.integers(min_value=0, max_value=1000), st.integers(min_value=1, max_value=5)),
        min_size=1,
        max_size=40,
    )
)
def test_dyadic_invariants(pairs):
    f = np.array([x for x, _ in pairs], dtype=np.int64)
    w = np.array([y for _, y in pairs], dtype=np.int64)
    assume(f.sum() > 0)
    result = dyadic_pigeonhole(np.arange(f.size), f, w, max_value=int(f.max()))
    chosen = f[result.members]
    assert np.all(chosen >= result.tau)
    assert np.all(chosen < 2 * result.tau)
    assert result.tau >= result.threshold
    assert result.tau <= f.max()
    levels = 1 + math.log2(f.max())
    assert result.contribution * (1 + 1e-12) >= result.total_mass / (2 * levels)


def test_dyadic_errors():
    with pytest.raises(EmptyDomainError):
        dyadic_pigeonhole([], [])
    with pytest.raises(ZeroMassError):
        dyadic_pigeonhole([0, 1], [0, 0])


def test_pigeonhole_on_a_group(f2):
    """GL2(F_2): r = 6 everywhere, so D = X and every row count is 6."""
    X = MatSet.gl2(f2)
    certificate = energy_pigeonhole(X)
    assert certificate.tau == 4
    assert certificate.kappa == 4
    assert certificate.branch == Branch.DX_INV
    assert certificate.x_star == X
    assert certificate.d == X
    assert certificate.e_times_x == 216
    assert verify_certificate(certificate, X)
    ratios = pigeonhole_ratios(certificate)
    assert ratios["tau_upper"] == pytest.approx(6 / 4)
    assert ratios["tau_lower"] == pytest.approx(4 / (216 / 72))


@pytest.mark.parametrize("seed", range(3))
def test_pigeonhole_random(seed, f3):
    X = random_gl2(f3, 20, seed)
    certificate = energy_pigeonhole(X)
    assert certificate.x_star.issubset(X)
    assert len(certificate.x_star) > 0
    assert verify_certificate(certificate, X)
    if certificate.branch == Branch.XINV_D:
        assert certificate.kappa2 == certificate.kappa


def test_tampered_certificate_fails(f2):
    X = MatSet.gl2(f2)
    certificate = energy_pigeonhole(X)
    inflated = certificate.model_copy(update={"kappa": 7.0})
    assert not verify_certificate(inflated, X)


def test_pigeonhole_requires_gl2(f2):
    with pytest.raises(NotInvertibleSetError):
        energy_pigeonhole(MatSet.from_matrices(f2, [Mat2.identity(), Mat2.zero()]))
    with pytest.raises(TooSmallError):
        energy_pigeonhole(MatSet.from_matrices(f2, [Mat2.identity()]))


def test_low_energy_subset(f3):
    X = random_gl2(f3, 24, 4)
    result = low_energy_subset(X)
    assert result.e_plus == additive_energy(result.x_star)
    assert result.certificate.x_star == result.x_star


def test_param_m():
    assert param_M(48, 3) == 1.0
    assert 1.0 <= param_M(10**6, 2) <= 10**6
    with pytest.raises(TooSmallError):
        param_M(1, 3)


def test_decompose_group(f2):
    """All of GL2(F_2) is extracted in one step."""
    A = MatSet.gl2(f2)
    trace = bw_decompose(A, M=2)
    assert len(trace.iterations) == 1
    assert len(trace.b) == 0
    assert trace.c == A
    assert trace.iterations[0].branch == Branch.DX_INV
    summary = trace_summary(trace)
    assert summary.iterations == 1
    assert summary.e_times_b == 0
    assert summary.e_times_c == 216


def test_decompose_halts_immediately_when_m_is_one(f3):
    A = random_gl2(f3, 24, 8)
    trace = bw_decompose(A)
    assert trace.m_used == 1.0
    assert not trace.iterations
    assert trace.b == A


@pytest.mark.parametrize("seed", range(3))
def test_decompose_partitions(seed, f3):
    A = random_gl2(f3, 24, seed)
    M = 8.0
    trace = bw_decompose(A, M=M)
    assert union(trace.b, trace.c) == A
    assert len(intersection(trace.b, trace.c)) == 0
    for i, first in enumerate(trace.parts):
        for second in trace.parts[i + 1 :]:
            assert len(intersection(first, second)) == 0
    assert multiplicative_energy(trace.b) * M <= len(A) ** 3
    for record in trace.iterations:
        assert record.e_times_s * M > len(A) ** 3


@pytest.mark.parametrize("seed", range(3))
def test_subadditivity(seed, f3):
    rng = np.random.default_rng(seed)
    indices = rng.choice(81, size=30, replace=False)
    parts = [MatSet(f3, chunk) for chunk in np.array_split(indices, 3)]
    lhs, rhs = subadditivity_gap(parts)
    assert lhs == additive_energy(MatSet(f3, indices))
    assert lhs <= rhs * (1 + 1e-9)
