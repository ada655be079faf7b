"""The sum-product digraph on M2(F_q)^3.

Edges run (a, e, c) -> (b, f, d) when ab + ef = c + d, or ba + ef = c + d
for the right-product variant. The graph is never stored; every query goes
through the algebra.
"""

import math
from typing import Iterable, Iterator, NamedTuple, Optional

import numpy as np
from cachetools import LRUCache, cached

from core import gf, mat2
from core.errors import EmptySetError, FieldMismatchError, OrderTooLargeForSpectrumError
from core.logger import logger
from core.mat2 import Block2x4, Mat2
from core.setalg import MatSet, count_I, require_same_field
from core.transform import character_transform, to_exact
from models import (
    CaseTag,
    CompatibilityTag,
    CountCheck,
    Direction,
    EigenvalueCount,
    FieldSpec,
    MixingResult,
    PairClass,
    SpectralResult,
    Variant,
)

SPECTRUM_MAX_Q = 4
DENSE_MAX_Q = 2
EDGE_CHUNK = 1 << 22
BOUND_TOLERANCE = 1e-9


class Vertex(NamedTuple):
    """A vertex (a, e, c); its index packs the three matrix indices base q^4."""

    a: Mat2
    e: Mat2
    c: Mat2

    def index(self, field: FieldSpec) -> int:
        q4 = field.q**4
        return (self.a.index(field) * q4 + self.e.index(field)) * q4 + self.c.index(field)

    @classmethod
    def from_index(cls, index: int, field: FieldSpec) -> "Vertex":
        ia, ie, ic = (int(x) for x in split_vertices(index, field))
        return cls(
            Mat2.from_index(ia, field), Mat2.from_index(ie, field), Mat2.from_index(ic, field)
        )


class DigraphOracle(NamedTuple):
    """
    Implicit sum-product digraph.

    Attributes
    ----------
    field : FieldSpec
        The field
    variant : Variant
        LEFT for ab + ef = c + d, RIGHT for ba + ef = c + d
    """

    field: FieldSpec
    variant: Variant = Variant.LEFT

    @property
    def n(self) -> int:
        return self.field.q**12

    @property
    def d(self) -> int:
        return self.field.q**8


def split_vertices(indices, field: FieldSpec):
    """Matrix index arrays (a, e, c) of vertex indices."""
    q4 = field.q**4
    rest, ic = np.divmod(np.asarray(indices, dtype=np.int64), q4)
    ia, ie = np.divmod(rest, q4)
    return ia, ie, ic


def join_vertices(ia, ie, ic, field: FieldSpec) -> np.ndarray:
    q4 = field.q**4
    return (np.asarray(ia, dtype=np.int64) * q4 + ie) * q4 + ic


def vertex_sub(x, y, field: FieldSpec) -> np.ndarray:
    """Coordinatewise difference x - y of vertex index arrays."""
    xa, xe, xc = split_vertices(x, field)
    ya, ye, yc = split_vertices(y, field)
    return join_vertices(
        mat2.mat_sub(xa, ya, field),
        mat2.mat_sub(xe, ye, field),
        mat2.mat_sub(xc, yc, field),
        field,
    )


def _product(tail, head, oracle: DigraphOracle) -> np.ndarray:
    """The product term of the edge equation: tail*head (LEFT) or head*tail (RIGHT)."""
    if oracle.variant == Variant.LEFT:
        return mat2.mat_mul(tail, head, oracle.field)
    return mat2.mat_mul(head, tail, oracle.field)


def is_edge(u, w, oracle: DigraphOracle) -> np.ndarray:
    """Broadcasting edge test u -> w over vertex index arrays."""
    field = oracle.field
    ua, ue, uc = split_vertices(u, field)
    wb, wf, wd = split_vertices(w, field)
    lhs = mat2.mat_add(_product(ua, wb, oracle), mat2.mat_mul(ue, wf, field), field)
    return lhs == mat2.mat_add(uc, wd, field)


def _pair_grid(field: FieldSpec) -> tuple[np.ndarray, np.ndarray]:
    q4 = field.q**4
    everything = np.arange(q4, dtype=np.int64)
    return np.repeat(everything, q4), np.tile(everything, q4)


def out_neighbor_indices(v, oracle: DigraphOracle) -> np.ndarray:
    """
    Out-neighbours of one or more vertices.

    Returns an array of shape (..., q^8): for each (b, f) the unique
    d = ab + ef - c.
    """
    field = oracle.field
    a, e, c = (np.asarray(x)[..., None] for x in split_vertices(v, field))
    b, f = _pair_grid(field)
    d = mat2.mat_sub(
        mat2.mat_add(_product(a, b, oracle), mat2.mat_mul(e, f, field), field), c, field
    )
    return join_vertices(np.broadcast_to(b, d.shape), np.broadcast_to(f, d.shape), d, field)


def in_neighbor_indices(w, oracle: DigraphOracle) -> np.ndarray:
    """In-neighbours: for each (a, e) the unique c = ab + ef - d."""
    field = oracle.field
    b, f, d = (np.asarray(x)[..., None] for x in split_vertices(w, field))
    a, e = _pair_grid(field)
    c = mat2.mat_sub(
        mat2.mat_add(_product(a, b, oracle), mat2.mat_mul(e, f, field), field), d, field
    )
    return join_vertices(np.broadcast_to(a, c.shape), np.broadcast_to(e, c.shape), c, field)


def out_neighbors(v: Vertex, oracle: DigraphOracle) -> Iterator[Vertex]:
    """Yield the q^8 out-neighbours of v, each once."""
    for index in out_neighbor_indices(v.index(oracle.field), oracle):
        yield Vertex.from_index(int(index), oracle.field)


def in_neighbors(v: Vertex, oracle: DigraphOracle) -> Iterator[Vertex]:
    for index in in_neighbor_indices(v.index(oracle.field), oracle):
        yield Vertex.from_index(int(index), oracle.field)


def common_neighbors_bruteforce(
    u: Vertex, v: Vertex, direction: Direction, oracle: DigraphOracle
) -> int:
    """
    |N+(u, v)| or |N-(u, v)| by enumerating the neighbourhood of u and
    testing adjacency with v.
    """
    field = oracle.field
    ui, vi = u.index(field), v.index(field)
    if direction == Direction.OUT:
        return int(np.count_nonzero(is_edge(vi, out_neighbor_indices(ui, oracle), oracle)))
    return int(np.count_nonzero(is_edge(in_neighbor_indices(ui, oracle), vi, oracle)))


def _direction(ids, field: FieldSpec):
    """Spanning vector of each line id; (1, 0) stands in for non-lines."""
    ids = np.asarray(ids)
    is_line = (ids >= 1) & (ids <= field.q + 1)
    return mat2.line_direction(np.where(is_line, ids, 1), field)


def _image_data(ia, ie, ic, oracle: DigraphOracle):
    """
    Dimension of the image of (x, y) -> a x + e y (or x a + e y) and whether
    c lies in it.

    The image is F^2 (x) R + C (x) F^2 with R a row space and C a column
    space; c belongs to it iff w^T c v = 0 for every w annihilating C and v
    annihilating R.
    """
    field = oracle.field
    t = gf.tables(field)
    _, row_space, col_space = mat2.subspace_tables(field)
    ia, ie, ic = np.broadcast_arrays(*(np.asarray(x, dtype=np.int64) for x in (ia, ie, ic)))
    if oracle.variant == Variant.LEFT:
        R = np.zeros_like(ia)
        C = mat2.join_subspaces(col_space[ia], col_space[ie], field)
    else:
        R = row_space[ia]
        C = col_space[ie]
    dim_r = mat2.subspace_dim(R, field)
    dim_c = mat2.subspace_dim(C, field)
    dim = 2 * dim_r + 2 * dim_c - dim_r * dim_c

    add, mul, neg = t.add, t.mul, t.neg
    c11, c12, c21, c22 = mat2.split(ic, field)
    r0, r1 = _direction(R, field)
    s0, s1 = _direction(C, field)
    v0, v1 = neg[r1], r0
    w0, w1 = neg[s1], s0
    cv0 = add[mul[c11, v0], mul[c12, v1]]
    cv1 = add[mul[c21, v0], mul[c22, v1]]
    wc0 = add[mul[w0, c11], mul[w1, c21]]
    wc1 = add[mul[w0, c12], mul[w1, c22]]
    wcv = add[mul[w0, cv0], mul[w1, cv1]]

    member = np.select(
        [
            (dim_r == 2) | (dim_c == 2),
            (dim_r == 0) & (dim_c == 0),
            (dim_r == 1) & (dim_c == 0),
            (dim_r == 0) & (dim_c == 1),
        ],
        [
            np.ones_like(ic, dtype=bool),
            ic == 0,
            (cv0 == 0) & (cv1 == 0),
            (wc0 == 0) & (wc1 == 0),
        ],
        default=wcv == 0,
    )
    return dim, member


def _weights(ia, ie, ic, oracle: DigraphOracle) -> np.ndarray:
    dim, member = _image_data(ia, ie, ic, oracle)
    powers = oracle.field.q ** np.arange(9, dtype=np.int64)
    return np.where(member, powers[8 - dim], 0)


def gram_weight(delta: tuple[Mat2, Mat2, Mat2], oracle: DigraphOracle) -> int:
    """Number of common out-neighbours of u and u + delta."""
    a_bar, e_bar, c_bar = (m.index(oracle.field) for m in delta)
    return int(_weights(a_bar, e_bar, c_bar, oracle))


@cached(cache=LRUCache(maxsize=4))
def gram_weight_table(oracle: DigraphOracle) -> np.ndarray:
    """g(delta) for every difference triple, indexed by vertex index."""
    field = oracle.field
    q4 = field.q**4
    ie, ic = _pair_grid(field)
    table = np.empty(oracle.n, dtype=np.int64)
    for ia in range(q4):
        table[ia * q4 * q4 : (ia + 1) * q4 * q4] = _weights(ia, ie, ic, oracle)
    logger.debug(f"Gram weight table for q={field.q}, {oracle.variant.value} variant")
    return table


def classify_pair(u: Vertex, v: Vertex, oracle: DigraphOracle) -> PairClass:
    """
    Case of the common-out-neighbour analysis for u, v.

    The pair reduces to a_bar x + e_bar y = c_bar (x a_bar + e_bar y = c_bar
    for RIGHT) with a_bar = a - a', e_bar = e - e', c_bar = c - c'.
    """
    field = oracle.field
    q = field.q
    a_bar = mat2.subtract(u.a, v.a, field)
    e_bar = mat2.subtract(u.e, v.e, field)
    c_bar = mat2.subtract(u.c, v.c, field)
    rank_t = mat2.rank2x4(Block2x4(a_bar, e_bar), field)
    rank_c = mat2.rank(c_bar, field)

    def result(tag: CaseTag, count: int) -> PairClass:
        return PairClass(tag=tag, predicted_common_out=count, rank_t=rank_t, rank_c=rank_c)

    if u == v:
        return result(CaseTag.DIAGONAL, q**8)
    if oracle.variant == Variant.RIGHT:
        return _classify_right(a_bar, e_bar, c_bar, oracle, result)

    if rank_t == 0:
        return result(CaseTag.RANK0_MISMATCH, 0)
    if rank_t == 2:
        return result(CaseTag.CASE3, q**4)
    if rank_c == 0:
        return result(CaseTag.CASE23, q**6)
    if rank_c == 2:
        return result(CaseTag.CASE21, 0)
    if mat2.proportionality_class(Block2x4(a_bar, e_bar), c_bar, field) == CompatibilityTag.SAME_FACTOR:
        return result(CaseTag.CASE22A, q**6)
    return result(CaseTag.CASE22B, 0)


def _classify_right(a_bar: Mat2, e_bar: Mat2, c_bar: Mat2, oracle: DigraphOracle, result) -> PairClass:
    field = oracle.field
    q = field.q
    dim, member = (
        int(x) for x in _image_data(a_bar.index(field), e_bar.index(field), c_bar.index(field), oracle)
    )
    count = q ** (8 - dim) if member else 0
    if dim == 0:
        return result(CaseTag.RANK0_MISMATCH, 0)
    if dim == 4:
        return result(CaseTag.CASE3, count)
    if dim == 3:
        return result(CaseTag.MIXED, count)
    if c_bar == Mat2.zero():
        return result(CaseTag.CASE23, count)
    if member:
        return result(CaseTag.CASE22A, count)
    if mat2.rank(c_bar, field) == 2:
        return result(CaseTag.CASE21, 0)
    return result(CaseTag.CASE22B, 0)


def second_eigenvalue(oracle: DigraphOracle) -> SpectralResult:
    """
    Exact spectrum of m_G m_G^T through the character transform.

    The Gram operator is a Cayley operator on (Z_p)^{12k} with weight
    gram_weight_table, so its eigenvalues are the transform of that table.

    Raises
    ------
    OrderTooLargeForSpectrumError
        q > 4
    """
    field = oracle.field
    q = field.q
    if q > SPECTRUM_MAX_Q:
        raise OrderTooLargeForSpectrumError(
            f"Exact spectrum needs q <= {SPECTRUM_MAX_Q}, got q = {q}"
        )
    weights = gram_weight_table(oracle)
    spectrum = to_exact(character_transform(weights, field.p), magnitude=float(q**16))
    trivial = int(spectrum[0])
    mu_squared = int(spectrum[1:].max())
    values, counts = np.unique(spectrum, return_counts=True)
    summary = [
        EigenvalueCount(value=int(v), multiplicity=int(m))
        for v, m in sorted(zip(values, counts), key=lambda x: -x[0])
    ]
    mu = math.sqrt(mu_squared)
    logger.info(
        f"Spectrum q={q} {oracle.variant.value}: trivial={trivial}, mu^2={mu_squared}, "
        f"mu/q^6.5={mu / q**6.5:.6f}"
    )
    return SpectralResult(
        q=q,
        variant=oracle.variant,
        mu=mu,
        mu_squared=mu_squared,
        constant_c=mu / q**6.5,
        trivial_eigenvalue=trivial,
        gram_spectrum_summary=summary,
    )


def dense_gram(oracle: DigraphOracle) -> np.ndarray:
    """Explicit m_G m_G^T at q = 2 (4096 x 4096)."""
    if oracle.field.q > DENSE_MAX_Q:
        raise OrderTooLargeForSpectrumError("Dense Gram assembly is only done at q = 2")
    vertices = np.arange(oracle.n, dtype=np.int64)
    neighbours = out_neighbor_indices(vertices, oracle)
    adjacency = np.zeros((oracle.n, oracle.n), dtype=np.float32)
    adjacency[np.repeat(vertices, oracle.d), neighbours.ravel()] = 1.0
    return (adjacency @ adjacency.T).astype(np.float64)


def power_iteration_mu(
    gram: np.ndarray, seed: int = 0, tolerance: float = 1e-10, max_iterations: int = 10_000
) -> tuple[float, int]:
    """
    sqrt of the top Gram eigenvalue orthogonal to the all-ones vector.

    Power iteration with the ones direction projected out at every step;
    stops when the relative residual ||G x - lam x|| / lam drops below
    tolerance.

    Returns
    -------
    tuple[float, int]
        mu and the number of iterations used
    """
    rng = np.random.default_rng(seed)
    x = rng.normal(size=gram.shape[0])
    x -= x.mean()
    x /= np.linalg.norm(x)
    lam = 0.0
    for iteration in range(1, max_iterations + 1):
        y = gram @ x
        y -= y.mean()
        norm = np.linalg.norm(y)
        if norm == 0:
            return 0.0, iteration
        lam = float(x @ y)
        x_next = y / norm
        residual = gram @ x_next
        residual -= residual.mean()
        residual = np.linalg.norm(residual - lam * x_next)
        x = x_next
        if residual <= tolerance * max(abs(lam), 1.0):
            break
    logger.debug(f"Power iteration stopped after {iteration} steps, lambda={lam:.6f}")
    return math.sqrt(max(lam, 0.0)), iteration


def _as_vertex_array(vertices, field: FieldSpec) -> np.ndarray:
    if isinstance(vertices, np.ndarray):
        return np.unique(vertices.astype(np.int64))
    return np.unique(
        np.array(
            [v.index(field) if isinstance(v, Vertex) else int(v) for v in vertices],
            dtype=np.int64,
        )
    )


def edge_count(U, W, oracle: DigraphOracle) -> int:
    """
    Exact number of edges from U to W.

    Tests all pairs when |W| <= d, otherwise enumerates out-neighbourhoods
    of U against a membership bitmap of W.
    """
    U = _as_vertex_array(U, oracle.field)
    W = _as_vertex_array(W, oracle.field)
    if not U.size or not W.size:
        return 0
    total = 0
    if W.size <= oracle.d:
        rows = max(1, EDGE_CHUNK // W.size)
        for start in range(0, U.size, rows):
            block = U[start : start + rows]
            total += int(np.count_nonzero(is_edge(block[:, None], W[None, :], oracle)))
        return total
    bitmap = np.zeros(oracle.n, dtype=bool)
    bitmap[W] = True
    rows = max(1, EDGE_CHUNK // oracle.d)
    for start in range(0, U.size, rows):
        total += int(np.count_nonzero(bitmap[out_neighbor_indices(U[start : start + rows], oracle)]))
    return total


def mixing_deviation(B: Iterable, C: Iterable, oracle: DigraphOracle, mu: float) -> MixingResult:
    """
    Edge count e(B, C) against d/n |B||C| and the bound mu sqrt(|B||C|).

    Raises
    ------
    EmptySetError
        B or C is empty
    """
    B = _as_vertex_array(B, oracle.field)
    C = _as_vertex_array(C, oracle.field)
    if not B.size or not C.size:
        raise EmptySetError("Mixing needs nonempty vertex sets")
    e_bc = edge_count(B, C, oracle)
    expected = oracle.d * B.size * C.size / oracle.n
    deviation = abs(e_bc - expected)
    bound = mu * math.sqrt(B.size * C.size)
    return MixingResult(
        e_bc=e_bc,
        expected=expected,
        deviation=deviation,
        bound=bound,
        holds=deviation <= bound * (1 + BOUND_TOLERANCE),
    )


def count_I_spectral_check(
    A: MatSet, B: MatSet, C: MatSet, D: MatSet, E: MatSet, F: MatSet, oracle: DigraphOracle, mu: float
) -> CountCheck:
    """
    |I(A, B, C, D, E, F) - prod/q^4| against mu sqrt(prod).

    I is e(U, W) for U = A x E x C and W = B x F x D, so the mixing bound
    applies with the exact mu.
    """
    field = require_same_field(A, B, C, D, E, F)
    if field != oracle.field:
        raise FieldMismatchError("Sets and digraph live over different fields")
    count = count_I(A, B, C, D, E, F)
    product = math.prod(len(s) for s in (A, B, C, D, E, F))
    main = product / field.q**4
    deviation = abs(count - main)
    bound = mu * math.sqrt(product)
    return CountCheck(
        count=count,
        main_term=main,
        deviation=deviation,
        bound=bound,
        holds=deviation <= bound * (1 + BOUND_TOLERANCE),
    )


def embed_sum_times(A: MatSet, B: MatSet, C: MatSet) -> tuple[np.ndarray, np.ndarray]:
    """
    Vertex sets U = {(c, -b', -ac)} and W = {(b, c', a'c')}.

    On the right-product digraph an edge U -> W is exactly a solution of
    (a + b)c = (a' + b')c', so for C inside GL2 the collision count of
    (A + B)C equals e(U, W).
    """
    field = require_same_field(A, B, C)
    a = A.indices[:, None, None]
    b = B.indices[None, :, None]
    c = C.indices[None, None, :]
    shape = (len(A), len(B), len(C))
    U = join_vertices(
        np.broadcast_to(c, shape),
        np.broadcast_to(mat2.mat_neg(b, field), shape),
        mat2.mat_neg(mat2.mat_mul(a, c, field), field),
        field,
    )
    W = join_vertices(
        np.broadcast_to(b, shape),
        np.broadcast_to(c, shape),
        mat2.mat_mul(a, c, field),
        field,
    )
    return np.unique(U), np.unique(W)


def random_vertices(oracle: DigraphOracle, size: int, seed: Optional[int] = None) -> np.ndarray:
    """Uniform sample of distinct vertex indices."""
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(oracle.n, size=size, replace=False))
