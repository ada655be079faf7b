"""Low-energy decomposition of sets of invertible matrices.

Dyadic pigeonholing, the energy pigeonhole with its certificate, the
low-additive-energy subset extractor and the iterative splitting
A = B + C with E_x(B) <= |A|^3 / M.
"""

import math
from typing import NamedTuple, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from core import mat2
from core.errors import (
    CertificateError,
    EmptyDomainError,
    InternalStallError,
    NotInvertibleSetError,
    TooSmallError,
    ZeroMassError,
)
from core.logger import logger
from core.setalg import (
    MatSet,
    additive_energy,
    difference,
    multiplicative_energy,
    rep_function,
    set_inverse,
    union,
)
from core.transform import exact_dot
from models import Branch, IterationRecord, Op, TraceSummary


class DyadicLevelResult(BaseModel):
    """
    One dyadic level of a weighted function.

    Attributes
    ----------
    members : list[int]
        Domain keys x with tau <= f(x) < 2 tau
    tau : float
        Level bottom
    level : int
        j with the level anchored at 2^j
    contribution : float
        Sum of f(x) w(x) over members
    total_mass : float
        K = sum of f w over the domain
    total_weight : float
        W = sum of w over the domain
    """

    members: list[int]
    tau: float
    level: int
    contribution: float
    total_mass: float
    total_weight: float

    @property
    def threshold(self) -> float:
        return self.total_mass / (2 * self.total_weight)


class PigeonholeCertificate(BaseModel):
    """
    Output of the energy pigeonhole.

    r_XX lies in [tau, 2 tau) on D, and the branch representation function
    (r_{D X^-1} for DXinv, r_{X^-1 D} for XinvD) is at least kappa on X_*.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    x_star: MatSet
    d: MatSet
    tau: float
    kappa: float
    branch: Branch
    x_size: int
    e_times_x: int
    p1_size: int
    v_size: int
    kappa1: float
    p2_size: Optional[int] = None
    u_size: Optional[int] = None
    kappa2: Optional[float] = None


class LowEnergySubset(NamedTuple):
    x_star: MatSet
    certificate: PigeonholeCertificate
    e_plus: int


class DecompositionTrace(BaseModel):
    """
    Full record of a decomposition run.

    Attributes
    ----------
    iterations : list[IterationRecord]
        One record per extraction
    certificates : list[PigeonholeCertificate]
        The certificate behind each extraction
    parts : list[MatSet]
        The extracted V_i, in order
    a : MatSet
        Input set
    b : MatSet
        Remaining set with small multiplicative energy
    c : MatSet
        Union of the V_i
    m_used : float
        The parameter M
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    iterations: list[IterationRecord] = Field(default_factory=list)
    certificates: list[PigeonholeCertificate] = Field(default_factory=list)
    parts: list[MatSet] = Field(default_factory=list)
    a: MatSet
    b: MatSet
    c: MatSet
    m_used: float


def _mass(f: np.ndarray, w: np.ndarray) -> float:
    """sum f w, exact for integer inputs."""
    if np.issubdtype(f.dtype, np.integer) and np.issubdtype(w.dtype, np.integer):
        return exact_dot(f, w)
    return float(np.dot(f, w))


def dyadic_pigeonhole(
    domain, f, w=None, max_value: Optional[float] = None
) -> DyadicLevelResult:
    """
    Select the dyadic level of f carrying the most f w mass.

    Values below K / (2W) are discarded; the rest fall into levels
    [2^j, 2^(j+1)). The level with maximal contribution wins, ties going to
    the lower level, and tau = max(2^j, K / (2W)).
    Dropping the low values keeps K / (2W) <= tau <= max f, at the cost of
    choosing a different level than plain pigeonholing would when the
    heaviest level lies below the threshold.

    Parameters
    ----------
    domain : array-like
        Keys of the domain
    f : array-like
        Nonnegative values, aligned with domain
    w : array-like, optional
        Positive weights; defaults to 1
    max_value : float, optional
        Upper bound M on f, logged only

    Returns
    -------
    DyadicLevelResult
        The chosen level

    Raises
    ------
    EmptyDomainError
        The domain is empty
    ZeroMassError
        sum f w = 0
    """
    domain = np.asarray(domain)
    f = np.asarray(f)
    w = np.ones(f.shape, dtype=np.int64) if w is None else np.asarray(w)
    if domain.size == 0:
        raise EmptyDomainError("Dyadic pigeonholing over an empty domain")
    total_mass = _mass(f, w)
    if total_mass <= 0:
        raise ZeroMassError("Dyadic pigeonholing of a function with zero mass")
    total_weight = float(w.sum())
    threshold = total_mass / (2 * total_weight)

    candidates = (f >= threshold) & (f > 0)
    levels = np.full(f.shape, -(10**9), dtype=np.int64)
    levels[candidates] = np.floor(np.log2(f[candidates].astype(np.float64))).astype(np.int64)

    best_level, best_mass = None, -1.0
    for level in np.unique(levels[candidates]):
        mask = levels == level
        mass = _mass(f[mask], w[mask])
        if mass > best_mass:
            best_level, best_mass = int(level), mass

    tau = max(2.0**best_level, threshold)
    members = [int(x) for x in domain[levels == best_level]]
    if max_value is not None:
        logger.debug(
            f"Dyadic level 2^{best_level}: tau={tau}, mass {best_mass} of {total_mass}, "
            f"guaranteed {total_mass / (2 + 2 * math.log2(max(max_value, 1))):.3f}"
        )
    return DyadicLevelResult(
        members=members,
        tau=tau,
        level=best_level,
        contribution=best_mass,
        total_mass=total_mass,
        total_weight=total_weight,
    )


def _require_invertible(X: MatSet) -> None:
    if len(X) < 2:
        raise TooSmallError(f"Need at least two matrices, got {len(X)}")
    if not X.is_invertible():
        raise NotInvertibleSetError("Set must lie inside GL2")


def energy_pigeonhole(X: MatSet) -> PigeonholeCertificate:
    """
    Find X_*, D, tau, kappa with a recorded branch.

    D is a dyadic level set of r_XX. Row counts A_x = |{y : xy in D}| are
    pigeonholed to (V, kappa1). When |V| >= kappa1 / sqrt(ln|X|) the branch
    is DXinv with X_* = V; otherwise column counts B_y over x in V give
    (U, kappa2) and the branch is XinvD with X_* = U.

    Raises
    ------
    NotInvertibleSetError
        X is not inside GL2
    TooSmallError
        |X| < 2
    CertificateError
        The certificate fails its recount
    """
    _require_invertible(X)
    field = X.field
    size = len(X)
    r = rep_function(X, X, Op.MUL)
    support = np.flatnonzero(r.counts)
    values = r.counts[support]
    e_times = r.second_moment()

    level = dyadic_pigeonhole(support, values, values, max_value=size)
    D = MatSet(field, np.array(level.members, dtype=np.int64))
    tau = level.tau

    in_d = D.bitmap[mat2.mat_mul(X.indices[:, None], X.indices[None, :], field)]
    row_counts = in_d.sum(axis=1)
    p1_size = int(row_counts.sum())
    rows = dyadic_pigeonhole(X.indices, row_counts, max_value=size)
    V = MatSet(field, np.array(rows.members, dtype=np.int64))
    kappa1 = rows.tau

    log_x = math.log(size)
    common = dict(
        d=D, tau=tau, x_size=size, e_times_x=e_times, p1_size=p1_size, v_size=len(V), kappa1=kappa1
    )
    if len(V) >= kappa1 / math.sqrt(log_x):
        certificate = PigeonholeCertificate(x_star=V, kappa=kappa1, branch=Branch.DX_INV, **common)
    else:
        in_v = V.bitmap[X.indices]
        column_counts = in_d[in_v].sum(axis=0)
        columns = dyadic_pigeonhole(X.indices, column_counts, max_value=size)
        U = MatSet(field, np.array(columns.members, dtype=np.int64))
        certificate = PigeonholeCertificate(
            x_star=U,
            kappa=columns.tau,
            branch=Branch.XINV_D,
            p2_size=int(column_counts.sum()),
            u_size=len(U),
            kappa2=columns.tau,
            **common,
        )
        if len(U) < columns.tau / math.sqrt(log_x):
            logger.info(
                f"Case-2 subset below kappa2/sqrt(ln|X|): |U|={len(U)}, kappa2={columns.tau}"
            )

    if not verify_certificate(certificate, X):
        raise CertificateError(f"Pigeonhole certificate failed its recount (|X|={size})")
    return certificate


def verify_certificate(certificate: PigeonholeCertificate, X: MatSet) -> bool:
    """Recount r_XX on D and the branch representation function on X_*."""
    r_xx = rep_function(X, X, Op.MUL).counts[certificate.d.indices]
    tau = certificate.tau
    if not np.all((tau <= r_xx) & (r_xx < 2 * tau)):
        return False
    if not certificate.x_star.issubset(X):
        return False
    X_inv = set_inverse(X)
    if certificate.branch == Branch.DX_INV:
        branch_counts = rep_function(certificate.d, X_inv, Op.MUL)
    else:
        branch_counts = rep_function(X_inv, certificate.d, Op.MUL)
    return bool(np.all(branch_counts.counts[certificate.x_star.indices] >= certificate.kappa))


def pigeonhole_ratios(certificate: PigeonholeCertificate) -> dict[str, float]:
    """
    Each inequality of the energy pigeonhole evaluated with constant 1.

    A ratio >= 1 means the inequality holds with constant 1 (upper bounds
    are inverted so the same reading applies).
    """
    n = certificate.x_size
    e = certificate.e_times_x
    log_x = math.log(n)
    x_star = len(certificate.x_star)
    d = len(certificate.d)
    tau, kappa = certificate.tau, certificate.kappa
    ratios = {
        "tau_lower": tau / (e / (2 * n * n)),
        "tau_upper": n / tau,
        "d_lower": d / (e / (tau * tau * log_x)),
        "d_upper": (log_x**6 * x_star**4 / e) / d,
        "x_star_squared_lower": x_star**2 / (e / (n * log_x**3.5)),
        "kappa_lower": kappa / (d * tau / (x_star * log_x**2)),
        "x_star_vs_kappa": x_star / (kappa / math.sqrt(log_x)),
    }
    logger.info(
        "Pigeonhole ratios: " + ", ".join(f"{k}={v:.4g}" for k, v in ratios.items())
    )
    return ratios


def low_energy_subset(X: MatSet) -> LowEnergySubset:
    """
    X_* from the energy pigeonhole with its exact additive energy.

    The size lower bound and the energy upper bound of the extractor are
    evaluated with constant 1 and logged.
    """
    certificate = energy_pigeonhole(X)
    x_star = certificate.x_star
    e_plus = additive_energy(x_star)

    q = X.field.q
    n, e, size = len(X), certificate.e_times_x, len(x_star)
    log_x = math.log(n)
    size_bound = math.sqrt(e) / (math.sqrt(n) * log_x**1.75)
    energy_bound = (size**4 * n**6 * log_x**2) / (q**4 * e * e) + (
        q**6.5 * size**3 * n * log_x**5
    ) / e
    logger.info(
        f"Low-energy subset |X_*|={size} (bound {size_bound:.4g}), "
        f"E+(X_*)={e_plus} (bound {energy_bound:.4g}, ratio {e_plus / energy_bound:.4g})"
    )
    return LowEnergySubset(x_star=x_star, certificate=certificate, e_plus=e_plus)


def param_M(size_a: int, q: int) -> float:
    """
    min{q^(4/3) / (|A|^(1/3) L^(2/3)), |A|^(4/5) / (q^(13/5) L^(27/10))}
    with L = ln|A|, clamped to [1, |A|].

    Raises
    ------
    TooSmallError
        |A| < 2
    """
    if size_a < 2:
        raise TooSmallError(f"M(|A|) needs |A| >= 2, got {size_a}")
    log_a = math.log(size_a)
    first = q ** (4 / 3) / (size_a ** (1 / 3) * log_a ** (2 / 3))
    second = size_a ** (4 / 5) / (q ** (13 / 5) * log_a ** (27 / 10))
    return min(max(min(first, second), 1.0), float(size_a))


def bw_decompose(A: MatSet, M: Optional[float] = None) -> DecompositionTrace:
    """
    Split A into B (small multiplicative energy) and C (union of
    low-additive-energy pieces).

    While E_x(S_i) > |A|^3 / M, extract V_i = X_* of S_i and continue with
    S_i minus V_i.

    Parameters
    ----------
    A : MatSet
        Subset of GL2 with at least two elements
    M : float, optional
        Halting parameter; defaults to param_M(|A|, q)

    Returns
    -------
    DecompositionTrace
        The partition and every certificate

    Raises
    ------
    InternalStallError
        An extraction returned an empty subset
    """
    _require_invertible(A)
    size = len(A)
    m_used = param_M(size, A.field.q) if M is None else float(M)
    limit = size**3
    logger.info(f"Decomposing |A|={size} over F_{A.field.q} with M={m_used:.6g}")

    S = A
    iterations: list[IterationRecord] = []
    certificates: list[PigeonholeCertificate] = []
    parts: list[MatSet] = []
    while True:
        e_times = multiplicative_energy(S)
        if e_times * m_used <= limit:
            break
        extracted = low_energy_subset(S)
        V = extracted.x_star
        if not len(V):
            raise InternalStallError(f"Empty extraction at step {len(iterations) + 1}")
        certificate = extracted.certificate
        pigeonhole_ratios(certificate)
        iterations.append(
            IterationRecord(
                i=len(iterations) + 1,
                s_size=len(S),
                e_times_s=e_times,
                tau=certificate.tau,
                kappa=certificate.kappa,
                branch=certificate.branch,
                d_size=len(certificate.d),
                x_star_size=len(V),
                e_plus_x_star=extracted.e_plus,
            )
        )
        certificates.append(certificate)
        parts.append(V)
        logger.info(f"Step {len(iterations)}: |S|={len(S)}, E_x={e_times}, |V|={len(V)}")
        S = difference(S, V)

    C = union(*parts) if parts else MatSet.empty(A.field)
    return DecompositionTrace(
        iterations=iterations,
        certificates=certificates,
        parts=parts,
        a=A,
        b=S,
        c=C,
        m_used=m_used,
    )


def trace_summary(trace: DecompositionTrace) -> TraceSummary:
    """Final energies of B and C with the bound ratios logged."""
    b, c = trace.b, trace.c
    size = len(trace.a)
    q = trace.a.field.q
    m = trace.m_used
    e_plus_b, e_times_b = additive_energy(b), multiplicative_energy(b)
    e_plus_c, e_times_c = additive_energy(c), multiplicative_energy(c)

    target = size**3 / m
    log_a = math.log(size)
    c_bound = m * m * size**4 * log_a**2 / q**4 + m**1.5 * size * q**6.5 * log_a**6.75
    ratios = {
        "controlled": max(e_times_b, e_plus_c) / target,
        "stated": max(e_plus_b, e_times_c) / target,
        "e_plus_c_bound": e_plus_c / c_bound,
    }
    logger.info(
        "Decomposition ratios: " + ", ".join(f"{k}={v:.4g}" for k, v in ratios.items())
    )
    return TraceSummary(
        b_size=len(b),
        c_size=len(c),
        e_plus_b=e_plus_b,
        e_times_b=e_times_b,
        e_plus_c=e_plus_c,
        e_times_c=e_times_c,
        m_used=m,
        iterations=len(trace.iterations),
        ratios=ratios,
    )


def subadditivity_gap(parts: list[MatSet]) -> tuple[int, float]:
    """E+(union of parts) and (sum E+(V_i)^(1/4))^4."""
    whole = union(*parts)
    lhs = additive_energy(whole)
    rhs = sum(additive_energy(p) ** 0.25 for p in parts) ** 4
    return lhs, rhs
