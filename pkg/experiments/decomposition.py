"""The energy decomposition and its pigeonhole step."""

from core.decomp import (
    bw_decompose,
    energy_pigeonhole,
    pigeonhole_ratios,
    trace_summary,
    verify_certificate,
)
from core.setalg import additive_energy, difference, intersection, multiplicative_energy, union
from experiments.catalog import Catalog, RunContext

catalog = Catalog()


def _certificates_hold(trace) -> bool:
    """Recount every certificate against the set it was extracted from."""
    S = trace.a
    for certificate, part in zip(trace.certificates, trace.parts):
        if not verify_certificate(certificate, S):
            return False
        S = difference(S, part)
    return True


@catalog.experiment(
    "decompose",
    aliases=("decompose_thm21",),
    cites="A = B u C with max{E+(B), E_x(C)} << |A|^3 / M(|A|)",
    default_q="3",
)
def decompose(ctx: RunContext):
    """Decompose random subsets of GL2 and check every step exactly."""
    M = ctx.param("M")
    M = None if M is None else float(M)
    if ctx.has_set("a"):
        sources = [(0, ctx.load_set("a"))]
    else:
        size = ctx.size(24)
        sources = [
            (trial, ctx.random_set(size, ctx.trial_seed(trial), invertible=True))
            for trial in range(ctx.trials(20))
        ]

    rows = []
    for trial, A in sources:
        trace = bw_decompose(A, M)
        summary = trace_summary(trace)
        size = len(A)
        rows.append(
            {
                "trial": trial,
                "size": size,
                **summary.model_dump(exclude={"ratios"}),
                "ratio_controlled": summary.ratios["controlled"],
                "ratio_stated": summary.ratios["stated"],
                "ratio_e_plus_c_bound": summary.ratios["e_plus_c_bound"],
                "partition": union(trace.b, trace.c) == A
                and len(intersection(trace.b, trace.c)) == 0,
                "halted": summary.e_times_b * summary.m_used <= size**3,
                "iterations_bounded": summary.iterations <= size,
                "certificates": _certificates_hold(trace),
                "steps": [record.model_dump(mode="json") for record in trace.iterations],
            }
        )

    flags = ["partition", "halted", "iterations_bounded", "certificates"]
    return ctx.report(
        {
            "trials": len(rows),
            "m_used": rows[0]["m_used"],
            "max_iterations": max(row["iterations"] for row in rows),
        },
        bounds={"target": ctx.bound(rows[0]["size"] ** 3 / rows[0]["m_used"])},
        ratios={
            "max_controlled": max(row["ratio_controlled"] for row in rows),
            "max_stated": max(row["ratio_stated"] for row in rows),
            "max_e_plus_c_bound": max(row["ratio_e_plus_c_bound"] for row in rows),
        },
        pass_flags={flag: all(row[flag] for row in rows) for flag in flags},
        rows=rows,
    )


@catalog.experiment(
    "pigeonhole",
    cites="A subset X_* of X certified by a dyadic level of r_XX and a lower bound kappa",
)
def pigeonhole(ctx: RunContext):
    """One energy pigeonhole step on a set, with its certificate recounted."""
    X = ctx.load_set("a", "construction:FullGL2")
    certificate = energy_pigeonhole(X)
    ratios = pigeonhole_ratios(certificate)
    x_star = certificate.x_star
    measured = {
        "x_size": certificate.x_size,
        "e_times_x": certificate.e_times_x,
        "d_size": len(certificate.d),
        "tau": certificate.tau,
        "kappa": certificate.kappa,
        "kappa1": certificate.kappa1,
        "kappa2": certificate.kappa2,
        "branch": certificate.branch.value,
        "x_star_size": len(x_star),
        "x_star_is_x": x_star == X,
        "e_plus_x_star": additive_energy(x_star),
        "e_times_x_star": multiplicative_energy(x_star),
    }
    return ctx.report(
        measured,
        ratios=ratios,
        pass_flags={"certificate": verify_certificate(certificate, X)},
    )
