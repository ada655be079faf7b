"""Constructions showing the growth statements cannot be improved."""

import math

from core import gf
from core.constructions import (
    det_subgroup_set,
    int_list,
    lower_triangular,
    sharpness_a_plus_b_c,
    sharpness_ab_plus_c,
    singular_c,
    subspace_V,
)
from core.errors import BadParametersError
from core.setalg import MatSet, set_inverse, set_prod, set_sum
from experiments.catalog import Catalog, RunContext, ratio

catalog = Catalog()


def _growth_bound(ctx: RunContext, *sets: MatSet) -> float:
    return min(ctx.q**4, math.prod(len(s) for s in sets) / ctx.q**6.5)


@catalog.experiment(
    "sharpness_ab_plus_c",
    cites="|A||B||C| = q^(10 - delta) while |AB + C| = |C| = q^(4 - delta)",
    default_q="4",
)
def ab_plus_c(ctx: RunContext):
    """Lower-triangular A = B against C with its (1, 2) entry in X."""
    q = ctx.q
    X = int_list(ctx.param("X", "0,1"))
    A, B, C = sharpness_ab_plus_c(ctx.field, X)
    AB = set_prod(A, B)
    result = set_sum(AB, C)
    predicted = q**3 * len(set(X))
    measured = {
        "size_a": len(A),
        "size_b": len(B),
        "size_c": len(C),
        "ab_plus_c": len(result),
        "predicted": predicted,
    }
    return ctx.report(
        measured,
        bounds={"growth": ctx.bound(_growth_bound(ctx, A, B, C))},
        ratios={"ab_plus_c": ratio(len(result), _growth_bound(ctx, A, B, C))},
        pass_flags={
            "sizes_match": len(A) == len(B) == q**3 and len(C) == predicted,
            "ab_plus_c_is_c": result == C,
            "ab_lower_triangular": AB.issubset(lower_triangular(ctx.field)),
        },
    )


@catalog.experiment(
    "sharpness_a_plus_b_c",
    cites="|A||B||C| = q^(10 - 2/k) while |(A + B)C| = q^(4 - 1/k)",
    default_q="2^2",
)
def a_plus_b_c(ctx: RunContext):
    """Subspace-valued A = B against C with prime-field second column."""
    field = ctx.field
    p, k = field.p, field.k
    if k < 2:
        raise BadParametersError(f"The subspace construction needs k >= 2, got q = {ctx.q}")
    A, B, C = sharpness_a_plus_b_c(p, k)
    V = set(int(v) for v in subspace_V(A.field))
    add = gf.tables(A.field).add
    closed = all(int(add[x, y]) in V for x in V for y in V) and all(
        int(gf.mul(x, s, A.field)) in V for x in V for s in gf.prime_subfield(A.field)
    )
    A_plus_B = set_sum(A, B)
    result = set_prod(A_plus_B, C)
    measured = {
        "size_a": len(A),
        "size_b": len(B),
        "size_c": len(C),
        "product": len(A) * len(B) * len(C),
        "a_plus_b_c": len(result),
        "predicted_product": p ** (10 * k - 2),
        "predicted": p ** (4 * k - 1),
    }
    return ctx.report(
        measured,
        bounds={"growth": ctx.bound(_growth_bound(ctx, A, B, C))},
        ratios={"a_plus_b_c": ratio(len(result), _growth_bound(ctx, A, B, C))},
        pass_flags={
            "product_matches": measured["product"] == measured["predicted_product"],
            "a_plus_b_c_matches": len(result) == measured["predicted"],
            "subspace_closed": closed,
            "a_plus_b_is_a": A_plus_B == A,
        },
    )


@catalog.experiment(
    "sharpness_det_subgroup",
    cites="|A| ~ q^3 |G| and |AA| = |A| for matrices with determinant in G",
    default_q="5",
)
def det_subgroup(ctx: RunContext):
    """Matrices with determinant in a subgroup G form a group."""
    field = ctx.field
    default = sorted({1, gf.neg(1, field)})
    G = int_list(ctx.param("G", ",".join(str(g) for g in default)))
    A = det_subgroup_set(field, G)
    AA = set_prod(A, A)
    predicted = len(set(G)) * (ctx.q**3 - ctx.q)
    return ctx.report(
        {"size_g": len(set(G)), "size_a": len(A), "size_aa": len(AA), "predicted": predicted},
        pass_flags={
            "size_matches": len(A) == predicted,
            "aa_is_a": AA == A,
            "closed_under_inverse": set_inverse(A) == A,
        },
    )


@catalog.experiment(
    "sharpness_singular_c",
    cites="Growth of (A + B)C fails without C inside GL2",
    default_q="3",
)
def singular(ctx: RunContext):
    """A = B = M2 and C the singular matrices: (A + B)C stays singular."""
    q = ctx.q
    A, B, C = singular_c(ctx.field)
    result = set_prod(set_sum(A, B), C)
    singular_count = q**4 - (q * q - 1) * (q * q - q)
    measured = {
        "size_c": len(C),
        "product": len(A) * len(B) * len(C),
        "a_plus_b_c": len(result),
        "singular_count": singular_count,
    }
    return ctx.report(
        measured,
        bounds={"growth": ctx.bound(_growth_bound(ctx, A, B, C))},
        ratios={"a_plus_b_c": ratio(len(result), _growth_bound(ctx, A, B, C))},
        pass_flags={"a_plus_b_c_is_singular": result == C and len(C) == singular_count},
    )
