"""The p-transportation distance on multi-species measures and its audits.

Implements:
  * wasserstein_p: p-th root of the optimal transport cost for the
    entrywise p-th power of a distance family.
  * check_mti: exhaustive check of the mixed triangle inequalities
    d_ik(x, z) <= d_ij(x, y) + d_jk(y, z) over all species and point
    triples of the supplied supports.
  * check_metric_axioms: the four hypotheses under which the distance is a
    true metric (blockwise symmetry, MTI, zero diagonal blocks on the
    diagonal, strictly positive off-diagonal blocks).
  * glue_plans: discrete gluing of two plans sharing a middle marginal via
    the canonical conditional-independence three-point measure; projecting
    out the middle yields a feasible plan whose cost certifies the
    triangle inequality whenever MTI holds.
  * tuple_distance: the induced distance on n-tuples of points (uniform
    Dirac masses, one species per coordinate; the LP optimum equals the
    best assignment because bistochastic extreme points are permutations).
  * mti_counterexample: measures that exhibit a triangle failure from any
    single MTI violation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, MiddleMarginalError, ProblemFormatError, VotError
from .measures import (
    CostTensor,
    MetricSpec,
    Point,
    SupportSet,
    VectorMeasure,
    union_support,
)
from .solver import CouplingTensor, SolveReport, solve_primal

_INF = float("inf")

#: strict-inequality cushion for exhaustive MTI checks
MTI_TOL = 1e-12


# ---------------------------------------------------------------------------
# W_p
# ---------------------------------------------------------------------------
def _require_distance_costs(spec: MetricSpec):
    if (spec.costs.blocks < 0).any():
        raise VotError("distance families must be nonnegative")


def transport_report(mu: VectorMeasure, nu: VectorMeasure, spec: MetricSpec) -> SolveReport:
    """Solve the W_p^p problem (costs raised to the p-th power)."""
    _require_distance_costs(spec)
    return solve_primal(mu, nu, spec.lp_costs())


def wasserstein_p(mu: VectorMeasure, nu: VectorMeasure, spec: MetricSpec) -> float:
    """The p-transportation distance (optimal cost of d^p, then 1/p root)."""
    report = transport_report(mu, nu, spec)
    value = report.primal_value
    if spec.p == 1.0 or not np.isfinite(value):
        return float(value)
    return float(value ** (1.0 / spec.p))


# ---------------------------------------------------------------------------
# MTI and metric axioms
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class MtiViolation:
    i: int
    j: int
    k: int
    x: str
    y: str
    z: str
    lhs: float  # d_ik(x, z)
    rhs: float  # d_ij(x, y) + d_jk(y, z)


@dataclass(frozen=True)
class MtiReport:
    satisfied: bool
    violations: tuple[MtiViolation, ...] = ()

    def __bool__(self) -> bool:
        return self.satisfied


def _square_metric(spec: MetricSpec) -> tuple[np.ndarray, SupportSet | None]:
    b = spec.costs.blocks
    if b.shape[2] != b.shape[3]:
        raise DimensionMismatchError(
            "metric audits need a square tensor (source and target supports equal)"
        )
    src, tgt = spec.costs.source_support, spec.costs.target_support
    if src is not None and tgt is not None and src.labels != tgt.labels:
        raise DimensionMismatchError(
            "metric audits need the same support on both sides"
        )
    return b, src


def _audit_indices(spec: MetricSpec, supports: Sequence[SupportSet] | None):
    d, declared = _square_metric(spec)
    if supports is None:
        labels = list(declared.labels) if declared is not None else [
            str(a) for a in range(d.shape[2])
        ]
        return d, np.arange(d.shape[2]), labels
    union = union_support(list(supports))
    if declared is None:
        raise DimensionMismatchError(
            "cost tensor carries no support labels; audit supports cannot be matched"
        )
    idx = []
    for p in union.points:
        try:
            idx.append(declared.index_of(p.label))
        except KeyError:
            raise ProblemFormatError(
                f"audit point {p.label!r} is not covered by the metric support"
            ) from None
    return d, np.array(idx, dtype=int), list(union.labels)


def check_mti(spec: MetricSpec, supports: Sequence[SupportSet] | None = None,
              *, tol: float = MTI_TOL) -> MtiReport:
    """Exhaustively check d_ik(x, z) <= d_ij(x, y) + d_jk(y, z).

    All species triples (i, j, k) and point triples (x, y, z) over the
    union of the supplied supports (or the full declared support) are
    enumerated; every violating triple is reported.
    """
    d, idx, labels = _audit_indices(spec, supports)
    sub = d[:, :, idx[:, None], idx[None, :]]
    lhs = sub[:, None, :, :, None, :]            # (i, j, k, x, y, z) <- d_ik(x, z)
    t1 = sub[:, :, None, :, :, None]             # d_ij(x, y)
    t2 = sub[None, :, :, None, :, :]             # d_jk(y, z)
    gap = lhs - t1 - t2
    bad = np.argwhere(gap > tol)
    violations = tuple(
        MtiViolation(
            int(i), int(j), int(k), labels[x], labels[y], labels[z],
            lhs=float(sub[i, k, x, z]),
            rhs=float(sub[i, j, x, y] + sub[j, k, y, z]),
        )
        for i, j, k, x, y, z in bad
    )
    return MtiReport(satisfied=not violations, violations=violations)


@dataclass(frozen=True)
class AxiomCheck:
    ok: bool
    violations: tuple = ()

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class MetricAxiomsReport:
    """One verdict per hypothesis of the metric theorem."""

    symmetry: AxiomCheck
    mti: MtiReport
    zero_diagonal: AxiomCheck
    off_diagonal_positive: AxiomCheck

    @property
    def all_ok(self) -> bool:
        return bool(self.symmetry and self.mti.satisfied and self.zero_diagonal
                    and self.off_diagonal_positive)


def check_metric_axioms(spec: MetricSpec, supports: Sequence[SupportSet] | None = None,
                        *, tol: float = MTI_TOL) -> MetricAxiomsReport:
    """Check the four metric hypotheses over the supplied supports.

    [1] every d_ij is symmetric; [2] MTI holds; [3] d_ii(x, x) = 0;
    [4] off-diagonal d_ij are strictly positive everywhere (an all-equal
    family fails here and only yields a pseudodistance).
    """
    d, idx, labels = _audit_indices(spec, supports)
    sub = d[:, :, idx[:, None], idx[None, :]]
    n, S = sub.shape[0], sub.shape[2]

    sym_bad = []
    asym = sub - np.swapaxes(sub, 2, 3)
    for i, j, x, y in np.argwhere(np.abs(asym) > tol):
        if x < y:
            sym_bad.append((int(i), int(j), labels[x], labels[y],
                            float(sub[i, j, x, y]), float(sub[i, j, y, x])))
    zero_bad = []
    for i in range(n):
        diag = np.diagonal(sub[i, i])
        for x in np.flatnonzero(np.abs(diag) > tol):
            zero_bad.append((int(i), labels[int(x)], float(diag[x])))
    pos_bad = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            for x, y in np.argwhere(sub[i, j] <= 0.0):
                pos_bad.append((int(i), int(j), labels[int(x)], labels[int(y)],
                                float(sub[i, j, x, y])))
    return MetricAxiomsReport(
        symmetry=AxiomCheck(not sym_bad, tuple(sym_bad)),
        mti=check_mti(spec, supports, tol=tol),
        zero_diagonal=AxiomCheck(not zero_bad, tuple(zero_bad)),
        off_diagonal_positive=AxiomCheck(not pos_bad, tuple(pos_bad)),
    )


# ---------------------------------------------------------------------------
# gluing
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class GluedPlan:
    """Composition of two plans through a shared middle measure.

    composed couples the outer measures; three_point lists the positive
    entries (i, j, k, a, b, c, mass) of the conditional-independence
    three-point measure whose (1,2) and (2,3) projections decompose the
    two input plans.
    """

    composed: CouplingTensor
    three_point: tuple[tuple[int, int, int, int, int, int, float], ...]


def glue_plans(plan_ab: CouplingTensor, plan_bc: CouplingTensor, nu: VectorMeasure,
               *, tol: float = 1e-8) -> GluedPlan:
    """Glue plan_ab in Pi(mu, nu) with plan_bc in Pi(nu, lam).

    For each middle atom y with nu_j(y) > 0 the incoming block masses are
    split by the outgoing density fractions (and vice versa); the
    three-point mass is the product of the split blocks over the shared
    middle mass, with 0/0 read as 0.  Projecting out the middle gives a
    feasible coupling of the outer measures.
    """
    n = plan_ab.species
    if plan_bc.species != n or nu.species != n:
        raise DimensionMismatchError("species counts of plans and middle measure disagree")
    if plan_ab.target_size != nu.size or plan_bc.source_size != nu.size:
        raise DimensionMismatchError("plan supports do not match the middle measure")
    mid_in = plan_ab.target_marginals()
    mid_out = plan_bc.source_marginals()
    err_in = float(np.abs(mid_in - nu.weights).max(initial=0.0))
    err_out = float(np.abs(mid_out - nu.weights).max(initial=0.0))
    if max(err_in, err_out) > tol:
        raise MiddleMarginalError(
            f"middle marginals disagree with the shared measure "
            f"(incoming off by {err_in:.3g}, outgoing off by {err_out:.3g})"
        )

    ab = plan_ab.dense()          # (n, n, M, K)
    bc = plan_bc.dense()          # (n, n, K, L)
    w = nu.weights                # (n, K)
    nu_in = ab.sum(axis=2)        # (i, j, y)
    nu_out = bc.sum(axis=3)       # (j, k, y)
    pos = w > 0.0
    f_in = np.divide(nu_in, w[None, :, :], out=np.zeros_like(nu_in),
                     where=pos[None, :, :])
    f_out = np.divide(nu_out, w[:, None, :], out=np.zeros_like(nu_out),
                      where=pos[:, None, :])
    # gstar[i,j,k,a,y] and gtil[i,j,k,y,c] split the plans by densities
    gstar = ab[:, :, None, :, :] * f_out[None, :, :, None, :]
    gtil = bc[None, :, :, :, :] * f_in[:, :, None, :, None]
    mid = f_in[:, :, None, :] * f_out[None, :, :, :] * w[None, :, None, :]
    ratio = np.divide(gtil, mid[:, :, :, :, None], out=np.zeros_like(gtil),
                      where=mid[:, :, :, :, None] > 0.0)
    pi = gstar[:, :, :, :, :, None] * ratio[:, :, :, None, :, :]
    composed_dense = pi.sum(axis=(1, 4))  # project out middle species and atom
    composed = CouplingTensor.from_dense(composed_dense)
    three_point = tuple(
        (int(i), int(j), int(k), int(a), int(b), int(c), float(pi[i, j, k, a, b, c]))
        for i, j, k, a, b, c in np.argwhere(pi > 0.0)
    )
    return GluedPlan(composed=composed, three_point=three_point)


def three_point_cost(glued: GluedPlan, spec_ab: MetricSpec, spec_bc: MetricSpec) -> tuple[float, float]:
    """Leg costs of the three-point measure (for the triangle bound)."""
    p = spec_ab.p
    dab = spec_ab.lp_costs().blocks
    dbc = spec_bc.lp_costs().blocks
    cost_ab = sum(m * dab[i, j, a, b] for i, j, k, a, b, c, m in glued.three_point)
    cost_bc = sum(m * dbc[j, k, b, c] for i, j, k, a, b, c, m in glued.three_point)
    return float(cost_ab) ** (1.0 / p), float(cost_bc) ** (1.0 / p)


# ---------------------------------------------------------------------------
# tuple distance
# ---------------------------------------------------------------------------
def dirac_tuple_measure(points: SupportSet | Sequence[Point]) -> VectorMeasure:
    """Uniform n-species Dirac tuple: species i carries mass 1/n at point i."""
    support = points if isinstance(points, SupportSet) else SupportSet(points)
    n = support.size
    return VectorMeasure(support, np.eye(n) / n)


def tuple_distance(x: SupportSet | Sequence[Point], y: SupportSet | Sequence[Point],
                   spec: MetricSpec) -> float:
    """Distance between two n-tuples of points.

    Solves the transport problem between the uniform Dirac tuples; the
    optimum is 1/n times the best bistochastic relaxation value, which is
    attained at a permutation.
    """
    mu = dirac_tuple_measure(x)
    nu = dirac_tuple_measure(y)
    n = spec.species
    if mu.species != n or nu.species != n:
        raise DimensionMismatchError(
            f"tuples must list exactly {n} points (one per species)"
        )
    return wasserstein_p(mu, nu, spec)


# ---------------------------------------------------------------------------
# counterexample generator
# ---------------------------------------------------------------------------
def mti_counterexample(support: SupportSet, species: int, violation: MtiViolation
                       ) -> tuple[VectorMeasure, VectorMeasure, VectorMeasure]:
    """Measures exhibiting the triangle failure behind one MTI violation.

    Two Diracs bridge the violating triple: mu puts species i at x, nu
    species j at y, lam species k at z.  Then W_p(mu, nu) = d_ij(x, y),
    W_p(nu, lam) = d_jk(y, z) and W_p(mu, lam) = d_ik(x, z) > sum.
    """
    def dirac(i: int, label: str) -> VectorMeasure:
        w = np.zeros((species, support.size))
        w[i, support.index_of(label)] = 1.0
        return VectorMeasure(support, w)

    return (
        dirac(violation.i, violation.x),
        dirac(violation.j, violation.y),
        dirac(violation.k, violation.z),
    )
