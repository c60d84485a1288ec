"""Primal solver for the multi-species Kantorovich problem.

The vector problem on finite supports is flattened to one scalar
transportation LP: every (species, atom) pair with positive mass becomes a
flat source or sink, and the flat cost between source (i, a) and sink
(j, b) is block (i, j) evaluated at (a, b).  Feasible couplings of the
vector problem correspond one-to-one to feasible flows of the flat
problem, with equal cost, so the network simplex engine solves (and
certifies) the vector problem directly.

An exhaustive brute-force oracle is provided for flat instances up to
6 x 6; it enumerates basic feasible solutions of the transportation
polytope and is the reference the simplex engine is tested against.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _oracle
from ._simplex import transportation_simplex
from .dual import PotentialPair, dual_value
from .errors import (
    DimensionMismatchError,
    MassMismatchError,
    MeasureValidationError,
    OracleSizeError,
)
from .measures import (
    MASS_TOL,
    CostTensor,
    VectorMeasure,
    require_matching_mass,
    validate_measure,
)

_INF = float("inf")

#: marginal feasibility tolerance for couplings
FEAS_TOL = 1e-8
#: relative duality-gap tolerance certified by SolveReport
GAP_TOL = 1e-8


# ---------------------------------------------------------------------------
# couplings
# ---------------------------------------------------------------------------
class CouplingTensor:
    """Sparse n x n family of M x N nonnegative mass matrices.

    Entries are (i, j, a, b, mass) tuples sorted lexicographically; block
    (i, j) moves species-i mass at source atom a into species-j mass at
    target atom b.
    """

    __slots__ = ("species", "source_size", "target_size", "entries")

    def __init__(self, species: int, source_size: int, target_size: int, entries):
        clean = []
        for i, j, a, b, mass in entries:
            if mass < 0:
                raise MeasureValidationError(
                    f"negative plan mass at block ({i + 1},{j + 1}), pair ({a + 1},{b + 1})"
                )
            if mass > 0.0:
                clean.append((int(i), int(j), int(a), int(b), float(mass)))
        clean.sort()
        self.species = species
        self.source_size = source_size
        self.target_size = target_size
        self.entries = tuple(clean)

    @classmethod
    def from_dense(cls, blocks) -> "CouplingTensor":
        arr = np.asarray(blocks, dtype=float)
        n, n2, m, k = arr.shape
        if n != n2:
            raise DimensionMismatchError("coupling blocks must form a square species grid")
        entries = [
            (int(i), int(j), int(a), int(b), float(arr[i, j, a, b]))
            for i, j, a, b in np.argwhere(arr != 0.0)
        ]
        return cls(n, m, k, entries)

    def dense(self) -> np.ndarray:
        out = np.zeros((self.species, self.species, self.source_size, self.target_size))
        for i, j, a, b, mass in self.entries:
            out[i, j, a, b] = mass
        return out

    def source_marginals(self) -> np.ndarray:
        """(n, M) array: sum over target species and atoms."""
        out = np.zeros((self.species, self.source_size))
        for i, _, a, _, mass in self.entries:
            out[i, a] += mass
        return out

    def target_marginals(self) -> np.ndarray:
        """(n, N) array: sum over source species and atoms."""
        out = np.zeros((self.species, self.target_size))
        for _, j, _, b, mass in self.entries:
            out[j, b] += mass
        return out

    def total_cost(self, cost: CostTensor) -> float:
        blocks = cost.blocks
        return float(sum(mass * blocks[i, j, a, b] for i, j, a, b, mass in self.entries))

    def total_mass(self) -> float:
        return float(sum(e[4] for e in self.entries))

    def __eq__(self, other) -> bool:
        return isinstance(other, CouplingTensor) and self.entries == other.entries

    def __repr__(self) -> str:
        return (
            f"CouplingTensor(n={self.species}, entries={len(self.entries)}, "
            f"mass={self.total_mass():.6g})"
        )


def coupling_residuals(plan: CouplingTensor, mu: VectorMeasure, nu: VectorMeasure) -> float:
    """Largest absolute deviation of the plan's species-marginals."""
    res_src = np.abs(plan.source_marginals() - mu.weights).max(initial=0.0)
    res_tgt = np.abs(plan.target_marginals() - nu.weights).max(initial=0.0)
    return float(max(res_src, res_tgt))


def product_plan(mu: VectorMeasure, nu: VectorMeasure, *, mass_tol: float = MASS_TOL) -> CouplingTensor:
    """Independence coupling gamma_ij(a, b) = mu_i(a) nu_j(b) / total mass.

    For probability measures the divisor is 1 and this is the plain
    product; the divisor keeps the marginal constraints exact in the
    relaxed equal-mass mode.
    """
    require_matching_mass(mu, nu, tol=mass_tol)
    total = mu.total_mass
    if total <= 0.0:
        return CouplingTensor(mu.species, mu.size, nu.size, [])
    blocks = np.einsum("ia,jb->ijab", mu.weights, nu.weights) / total
    return CouplingTensor.from_dense(blocks)


# ---------------------------------------------------------------------------
# flattening
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class FlatProblem:
    """Scalar transportation instance equivalent to the vector problem.

    sources/sinks list (species, atom, mass) for every positive-mass line;
    zero-mass lines are dropped here and reinstated as zero rows when a
    flat flow is folded back into a CouplingTensor.
    """

    sources: tuple[tuple[int, int, float], ...]
    sinks: tuple[tuple[int, int, float], ...]
    cost: np.ndarray  # (len(sources), len(sinks))

    @property
    def supply(self) -> np.ndarray:
        return np.array([m for _, _, m in self.sources])

    @property
    def demand(self) -> np.ndarray:
        return np.array([m for _, _, m in self.sinks])


def _check_dimensions(mu: VectorMeasure, nu: VectorMeasure, cost: CostTensor):
    if mu.species != nu.species or mu.species != cost.species:
        raise DimensionMismatchError(
            f"species counts disagree: source {mu.species}, target {nu.species}, "
            f"cost {cost.species}"
        )
    if cost.source_size != mu.size or cost.target_size != nu.size:
        raise DimensionMismatchError(
            f"cost blocks are {cost.source_size} x {cost.target_size} but measures "
            f"have {mu.size} and {nu.size} atoms"
        )


def _require_valid(mu: VectorMeasure, nu: VectorMeasure):
    for name, m in (("source", mu), ("target", nu)):
        verdict = validate_measure(m, unit_mass=False)
        if not verdict.ok:
            raise MeasureValidationError(
                f"{name} measure invalid: " + "; ".join(map(str, verdict.violations))
            )


def flatten(mu: VectorMeasure, nu: VectorMeasure, cost: CostTensor) -> FlatProblem:
    """Flatten the vector instance to its scalar transportation problem."""
    _check_dimensions(mu, nu, cost)
    require_matching_mass(mu, nu)
    sources = tuple(
        (i, a, float(mu.weights[i, a]))
        for i in range(mu.species)
        for a in range(mu.size)
        if mu.weights[i, a] > 0.0
    )
    sinks = tuple(
        (j, b, float(nu.weights[j, b]))
        for j in range(nu.species)
        for b in range(nu.size)
        if nu.weights[j, b] > 0.0
    )
    flat_cost = np.empty((len(sources), len(sinks)))
    for s, (i, a, _) in enumerate(sources):
        for t, (j, b, _) in enumerate(sinks):
            flat_cost[s, t] = cost.blocks[i, j, a, b]
    return FlatProblem(sources=sources, sinks=sinks, cost=flat_cost)


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------
class Status(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"


@dataclass
class SolveReport:
    """Primal value, plan, certified potentials and diagnostics."""

    status: Status
    primal_value: float
    plan: CouplingTensor | None
    potentials: PotentialPair | None
    gap: float
    pivots: int

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


def _extend_potentials(flat: FlatProblem, u, v, cost: CostTensor,
                       mu: VectorMeasure, nu: VectorMeasure) -> PotentialPair:
    """Potentials for every atom, including zero-mass ones.

    Solved atoms take the simplex duals.  Dropped sinks get the largest
    value compatible with the solved sources; dropped sources then take
    the largest value compatible with every finite sink potential;
    finally any sink still at +inf (all costs to it from solved sources
    were +inf) is lowered against the full source potentials.  Each step
    only tightens against mins of c - potential, so the pair stays
    feasible for the whole cost tensor.
    """
    n, M, N = mu.species, mu.size, nu.size
    blocks = cost.blocks
    phi = np.full((n, M), np.nan)
    psi = np.full((n, N), np.nan)
    for s, (i, a, _) in enumerate(flat.sources):
        phi[i, a] = u[s]
    for t, (j, b, _) in enumerate(flat.sinks):
        psi[j, b] = v[t]

    solved_src = [(i, a) for i, a in np.argwhere(~np.isnan(phi))]
    for j, b in np.argwhere(np.isnan(psi)):
        cands = [blocks[i, j, a, b] - phi[i, a] for i, a in solved_src]
        psi[j, b] = min(cands, default=_INF)
    for i, a in np.argwhere(np.isnan(phi)):
        cands = [
            blocks[i, j, a, b] - psi[j, b]
            for j in range(n)
            for b in range(N)
            if np.isfinite(psi[j, b])
        ]
        phi[i, a] = min(cands, default=0.0)
    for j, b in np.argwhere(np.isinf(psi)):
        cands = [blocks[i, j, a, b] - phi[i, a] for i in range(n) for a in range(M)]
        psi[j, b] = min(cands, default=_INF)

    # reporting normalization: shift so min phi is exactly 0
    shift = float(phi.min()) if phi.size else 0.0
    phi = phi - shift
    psi = psi + shift
    return PotentialPair(phi=phi, psi=psi)


def solve_primal(mu: VectorMeasure, nu: VectorMeasure, cost: CostTensor,
                 *, mass_tol: float = MASS_TOL) -> SolveReport:
    """Solve the vector Kantorovich problem to optimality.

    Returns a report whose potentials certify the plan: feasible in the
    dual, complementary-slack on the plan support, duality gap at most
    GAP_TOL relative.  Deterministic: identical inputs give identical
    plans.  Status is INFEASIBLE only when +inf costs block every plan.
    """
    _check_dimensions(mu, nu, cost)
    _require_valid(mu, nu)
    require_matching_mass(mu, nu, tol=mass_tol)
    total = mu.total_mass
    if total <= 0.0:
        pp = PotentialPair(phi=np.zeros((mu.species, mu.size)),
                           psi=np.zeros((nu.species, nu.size)))
        return SolveReport(Status.OPTIMAL, 0.0,
                           CouplingTensor(mu.species, mu.size, nu.size, []),
                           pp, 0.0, 0)

    flat = flatten(mu, nu, cost)
    sol = transportation_simplex(flat.supply, flat.demand, flat.cost)
    if sol.inf_flow > 1e-9 * max(1.0, total):
        return SolveReport(Status.INFEASIBLE, _INF, None, None, float("nan"), sol.pivots)

    entries = []
    for s, t in np.argwhere(sol.flows > 0.0):
        i, a, _ = flat.sources[s]
        j, b, _ = flat.sinks[t]
        entries.append((i, j, a, b, float(sol.flows[s, t])))
    plan = CouplingTensor(mu.species, mu.size, nu.size, entries)
    value = plan.total_cost(cost)

    pp = _extend_potentials(flat, sol.u, sol.v, cost, mu, nu)
    gap = value - dual_value(pp, mu, nu)
    if abs(gap) > GAP_TOL * (1.0 + abs(value)):
        raise RuntimeError(
            f"certification failed: duality gap {gap!r} exceeds tolerance for value {value!r}"
        )
    return SolveReport(Status.OPTIMAL, value, plan, pp, float(gap), sol.pivots)


# ---------------------------------------------------------------------------
# reference oracle
# ---------------------------------------------------------------------------
#: largest flat side the oracle accepts
ORACLE_MAX_SIDE = 6


def brute_force_oracle(mu: VectorMeasure, nu: VectorMeasure, cost: CostTensor,
                       *, mass_tol: float = MASS_TOL) -> float:
    """Exact optimal value by enumerating basic feasible solutions.

    Only flat instances up to 6 x 6 are accepted.  Returns +inf when every
    vertex routes mass through a forbidden (+inf) cell, matching the
    solver's INFEASIBLE status.
    """
    _check_dimensions(mu, nu, cost)
    _require_valid(mu, nu)
    require_matching_mass(mu, nu, tol=mass_tol)
    if mu.total_mass <= 0.0:
        return 0.0
    flat = flatten(mu, nu, cost)
    S, T = flat.cost.shape
    if S > ORACLE_MAX_SIDE or T > ORACLE_MAX_SIDE:
        raise OracleSizeError(
            f"flattened size {S} x {T} exceeds the oracle limit "
            f"{ORACLE_MAX_SIDE} x {ORACLE_MAX_SIDE}"
        )
    return _oracle.min_vertex_value(
        [m for _, _, m in flat.sources],
        [m for _, _, m in flat.sinks],
        flat.cost.tolist(),
    )
