"""Dual-side toolkit: vector c-transform, potential improvement, and the
primal-dual optimality certificate.

The dual problem maximizes  sum_i <phi_i, mu_i> + sum_j <psi_j, nu_j>
over potential pairs with phi_i(x) + psi_j(y) <= c_ij(x, y) for every
species pair and point pair.  The vector c-transform of n source
potentials against the n costs of one target species is the pointwise
largest single potential compatible with all n constraint families; a
full improvement sweep substitutes every psi_j by a c-transform of phi
and then every phi_i by a c-bar-transform of the new psi, which never
decreases the dual value and always lands inside the constraint set.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import DimensionMismatchError
from .measures import CostTensor, VectorMeasure

if TYPE_CHECKING:  # pragma: no cover
    from .solver import CouplingTensor

_INF = float("inf")

#: tolerance for membership in the dual constraint set
DUAL_FEAS_TOL = 1e-8
#: plan masses below this are ignored by the slackness certificate
SUPPORT_MASS_TOL = 1e-10
#: slackness residual tolerance
SLACK_TOL = 1e-8


@dataclass(frozen=True)
class PotentialPair:
    """Source potentials phi (n, M) and target potentials psi (n, N)."""

    phi: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        phi = np.array(self.phi, dtype=float)
        psi = np.array(self.psi, dtype=float)
        if phi.ndim != 2 or psi.ndim != 2 or phi.shape[0] != psi.shape[0]:
            raise DimensionMismatchError(
                f"potentials need matching species rows, got {phi.shape} and {psi.shape}"
            )
        phi.setflags(write=False)
        psi.setflags(write=False)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "psi", psi)

    @property
    def species(self) -> int:
        return self.phi.shape[0]

    @classmethod
    def zeros(cls, species: int, source_size: int, target_size: int) -> "PotentialPair":
        return cls(np.zeros((species, source_size)), np.zeros((species, target_size)))


def dual_value(pp: PotentialPair, mu: VectorMeasure, nu: VectorMeasure) -> float:
    """sum_i <phi_i, mu_i> + sum_j <psi_j, nu_j>.

    Zero-weight atoms contribute nothing by construction, so potentials
    there may be arbitrarily large (even +inf) without poisoning the sum.
    """
    wphi = np.where(mu.weights > 0.0, pp.phi * mu.weights, 0.0)
    wpsi = np.where(nu.weights > 0.0, pp.psi * nu.weights, 0.0)
    return float(wphi.sum() + wpsi.sum())


@dataclass(frozen=True)
class DualFeasibility:
    ok: bool
    worst_violation: float
    worst_index: tuple[int, int, int, int] | None  # (i, j, a, b)

    def __bool__(self) -> bool:
        return self.ok


def check_dual_feasible(pp: PotentialPair, cost: CostTensor,
                        *, tol: float = DUAL_FEAS_TOL) -> DualFeasibility:
    """Verdict on membership in the dual constraint set, with the argmax
    violation when it fails."""
    sums = pp.phi[:, None, :, None] + pp.psi[None, :, None, :]
    viol = np.where(np.isinf(cost.blocks), -_INF, sums - cost.blocks)
    worst = float(viol.max(initial=-_INF))
    if worst <= tol:
        return DualFeasibility(True, worst, None)
    idx = tuple(int(k) for k in np.unravel_index(np.argmax(viol), viol.shape))
    return DualFeasibility(False, worst, idx)


def c_transform(f: np.ndarray, cost_column: np.ndarray, *, return_witness: bool = False):
    """Vector c-transform: g(y) = min_i min_x (c_i(x, y) - f_i(x)).

    f is (n, M); cost_column stacks the n cost matrices (c_1j .. c_nj) as
    (n, M, N).  +inf cost entries drop out of the min; if every entry for
    some y is +inf the result there is +inf (the caller can flag it with
    np.isinf).  With return_witness=True also returns the (n, M) argmin
    indices, ties resolved to the lexicographically smallest (i, x).
    """
    f = np.asarray(f, dtype=float)
    cc = np.asarray(cost_column, dtype=float)
    if f.ndim != 2 or cc.ndim != 3 or cc.shape[:2] != f.shape:
        raise DimensionMismatchError(
            f"c_transform shapes disagree: f {f.shape}, costs {cc.shape}"
        )
    diffs = cc - f[:, :, None]  # +inf survives untouched
    flat = diffs.reshape(-1, cc.shape[2])
    g = flat.min(axis=0, initial=_INF)
    if not return_witness:
        return g
    witness_flat = flat.argmin(axis=0) if flat.size else np.zeros(0, dtype=int)
    witness = np.stack(np.unravel_index(witness_flat, f.shape), axis=1)
    return g, witness


def cbar_transform(g: np.ndarray, cost_row: np.ndarray, *, return_witness: bool = False):
    """Mirror transform on the source side: f(x) = min_j min_y (c_j(x, y) - g_j(y))."""
    g = np.asarray(g, dtype=float)
    cr = np.asarray(cost_row, dtype=float)
    if g.ndim != 2 or cr.ndim != 3 or (cr.shape[0], cr.shape[2]) != g.shape:
        raise DimensionMismatchError(
            f"cbar_transform shapes disagree: g {g.shape}, costs {cr.shape}"
        )
    return c_transform(g, np.swapaxes(cr, 1, 2), return_witness=return_witness)


def improve_potentials(pp: PotentialPair, cost: CostTensor) -> PotentialPair:
    """One improvement sweep.

    First psi_j <- c-transform of phi against costs (c_1j .. c_nj) for
    every j, then phi_i <- c-bar-transform of the new psi against costs
    (c_i1 .. c_in).  Given a dual-feasible input the output is dual
    feasible and its dual value never decreases.
    """
    blocks = cost.blocks
    n = cost.species
    new_psi = np.stack([c_transform(pp.phi, blocks[:, j]) for j in range(n)])
    new_phi = np.stack([cbar_transform(new_psi, blocks[i]) for i in range(n)])
    return PotentialPair(phi=new_phi, psi=new_psi)


@dataclass(frozen=True)
class SweepResult:
    potentials: PotentialPair
    sweeps: int
    dual_values: tuple[float, ...]  # value after each sweep, starting value first


def improve_until_stall(pp: PotentialPair, cost: CostTensor,
                        mu: VectorMeasure, nu: VectorMeasure,
                        *, stall: float = 1e-12, max_sweeps: int = 1000) -> SweepResult:
    """Iterate sweeps until the dual value moves less than ``stall``.

    The sweep is a heuristic: one sweep provably improves, but repeated
    sweeps are not claimed to reach the LP dual optimum, which remains the
    authoritative value.
    """
    values = [dual_value(pp, mu, nu)]
    current = pp
    for k in range(max_sweeps):
        nxt = improve_potentials(current, cost)
        values.append(dual_value(nxt, mu, nu))
        current = nxt
        if abs(values[-1] - values[-2]) <= stall:
            break
    return SweepResult(potentials=current, sweeps=len(values) - 1,
                       dual_values=tuple(values))


@dataclass(frozen=True)
class SlacknessViolation:
    i: int
    j: int
    a: int
    b: int
    mass: float
    residual: float  # c_ij(a, b) - phi_i(a) - psi_j(b)


@dataclass(frozen=True)
class SlacknessVerdict:
    ok: bool
    violations: tuple[SlacknessViolation, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def check_optimality(plan: "CouplingTensor", pp: PotentialPair, cost: CostTensor,
                     *, mass_tol: float = SUPPORT_MASS_TOL,
                     tol: float = SLACK_TOL) -> SlacknessVerdict:
    """Complementary-slackness certificate.

    OK iff phi_i(a) + psi_j(b) = c_ij(a, b) within ``tol`` on every plan
    entry carrying more than ``mass_tol``; together with primal and dual
    feasibility this certifies joint optimality.
    """
    blocks = cost.blocks
    bad = []
    for i, j, a, b, mass in plan.entries:
        if mass <= mass_tol:
            continue
        residual = float(blocks[i, j, a, b] - pp.phi[i, a] - pp.psi[j, b])
        if abs(residual) > tol:
            bad.append(SlacknessViolation(i, j, a, b, mass, residual))
    return SlacknessVerdict(ok=not bad, violations=tuple(bad))
