"""Primal network simplex for dense transportation problems.

The engine solves  min <c, x>  s.t.  x >= 0, row sums = supply, column
sums = demand, on the complete bipartite graph.  Design choices:

  * Bland's anti-cycling rule: entering arc is the lowest-index arc (row
    major) with negative reduced cost; the leaving arc is the lowest-index
    blocking arc among the min-ratio ties.
  * Degeneracy is additionally damped by an implicit lexicographic
    perturbation of the marginals (magnitude 1e-12 of the total mass);
    the perturbation never reaches the output because final flows are
    recomputed from the true marginals on the optimal basis tree.
  * +inf costs are carried exactly as two-part lexicographic costs
    (inf-indicator, finite part), so "forbidden" arcs never corrupt float
    arithmetic.  The optimum minimizes mass routed through forbidden arcs
    first; a positive residual there means the instance is infeasible.
  * Dual potentials are read off the optimal spanning tree (root potential
    0).  If the final basis retains zero-flow forbidden arcs, potentials
    fall back to a support-forest construction: gauge potentials per
    component of the positive-flow forest, aligned by a Bellman-Ford pass
    over the finite-cost difference constraints.  Complementary slackness
    holds by construction in both paths.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_INF = float("inf")


@dataclass
class SimplexSolution:
    flows: np.ndarray        # (S, T), recomputed from true marginals
    basis: np.ndarray        # (S, T) bool
    u: np.ndarray            # (S,) row potentials
    v: np.ndarray            # (T,) column potentials
    pivots: int
    inf_flow: float          # mass routed through +inf arcs


def _northwest_basis(supply: np.ndarray, demand: np.ndarray):
    """Initial staircase basis; returns (flows, basis bool matrix)."""
    S, T = len(supply), len(demand)
    flows = np.zeros((S, T))
    basis = np.zeros((S, T), dtype=bool)
    s = supply.copy()
    d = demand.copy()
    i = j = 0
    while True:
        alloc = min(s[i], d[j])
        alloc = max(alloc, 0.0)
        flows[i, j] = alloc
        basis[i, j] = True
        s[i] -= alloc
        d[j] -= alloc
        if i == S - 1 and j == T - 1:
            break
        # exhaust one line per step so the basic cells stay a tree
        if s[i] <= d[j] and i < S - 1:
            i += 1
        elif j < T - 1:
            j += 1
        else:
            i += 1
    return flows, basis


def _tree_adjacency(basis: np.ndarray):
    S, T = basis.shape
    adj: list[list[tuple[int, int, int]]] = [[] for _ in range(S + T)]
    for r, c in np.argwhere(basis):
        r, c = int(r), int(c)
        adj[r].append((S + c, r, c))
        adj[S + c].append((r, r, c))
    return adj


def _tree_potentials(basis, cm, cf):
    """Solve u + v = c on tree arcs, root node 0 at potential zero."""
    S, T = basis.shape
    adj = _tree_adjacency(basis)
    um = np.zeros(S, dtype=np.int64)
    uf = np.zeros(S)
    vm = np.zeros(T, dtype=np.int64)
    vf = np.zeros(T)
    seen = np.zeros(S + T, dtype=bool)
    seen[0] = True
    stack = [0]
    while stack:
        node = stack.pop()
        for other, r, c in adj[node]:
            if seen[other]:
                continue
            seen[other] = True
            if other >= S:  # learned a column from a row
                vm[other - S] = cm[r, c] - um[r]
                vf[other - S] = cf[r, c] - uf[r]
            else:
                um[other] = cm[r, c] - vm[c]
                uf[other] = cf[r, c] - vf[c]
            stack.append(other)
    if not seen.all():
        raise RuntimeError("basis does not span the bipartite graph")
    return um, uf, vm, vf


def _tree_path(basis, r0: int, c0: int):
    """Node path from row r0 to column c0 along the basis tree."""
    S, T = basis.shape
    adj = _tree_adjacency(basis)
    target = S + c0
    parent = {r0: None}
    stack = [r0]
    while stack:
        node = stack.pop()
        if node == target:
            break
        for other, _, _ in adj[node]:
            if other not in parent:
                parent[other] = node
                stack.append(other)
    path = [target]
    while path[-1] != r0:
        path.append(parent[path[-1]])
    path.reverse()
    return path


def _recompute_tree_flows(basis, supply, demand):
    """Exact basic flows for the given tree and true marginals.

    Leaf elimination; degenerate arcs get zero.  Tiny negatives from
    marginal rounding are clamped to zero.
    """
    S, T = basis.shape
    flows = np.zeros((S, T))
    s = supply.astype(float).copy()
    d = demand.astype(float).copy()
    deg = np.concatenate([basis.sum(axis=1), basis.sum(axis=0)]).astype(int)
    adj = _tree_adjacency(basis)
    alive = np.ones((S, T), dtype=bool) & basis
    queue = [n for n in range(S + T) if deg[n] == 1]
    processed = np.zeros(S + T, dtype=bool)
    while queue:
        node = queue.pop()
        if processed[node] or deg[node] == 0:
            continue
        arc = next(((o, r, c) for o, r, c in adj[node] if alive[r, c]), None)
        if arc is None:
            continue
        other, r, c = arc
        amount = s[node] if node < S else d[node - S]
        flows[r, c] = amount
        if node < S:
            s[node] = 0.0
            d[c] -= amount
        else:
            d[node - S] = 0.0
            s[r] -= amount
        alive[r, c] = False
        processed[node] = True
        deg[node] -= 1
        deg[other] -= 1
        if deg[other] == 1:
            queue.append(other)
    np.maximum(flows, 0.0, out=flows)
    return flows


def _support_potentials(flows, cm, cf):
    """Dual potentials from the positive-flow forest.

    Within each connected component of the support, potentials are pinned
    by the complementary-slackness equalities (gauge fixed at the lowest
    node).  The per-component shifts are then chosen by a Bellman-Ford
    pass over the difference constraints induced by all finite-cost arcs,
    which is feasible whenever the flow is optimal.
    """
    S, T = flows.shape
    pos = flows > 0.0
    adj: list[list[tuple[int, int, int]]] = [[] for _ in range(S + T)]
    for r, c in np.argwhere(pos):
        r, c = int(r), int(c)
        adj[r].append((S + c, r, c))
        adj[S + c].append((r, r, c))
    comp = np.full(S + T, -1, dtype=int)
    u = np.zeros(S)
    v = np.zeros(T)
    ncomp = 0
    for start in range(S + T):
        if comp[start] >= 0:
            continue
        comp[start] = ncomp
        if start < S:
            u[start] = 0.0
        else:
            v[start - S] = 0.0
        stack = [start]
        while stack:
            node = stack.pop()
            for other, r, c in adj[node]:
                if comp[other] >= 0:
                    continue
                comp[other] = ncomp
                if other >= S:
                    v[other - S] = cf[r, c] - u[r]
                else:
                    u[other] = cf[r, c] - v[c]
                stack.append(other)
        ncomp += 1
    # shift component k by t_k:  u += t_k, v -= t_k;  cross-arc feasibility
    # becomes t_k - t_l <= cf - u - v over finite arcs from comp k to comp l
    edges: dict[tuple[int, int], float] = {}
    for r in range(S):
        for c in range(T):
            if cm[r, c]:
                continue
            k, l = comp[r], comp[S + c]
            if k == l:
                continue
            w = cf[r, c] - u[r] - v[c]
            key = (l, k)
            if key not in edges or w < edges[key]:
                edges[key] = w
    t = np.zeros(ncomp)
    for _ in range(max(ncomp - 1, 0)):
        changed = False
        for (l, k), w in edges.items():
            if t[l] + w < t[k] - 1e-15:
                t[k] = t[l] + w
                changed = True
        if not changed:
            break
    worst = min((t[l] + w - t[k] for (l, k), w in edges.items()), default=0.0)
    if worst < -1e-9 * (1.0 + float(np.abs(cf).max(initial=0.0))):
        raise RuntimeError("support potentials infeasible; flow is not optimal")
    u = u + t[comp[:S]]
    v = v - t[comp[S:]]
    return u, v


def transportation_simplex(supply, demand, cost) -> SimplexSolution:
    """Solve the dense transportation problem; see module docstring.

    supply and demand must be strictly positive; their totals are aligned
    exactly by rescaling demand.  cost may contain +inf.
    """
    supply = np.asarray(supply, dtype=float)
    demand = np.asarray(demand, dtype=float)
    cost = np.asarray(cost, dtype=float)
    S, T = cost.shape
    total = float(supply.sum())
    demand = demand * (total / float(demand.sum()))

    cm = np.isinf(cost).astype(np.int64)
    cf = np.where(np.isinf(cost), 0.0, cost)
    scale = 1.0 + float(np.abs(cf).max(initial=0.0))
    enter_tol = 1e-11 * scale

    # lexicographic marginal perturbation, removed on output
    delta = 1e-12 * total / (S + 1)
    s_pert = supply + delta * np.arange(1, S + 1)
    d_pert = demand * (float(s_pert.sum()) / total)

    flows, basis = _northwest_basis(s_pert, d_pert)
    pivots = 0
    max_pivots = 200 * S * T + 1000
    while True:
        um, uf, vm, vf = _tree_potentials(basis, cm, cf)
        rcm = cm - um[:, None] - vm[None, :]
        rcf = cf - uf[:, None] - vf[None, :]
        negative = (rcm < 0) | ((rcm == 0) & (rcf < -enter_tol))
        negative &= ~basis
        flat = np.flatnonzero(negative.ravel())
        if flat.size == 0:
            break
        enter = int(flat[0])  # Bland: lowest index
        r0, c0 = divmod(enter, T)
        path = _tree_path(basis, r0, c0)
        # arcs along the path alternate -theta, +theta starting at r0
        arcs = []
        for t_i in range(len(path) - 1):
            a, b = path[t_i], path[t_i + 1]
            r, c = (a, b - S) if a < S else (b, a - S)
            arcs.append((r, c, -1 if t_i % 2 == 0 else +1))
        blocking = [(flows[r, c], r * T + c, r, c) for r, c, sgn in arcs if sgn < 0]
        theta, _, lr, lc = min(blocking, key=lambda x: (x[0], x[1]))
        flows[r0, c0] += theta
        for r, c, sgn in arcs:
            flows[r, c] += sgn * theta
            if flows[r, c] < 0.0:
                flows[r, c] = 0.0
        flows[lr, lc] = 0.0
        basis[lr, lc] = False
        basis[r0, c0] = True
        pivots += 1
        if pivots > max_pivots:
            raise RuntimeError(f"network simplex exceeded {max_pivots} pivots")

    flows = _recompute_tree_flows(basis, supply, demand)
    inf_flow = float(flows[cm == 1].sum())
    feasible = inf_flow <= 1e-9 * max(1.0, total)
    if feasible and (basis & (cm == 1)).any():
        u, v = _support_potentials(flows, cm, cf)
    else:
        # potentials are meaningless for infeasible instances; the tree
        # read-off is the normal path when no forbidden arc stayed basic
        _, u, _, v = _tree_potentials(basis, cm, cf)
    return SimplexSolution(flows=flows, basis=basis, u=u, v=v, pivots=pivots,
                           inf_flow=inf_flow)
