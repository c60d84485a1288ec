"""Exhaustive vertex enumeration for small transportation polytopes.

Every basic feasible solution of a transportation problem can be built by
repeatedly picking a cell, shipping min(remaining supply, remaining
demand) through it, and deleting the exhausted line (both lines on a tie);
conversely every such construction yields a feasible basic solution.  The
oracle therefore recurses over all cell choices, which enumerates the
value of every vertex of the polytope.

To keep desk-scale instances fast without giving up exhaustiveness the
recursion carries:
  * exact integer masses (marginals are rebalanced in rational arithmetic
    and put over a common denominator), so line-elimination decisions are
    never corrupted by rounding;
  * memoization of fully-explored subproblem values;
  * an admissible lower bound from a dual-feasible potential pair, looked
    up per active-line bitmask, used to prune branches that provably
    cannot beat the incumbent by more than 1e-11 relative.

+inf cells are skipped during branching: a completion through a forbidden
cell costs +inf, so the returned value is +inf exactly when every vertex
routes mass through a forbidden cell (the infeasible case).
"""
from __future__ import annotations

from fractions import Fraction
from math import lcm

_INF = float("inf")
_BIGF = 1e300  # stands in for +inf inside the bound tables (no inf-inf)


def _exact_int_masses(supply, demand):
    """Rebalance demand to the supply total exactly, then scale everything
    to integers over one common denominator."""
    s = [Fraction(x) for x in supply]
    d = [Fraction(x) for x in demand]
    ts, td = sum(s), sum(d)
    if td:
        d = [x * ts / td for x in d]
    den = lcm(*[x.denominator for x in s + d]) if (s or d) else 1
    return [int(x * den) for x in s], [int(x * den) for x in d], den


def min_vertex_value(supply, demand, cost) -> float:
    """Minimum cost over all basic feasible solutions (LP optimum)."""
    si, di, den = _exact_int_masses(supply, demand)
    scale = 1.0 / den
    m, n = len(si), len(di)
    cost = [[float(c) for c in row] for row in cost]
    bc = [[min(c, _BIGF) for c in row] for row in cost]

    # bound tables over active-line bitmasks: one and a half Gauss-Seidel
    # passes of a dual-feasible (u, v); u2 + v1 stays feasible since
    # u2[r] = min_c (c - v1[c]) by construction
    u1 = [[min((bc[r][c] for c in range(n) if cm >> c & 1), default=0.0)
           for cm in range(1 << n)] for r in range(m)]
    v1 = [[[0.0] * (1 << n) for _ in range(1 << m)] for _ in range(n)]
    for c in range(n):
        for rm in range(1 << m):
            rows = [r for r in range(m) if rm >> r & 1]
            for cm in range(1 << n):
                if cm >> c & 1:
                    v1[c][rm][cm] = max(
                        0.0, min((bc[r][c] - u1[r][cm] for r in rows), default=0.0)
                    )
    u2 = [[[0.0] * (1 << n) for _ in range(1 << m)] for _ in range(m)]
    for r in range(m):
        for rm in range(1 << m):
            if rm >> r & 1:
                for cm in range(1 << n):
                    cols = [c for c in range(n) if cm >> c & 1]
                    u2[r][rm][cm] = min(
                        (bc[r][c] - v1[c][rm][cm] for c in cols), default=0.0
                    )

    cells = sorted(((cost[r][c], r, c) for r in range(m) for c in range(n)))
    sup0 = tuple((r, v) for r, v in enumerate(si) if v > 0)
    dem0 = tuple((c, v) for c, v in enumerate(di) if v > 0)
    if not sup0:
        return 0.0

    def greedy_incumbent():
        sup, dem = dict(sup0), dict(dem0)
        total = 0.0
        for unit, r, c in cells:
            if unit == _INF:
                break
            while r in sup and c in dem:
                mv = min(sup[r], dem[c])
                total += mv * unit
                if sup[r] == mv:
                    del sup[r]
                else:
                    sup[r] -= mv
                if c in dem and dem[c] == mv:
                    del dem[c]
                elif c in dem:
                    dem[c] -= mv
        return total * scale if not sup else _INF

    best = [greedy_incumbent()]
    slack = 1e-11 * (1.0 + (abs(best[0]) if best[0] < _INF else 1.0))
    memo: dict[tuple, tuple[float, bool]] = {}

    def rec(sup, dem, rmask, cmask, path):
        # returns (value, exact); non-exact values are valid lower bounds
        if not sup:
            if path < best[0]:
                best[0] = path
            return 0.0, True
        hit = memo.get((sup, dem))
        if hit is not None:
            val, exact = hit
            if exact:
                if path + val < best[0]:
                    best[0] = path + val
                return val, True
            if path + val >= best[0] - slack:
                return val, False
        val = _INF
        exact = True
        sup_d = dict(sup)
        dem_d = dict(dem)
        last = len(sup) == 1
        for unit, r, c in cells:
            sv = sup_d.get(r)
            dv = dem_d.get(c)
            if sv is None or dv is None or unit == _INF:
                continue
            if sv < dv:
                mv, close_r, close_c = sv, True, False
            elif sv > dv:
                mv, close_r, close_c = dv, False, True
            else:
                mv, close_r, close_c = sv, True, True
            step = mv * scale * unit
            if close_r and close_c and last:
                if path + step < best[0]:
                    best[0] = path + step
                if step < val:
                    val = step
                continue
            nrm = rmask & ~(1 << r) if close_r else rmask
            ncm = cmask & ~(1 << c) if close_c else cmask
            clb = 0.0
            for rr, vv in sup:
                if nrm >> rr & 1:
                    clb += (vv - (mv if rr == r else 0)) * u2[rr][nrm][ncm]
            for cc, vv in dem:
                if ncm >> cc & 1:
                    clb += (vv - (mv if cc == c else 0)) * v1[cc][nrm][ncm]
            clb *= scale
            npath = path + step
            if npath + clb >= best[0] - slack:
                exact = False
                if step + clb < val:
                    val = step + clb
                continue
            if close_r:
                nsup = tuple(p for p in sup if p[0] != r)
            else:
                nsup = tuple(p if p[0] != r else (r, sv - mv) for p in sup)
            if close_c:
                ndem = tuple(p for p in dem if p[0] != c)
            else:
                ndem = tuple(p if p[0] != c else (c, dv - mv) for p in dem)
            sub, sub_exact = rec(nsup, ndem, nrm, ncm, npath)
            if step + sub < val:
                val = step + sub
            exact = exact and sub_exact
        prev = memo.get((sup, dem))
        if prev is None or not prev[1]:
            memo[(sup, dem)] = (val, exact)
        return val, exact

    rmask0 = sum(1 << r for r, _ in sup0)
    cmask0 = sum(1 << c for c, _ in dem0)
    rec(sup0, dem0, rmask0, cmask0, 0.0)
    return best[0]
