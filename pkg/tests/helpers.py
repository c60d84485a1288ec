"""Instance generators and independent oracles shared across the tests."""
from __future__ import annotations

from itertools import permutations

import numpy as np

import vot


def rand_support(rng, size, dim=2, prefix="s"):
    pts = [vot.Point(f"{prefix}{k}", tuple(rng.random(dim))) for k in range(size)]
    return vot.SupportSet(pts)


def rand_weights(rng, n, size, zero_row=False, zero_atoms=False):
    w = rng.random((n, size))
    if zero_row and n > 1:
        w[int(rng.integers(0, n))] = 0.0
    if zero_atoms:
        w = np.where(rng.random((n, size)) < 0.3, 0.0, w)
    if w.sum() <= 0:
        w[0, 0] = 1.0
    return w / w.sum()


def rand_instance(rng, n, M, N, positive=True, zero_row=False, zero_atoms=False):
    """Random unit-mass pair plus a random cost tensor."""
    src = rand_support(rng, M, prefix="a")
    tgt = rand_support(rng, N, prefix="b")
    mu = vot.VectorMeasure(src, rand_weights(rng, n, M, zero_row, zero_atoms))
    nu = vot.VectorMeasure(tgt, rand_weights(rng, n, N, zero_row, zero_atoms))
    low = 0.05 if positive else -2.0
    cost = vot.CostTensor(rng.uniform(low, 5.0, (n, n, M, N)),
                          source_support=src, target_support=tgt)
    return mu, nu, cost


def euclidean_support(rng, size, dim=2, prefix="q", scale=2.0):
    """Points in the plane with their Euclidean distance matrix (a true
    metric, so triangle inequalities hold exactly up to float rounding)."""
    pts = rng.random((size, dim)) * scale
    sup = vot.SupportSet([vot.Point(f"{prefix}{k}", tuple(pts[k])) for k in range(size)])
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    return sup, d


def d_plus_t_spec(rng, n, size, t=None, p=1.0):
    """MTI-satisfying family: d_ii = Euclidean d, d_ij = d + t."""
    sup, d = euclidean_support(rng, size)
    t = float(rng.uniform(0.0, 1.5)) if t is None else t
    cost = vot.build_kappa_cost(d, t, n, source_support=sup, target_support=sup)
    return sup, vot.MetricSpec(cost, p), t


def measure_on(rng, n, sup):
    return vot.VectorMeasure(sup, rand_weights(rng, n, sup.size))


# ---------------------------------------------------------------------------
# Example 5.1 of the triangle-failure family: two species on the line,
# d_11 = d_22 = |x - y|, off-diagonal the eps-discrete distance
# ---------------------------------------------------------------------------
EX51_EPS = 0.1


def ex51_support():
    return vot.SupportSet([
        vot.Point("0", (0.0,)),
        vot.Point("1", (1.0,)),
        vot.Point("2", (2.0,)),
    ])


def ex51_spec(support=None, p=1.0):
    sup = support if support is not None else ex51_support()
    coords = sup.coords_array()[:, 0]
    absd = np.abs(coords[:, None] - coords[None, :])
    deps = np.where(np.isclose(coords[:, None], coords[None, :]), 0.0, EX51_EPS)
    blocks = np.array([[absd, deps], [deps, absd]])
    tensor = vot.CostTensor(blocks, symmetric=True,
                            source_support=sup, target_support=sup)
    return vot.MetricSpec(tensor, p)


def ex51_measures(support=None):
    sup = support if support is not None else ex51_support()
    mu = vot.VectorMeasure(sup, [[1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    nu = vot.VectorMeasure(sup, [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    lam = vot.VectorMeasure(sup, [[0.0, 0.0, 1.0], [0.0, 0.0, 0.0]])
    return mu, nu, lam


# ---------------------------------------------------------------------------
# independent oracles
# ---------------------------------------------------------------------------
def permutation_tuple_value(spec: vot.MetricSpec, n: int) -> float:
    """Tuple distance by exhaustive n! assignment enumeration."""
    d = spec.costs.blocks
    p = spec.p
    best = min(
        sum(d[i, s[i], i, s[i]] ** p for i in range(n))
        for s in permutations(range(n))
    )
    return (best / n) ** (1.0 / p)


def summed_scalar_value(mu, nu, c_matrix) -> float:
    """Scalar transport value between the species-summed marginals."""
    mu_s = vot.VectorMeasure(mu.support, mu.weights.sum(0, keepdims=True))
    nu_s = vot.VectorMeasure(nu.support, nu.weights.sum(0, keepdims=True))
    rep = vot.solve_primal(mu_s, nu_s, vot.CostTensor(np.asarray(c_matrix)[None, None]))
    return rep.primal_value
