"""W_p, MTI audits, metric axioms, tuple distance, counterexamples."""
from itertools import permutations

import numpy as np
import pytest

import vot

from helpers import (
    d_plus_t_spec,
    ex51_measures,
    ex51_spec,
    measure_on,
    permutation_tuple_value,
    rand_support,
    rand_weights,
)


# ---------------------------------------------------------------------------
# W_p
# ---------------------------------------------------------------------------
def test_ex51_distances_and_triangle_failure():
    mu, nu, lam = ex51_measures()
    spec = ex51_spec()
    w_ml = vot.wasserstein_p(mu, lam, spec)
    w_mn = vot.wasserstein_p(mu, nu, spec)
    w_nl = vot.wasserstein_p(nu, lam, spec)
    assert w_ml == pytest.approx(2.0, abs=1e-12)
    assert w_mn == pytest.approx(0.1, abs=1e-12)
    assert w_nl == pytest.approx(0.1, abs=1e-12)
    assert w_ml > w_mn + w_nl


def test_self_distance_zero_for_metric_families():
    rng = np.random.default_rng(0)
    for _ in range(10):
        n, S = int(rng.integers(1, 4)), int(rng.integers(2, 6))
        sup, spec, _ = d_plus_t_spec(rng, n, S, p=float(rng.choice([1.0, 2.0])))
        mu = measure_on(rng, n, sup)
        assert vot.wasserstein_p(mu, mu, spec) == pytest.approx(0.0, abs=1e-12)


def test_symmetry_for_symmetric_families():
    rng = np.random.default_rng(1)
    for _ in range(10):
        n, S = int(rng.integers(1, 4)), int(rng.integers(2, 6))
        sup, spec, _ = d_plus_t_spec(rng, n, S)
        mu = measure_on(rng, n, sup)
        nu = measure_on(rng, n, sup)
        assert vot.wasserstein_p(mu, nu, spec) == pytest.approx(
            vot.wasserstein_p(nu, mu, spec), rel=1e-10, abs=1e-12)


def test_identity_of_indiscernibles_under_hypotheses():
    # strictly positive off-diagonal blocks and true diagonal metrics:
    # distinct measures are separated
    rng = np.random.default_rng(2)
    for _ in range(15):
        n, S = int(rng.integers(1, 4)), int(rng.integers(2, 6))
        sup, spec, _ = d_plus_t_spec(rng, n, S, t=float(rng.uniform(0.1, 1.0)))
        mu = measure_on(rng, n, sup)
        w = mu.weights.copy()
        i, a = int(rng.integers(0, n)), int(rng.integers(0, S))
        j, b = int(rng.integers(0, n)), int(rng.integers(0, S))
        if (i, a) == (j, b):
            continue
        shift = min(0.1, w[i, a] * 0.5) + 1e-3
        w[i, a] -= shift
        w[j, b] += shift
        nu = vot.VectorMeasure(sup, w)
        assert vot.wasserstein_p(mu, nu, spec) > 1e-9


def test_pseudodistance_when_all_blocks_equal():
    # a single shared metric only separates the summed marginals: permuting
    # species masses is invisible
    rng = np.random.default_rng(3)
    sup, spec, _ = d_plus_t_spec(rng, 2, 4, t=0.0)
    mu = measure_on(rng, 2, sup)
    nu = vot.VectorMeasure(sup, mu.weights[::-1])
    assert mu != nu
    assert vot.wasserstein_p(mu, nu, spec) == pytest.approx(0.0, abs=1e-12)


def test_wp_rejects_negative_distances():
    c = vot.CostTensor(np.full((1, 1, 1, 1), -1.0))
    sup = vot.SupportSet(["x"])
    m = vot.VectorMeasure(sup, [[1.0]])
    with pytest.raises(vot.VotError):
        vot.wasserstein_p(m, m, vot.MetricSpec(c, 1.0))


# ---------------------------------------------------------------------------
# MTI
# ---------------------------------------------------------------------------
def test_d_plus_t_family_satisfies_mti():
    rng = np.random.default_rng(4)
    for _ in range(10):
        _, spec, _ = d_plus_t_spec(rng, int(rng.integers(1, 4)), int(rng.integers(2, 6)))
        assert vot.check_mti(spec).satisfied


def test_ex51_mti_violation_reported():
    spec = ex51_spec()
    report = vot.check_mti(spec)
    assert not report.satisfied
    # the triple d_11(0,2) = 2 > d_12(0,1) + d_21(1,2) = 0.2
    target = [v for v in report.violations
              if (v.i, v.j, v.k) == (0, 1, 0) and (v.x, v.y, v.z) == ("0", "1", "2")]
    assert len(target) == 1
    assert target[0].lhs == pytest.approx(2.0)
    assert target[0].rhs == pytest.approx(0.2)


def test_single_species_true_metric_satisfies_mti():
    rng = np.random.default_rng(5)
    _, spec, _ = d_plus_t_spec(rng, 1, 6, t=0.0)
    assert vot.check_mti(spec).satisfied


def test_mti_on_subset_supports():
    spec = ex51_spec()
    sub = vot.SupportSet([vot.Point("0", (0.0,))])
    assert vot.check_mti(spec, [sub]).satisfied  # single point cannot violate
    with pytest.raises(vot.ProblemFormatError):
        vot.check_mti(spec, [vot.SupportSet([vot.Point("7", (7.0,))])])


# ---------------------------------------------------------------------------
# metric axioms
# ---------------------------------------------------------------------------
def test_axioms_hold_for_positive_t():
    rng = np.random.default_rng(6)
    _, spec, _ = d_plus_t_spec(rng, 2, 5, t=0.7)
    report = vot.check_metric_axioms(spec)
    assert report.all_ok


def test_axioms_flag_pseudodistance_at_t_zero():
    rng = np.random.default_rng(7)
    _, spec, _ = d_plus_t_spec(rng, 2, 5, t=0.0)
    report = vot.check_metric_axioms(spec)
    assert report.symmetry.ok and report.mti.satisfied and report.zero_diagonal.ok
    assert not report.off_diagonal_positive.ok  # off-diagonal zeros on the diagonal of d


def test_axioms_flag_ex51_mti_failure():
    report = vot.check_metric_axioms(ex51_spec())
    assert not report.mti.satisfied
    assert not report.all_ok


# ---------------------------------------------------------------------------
# tuple distance
# ---------------------------------------------------------------------------
def test_tuple_identity():
    rng = np.random.default_rng(8)
    n = 3
    xs = rand_support(rng, n, prefix="x")
    model = vot.LpNormPlusKappa(n, 0.5)
    assert vot.tuple_distance(xs, xs, model.spec(xs, xs, 1.0)) == pytest.approx(0.0, abs=1e-12)


def test_tuple_swap_beats_transformation():
    xs = vot.SupportSet([vot.Point("x1", (0.0,)), vot.Point("x2", (1.0,))])
    ys = vot.SupportSet([vot.Point("y1", (1.0,)), vot.Point("y2", (0.0,))])
    model = vot.LpNormPlusKappa(2, 10.0)
    w = vot.tuple_distance(xs, ys, model.spec(xs, ys, 1.0))
    assert w == pytest.approx(1.0, abs=1e-12)


def test_tuple_matches_permutation_enumeration():
    rng = np.random.default_rng(9)
    for _ in range(20):
        n = int(rng.integers(1, 7))
        xs = rand_support(rng, n, prefix="x")
        ys = rand_support(rng, n, prefix="y")
        model = vot.LpNormPlusKappa(n, float(rng.uniform(0, 2)))
        spec = model.spec(xs, ys, float(rng.choice([1.0, 2.0])))
        assert vot.tuple_distance(xs, ys, spec) == pytest.approx(
            permutation_tuple_value(spec, n), abs=1e-10)


# ---------------------------------------------------------------------------
# counterexample generator
# ---------------------------------------------------------------------------
def test_counterexample_from_ex51_violation():
    spec = ex51_spec()
    report = vot.check_mti(spec)
    v = next(vv for vv in report.violations
             if (vv.i, vv.j, vv.k) == (0, 1, 0) and (vv.x, vv.y, vv.z) == ("0", "1", "2"))
    sup = spec.costs.source_support
    mu, nu, lam = vot.mti_counterexample(sup, spec.species, v)
    w_ml = vot.wasserstein_p(mu, lam, spec)
    w_mn = vot.wasserstein_p(mu, nu, spec)
    w_nl = vot.wasserstein_p(nu, lam, spec)
    assert w_ml == pytest.approx(v.lhs, abs=1e-12)
    assert w_mn + w_nl == pytest.approx(v.rhs, abs=1e-12)
    assert w_ml > w_mn + w_nl


def test_counterexample_from_random_violation():
    # random non-MTI family: perturb one off-diagonal block downward
    rng = np.random.default_rng(10)
    sup, d = __import__("helpers").euclidean_support(rng, 4)
    blocks = np.stack([[d, d + 1.0], [d + 1.0, d]])
    blocks[0, 1] *= 0.01  # cheap transformation breaks mixing inequalities
    spec = vot.MetricSpec(vot.CostTensor(blocks, source_support=sup, target_support=sup), 1.0)
    report = vot.check_mti(spec)
    if report.satisfied:
        pytest.skip("perturbation did not produce a violation")
    v = report.violations[0]
    mu, nu, lam = vot.mti_counterexample(sup, 2, v)
    assert vot.wasserstein_p(mu, lam, spec) > (
        vot.wasserstein_p(mu, nu, spec) + vot.wasserstein_p(nu, lam, spec))
