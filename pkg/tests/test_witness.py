import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize

from wwitness.partitions import ModePartition
from wwitness.witness import (MaxGConfig, WeightError, WWeights, bipartition_maximum,
                              bipartition_se, closed_form_f_full_eta, closed_form_f_part_eta,
                              f_full, f_full_batch, f_part, f_part_batch, full_bound, max_g,
                              max_g_batch, multistart_ascent, one_diff_closed_form,
                              part_bound, partition_se, se_value, stationarity_residual,
                              w5_weights)


def lbfgs_max(w, starts=40, seed=1):
    """Independent bound-constrained maximizer of the product-state objective."""
    rng = np.random.default_rng(seed)
    best = max(wi**2 for wi in w)
    f = lambda r: -float(se_value(w, r))
    for _ in range(starts):
        res = minimize(f, rng.random(len(w)), method="L-BFGS-B",
                       bounds=[(0, 1)] * len(w), options={"ftol": 1e-15, "gtol": 1e-12})
        best = max(best, -res.fun)
    return best


unit_rows = st.lists(st.floats(0.05, 1.0), min_size=2, max_size=6).map(
    lambda v: np.array(v) / np.linalg.norm(v))


def test_pure_w4_bounds():
    w = WWeights(np.full(4, 0.5))
    assert f_full(w) == pytest.approx(27 / 64, abs=1e-12)
    assert f_part(w) == pytest.approx(0.75, abs=1e-12)


def test_pure_w4_optimizer_is_sqrt3_over_2():
    out = max_g(np.full(4, 0.5))
    assert np.allclose(out.optimizer, math.sqrt(3) / 2, atol=1e-8)
    assert out.source == "interior-stationary"


@pytest.mark.parametrize("K", range(2, 9))
def test_equal_weight_law(K):
    assert max_g(np.full(K, K**-0.5)).g_max == pytest.approx(((K - 1) / K) ** (K - 1), abs=1e-12)


def test_two_party_bound_is_larger_mass():
    assert max_g([0.6, 0.8]).g_max == pytest.approx(0.64, abs=1e-14)


def test_dominant_weight_gives_boundary_value():
    w = np.array([0.95, 0.2, 0.2, math.sqrt(1 - 0.95**2 - 0.08)])
    out = max_g(w)
    assert out.g_max == pytest.approx(max(lbfgs_max(w), 0.95**2), abs=1e-9)


@pytest.mark.parametrize("N", [3, 4, 5, 6])
@pytest.mark.parametrize("ratio", [0.1, 0.7, 1.0, 1.3, 0.999, 1.001])
def test_one_diff_matches_solver(N, ratio):
    ratio = ratio * math.sqrt(N - 1) if ratio in (0.999, 1.001) else ratio
    lam = 1 / math.sqrt(N - 1 + ratio**2)
    w = np.append(np.full(N - 1, lam), ratio * lam)
    assert one_diff_closed_form(N, lam, ratio * lam) == pytest.approx(max_g(w).g_max, abs=1e-10)


def test_one_diff_rejects_unnormalized():
    with pytest.raises(WeightError):
        one_diff_closed_form(4, 0.5, 0.6)


def test_weights_must_be_normalized():
    with pytest.raises(WeightError):
        WWeights([0.5, 0.5])
    with pytest.raises(WeightError):
        max_g([0.5, 0.5])
    assert WWeights.normalized([1, 1j]).moduli == pytest.approx([2**-0.5] * 2)


def test_plus_branch_candidates_matter():
    # a row where the largest weight sits on the plus root at the optimum
    w = np.array([0.7, 0.5, 0.4, 0.3])
    w = w / np.linalg.norm(w)
    out = max_g(w, MaxGConfig(fallback="never"))
    assert out.g_max == pytest.approx(lbfgs_max(w), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(unit_rows)
def test_max_g_agrees_with_independent_maximizer(w):
    out = max_g(w)
    ref = lbfgs_max(w, starts=20)
    assert out.g_max >= ref - 1e-9
    assert out.g_max <= ref + 1e-7
    assert float(se_value(w, out.optimizer)) == pytest.approx(out.g_max, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(unit_rows, st.randoms(use_true_random=False))
def test_max_g_symmetries(w, rnd):
    g = max_g(w).g_max
    perm = list(range(len(w)))
    rnd.shuffle(perm)
    assert max_g(w[perm]).g_max == pytest.approx(g, abs=1e-12)
    lam = w * np.exp(1j * np.array([rnd.uniform(0, 6.3) for _ in w]))
    assert f_full(WWeights(lam)) == pytest.approx(g, abs=1e-12)
    assert max(w**2) - 1e-15 <= g <= 1.0


@settings(max_examples=40, deadline=None)
@given(unit_rows)
def test_zero_weight_party_is_inert(w):
    padded = np.append(w, 0.0)
    assert max_g(padded).g_max == pytest.approx(max_g(w).g_max, abs=1e-14)


@settings(max_examples=25, deadline=None)
@given(unit_rows)
def test_coordinate_ascent_agrees(w):
    g, r = multistart_ascent(w)
    assert g == pytest.approx(max_g(w).g_max, abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0.05, 1.0), min_size=3, max_size=6))
def test_f_part_equals_bipartition_maximum(v):
    w = WWeights.normalized(v)
    assert f_part(w) == pytest.approx(bipartition_maximum(w), abs=1e-10)
    assert f_part(w) >= f_full(w) - 1e-12


def test_bipartition_bound_is_largest_side_mass():
    w = WWeights.normalized([1, 2, 3, 4])
    m = np.array([1, 4, 9, 16]) / 30
    assert bipartition_se(w, [4]) == pytest.approx(max(m[3], 1 - m[3]))
    assert bipartition_maximum(w) == pytest.approx(1 - m[0])


def test_part_bound_reports_partition():
    out = part_bound(WWeights(np.full(4, 0.5)))
    assert out.g_max == pytest.approx(0.75)
    assert len(out.partition) == 2
    assert sorted(map(len, out.partition.blocks)) == [1, 3]


def test_coarse_enumeration_shortcut_agrees():
    w = WWeights.normalized(np.arange(1, 10))
    coarse = part_bound(w, enumeration_limit=4).g_max
    exact = f_part(w, full_enumeration=True)
    assert coarse == pytest.approx(exact, abs=1e-12)


def test_partition_se_with_forced_vacuum_mode():
    w = w5_weights([0.8] * 4)
    p = ModePartition(((1, 2), (3, 4), (5,)), frozenset({5}))
    assert partition_se(w, p).g_max <= f_part(w, [5]) + 1e-12


def test_stationarity_residual_zero_at_equal_weights():
    x = np.full(4, 1 / math.sqrt(3))
    assert stationarity_residual(np.full(4, 0.5), x) < 1e-15


@pytest.mark.parametrize("eta,full,part", [(0.8, 0.4096, 0.6), (1.0, 27 / 64, 0.75),
                                           (0.3, 0.7, 0.7), (0.5, 0.5, 0.5)])
def test_isotropic_loss_bounds(eta, full, part):
    w = w5_weights([eta] * 4)
    assert f_full(w) == pytest.approx(full, abs=1e-10)
    assert f_part(w, [5]) == pytest.approx(part, abs=1e-10)
    assert closed_form_f_full_eta(eta) == pytest.approx(full, abs=1e-12)
    assert closed_form_f_part_eta(eta) == pytest.approx(part, abs=1e-12)


def test_closed_forms_continuous_at_branch_points():
    e = 0.5
    assert 27 * e**4 / (5 * e - 1) ** 3 == pytest.approx(1 - e, abs=1e-15)
    assert 3 * e**2 * (e - 1) / (13 * e**2 - 16 * e + 4) == pytest.approx(1 - e, abs=1e-15)
    e = 2 / 3
    assert 3 * e**2 * (e - 1) / (13 * e**2 - 16 * e + 4) == pytest.approx(0.75 * e, abs=1e-15)


def test_closed_form_rejects_out_of_range():
    with pytest.raises(ValueError):
        closed_form_f_full_eta(1.2)


def test_batch_matches_scalar_on_random_rows():
    rng = np.random.default_rng(7)
    rows = []
    for K in (2, 3, 4, 5):
        v = rng.random((50, K)) ** 2
        rows += list(v / np.linalg.norm(v, axis=1, keepdims=True))
    for row in rows:
        pass
    for K in (2, 3, 4, 5):
        block = np.array([r for r in rows if len(r) == K])
        ref = np.array([max_g(r).g_max for r in block])
        assert np.max(np.abs(max_g_batch(block) - ref)) < 1e-10


def test_batch_bounds_match_scalar_bounds():
    rng = np.random.default_rng(3)
    etas = rng.random((15, 4))
    W = np.array([w5_weights(e).moduli for e in etas])
    ff = f_full_batch(W)
    fp = f_part_batch(W, [5])
    for e, a, b in zip(etas, ff, fp):
        w = w5_weights(e)
        assert a == pytest.approx(f_full(w), abs=1e-10)
        assert b == pytest.approx(f_part(w, [5]), abs=1e-10)


def test_full_bound_outcome_serializes():
    d = full_bound(WWeights(np.full(4, 0.5))).to_dict()
    assert d["value"] == pytest.approx(27 / 64)
    assert d["partition"] == [[1], [2], [3], [4]]


def test_invalid_fallback_mode():
    with pytest.raises(ValueError):
        MaxGConfig(fallback="sometimes")
