"""Smoke tests for the _armada extension module."""

import numpy as np
import pytest

import _armada as am


def _toy(n=30, p=10, seed=0, shift=2.5):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p))
    y = (np.arange(n) < n // 2).astype(float)
    x[y == 0, :2] += shift
    return x, y


def test_standardize():
    x, _ = _toy()
    values, means, sds = am.standardize(x)
    assert values.shape == x.shape
    np.testing.assert_allclose(values.mean(axis=0), 0.0, atol=1e-10)
    np.testing.assert_allclose(values.std(axis=0, ddof=1), 1.0, atol=1e-10)
    np.testing.assert_allclose(means, x.mean(axis=0))
    assert (sds > 0).all()


def test_pc1_matches_numpy():
    x, _ = _toy(n=25, p=6, seed=1)
    z, _, _ = am.standardize(x)
    scores, eigenvalue = am.first_principal_component(z)
    corr = z.T @ z / (len(z) - 1)
    expected = np.linalg.eigvalsh(corr).max()
    assert eigenvalue == pytest.approx(expected, abs=1e-8)
    assert len(scores) == len(z)
    assert am.cluster_homogeneity(z) == pytest.approx(expected, abs=1e-8)


def test_hierarchical_cluster_two_blocks():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((40, 1))
    b = rng.standard_normal((40, 1))
    x = np.hstack([a + 0.05 * rng.standard_normal((40, 3)), b + 0.05 * rng.standard_normal((40, 3))])
    labels, homogeneity, heights = am.hierarchical_cluster(x, 2)
    assert len(set(labels[:3])) == 1
    assert len(set(labels[3:])) == 1
    assert labels[0] != labels[5]
    assert homogeneity > 5.0
    assert len(heights) == 5


def test_wilcoxon_exact_value():
    p = am.wilcoxon_rank_sum(np.array([1.0, 2.0, 3.0, 4.0]), np.array([0.0, 0.0, 1.0, 1.0]))
    assert p == pytest.approx(2.0 / 6.0)


def test_pearson_errors_on_constant():
    with pytest.raises(am.DataError):
        am.pearson_cor_test(np.ones(5), np.arange(5.0))


def test_bh_adjustment():
    adj = am.adjust_pvalues([0.01, 0.02, 0.03], "bh")
    np.testing.assert_allclose(adj, [0.03, 0.03, 0.03])


def test_lasso_selects_signal():
    rng = np.random.default_rng(7)
    x = rng.standard_normal((50, 8))
    y = 2.0 * x[:, 3]
    assert am.lasso_select(x, y, "continuous", folds=5, seed=1) == [3]


def test_forest_importance_ranks_signal():
    x, y = _toy(n=120, p=8, seed=9, shift=2.0)
    importances, sds, oob = am.forest_importance(x, y, "binary", n_trees=150, seed=3)
    assert int(np.argmax(importances)) in (0, 1)
    assert len(sds) == 8
    assert 0.0 <= oob <= 1.0


def test_factor_model_and_pretreat():
    x = am.simulate_cluster(30, 2, 0.8, 50, seed=11)
    y = (np.arange(50) < 25).astype(float)
    q = am.select_num_factors(x, y, "binary", 5)
    model = am.fit_factor_model(x, y, "binary", q)
    assert 0.0 <= model["common_variance"] <= 1.0
    corrected = am.pretreat(x, y, "binary", [1] * 30, q_max=5)
    raw_corr = np.corrcoef(x, rowvar=False)
    new_corr = np.corrcoef(corrected, rowvar=False)
    off = ~np.eye(30, dtype=bool)
    assert np.abs(new_corr[off]).mean() < np.abs(raw_corr[off]).mean()


def test_full_pipeline_scores():
    x, y = _toy(n=40, p=12, seed=5, shift=3.0)
    out = am.armada_scores(x, y, "binary", k=2, seed=1, bank=["bonferroni", "bh", "lasso"])
    scores = np.asarray(out["scores"])
    assert scores.shape == (12,)
    assert scores.max() <= 3
    assert out["chosen_k"] == 2
    # The shifted covariates outscore the noise.
    assert scores[:2].min() >= scores[2:].max()


def test_simulated_design_shapes():
    x, y, truth = am.simulate_design("main", seed=2)
    assert x.shape == (60, 1600)
    assert sum(truth) == 160
    assert sum(y) == 30
    x2, _, _ = am.simulate_design("main", seed=2)
    np.testing.assert_array_equal(x, x2)


def test_determinism_across_jobs():
    x, y = _toy(n=36, p=10, seed=13, shift=2.0)
    am.set_max_jobs(1)
    a = am.armada_scores(x, y, "binary", k=2, seed=42, bank=["bh", "lasso"])
    am.set_max_jobs(4)
    b = am.armada_scores(x, y, "binary", k=2, seed=42, bank=["bh", "lasso"])
    am.set_max_jobs(2)
    assert a["scores"] == b["scores"]
