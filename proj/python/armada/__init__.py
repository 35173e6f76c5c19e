"""Covariate selection under dependence.

Thin wrapper over the `_armada` extension: covariate clustering,
per-cluster latent-factor decorrelation, and aggregation of selection
methods into per-covariate scores.
"""

from _armada import (  # noqa: F401
    DataError,
    adjust_pvalues,
    adjusted_rand_index,
    armada_scores,
    cluster_homogeneity,
    first_principal_component,
    fit_factor_model,
    forest_importance,
    hierarchical_cluster,
    lasso_select,
    pearson_cor_test,
    pretreat,
    select_num_factors,
    set_max_jobs,
    simulate_cluster,
    simulate_design,
    stability_select_k,
    standardize,
    wilcoxon_rank_sum,
)

__all__ = [
    "DataError",
    "adjust_pvalues",
    "adjusted_rand_index",
    "armada_scores",
    "cluster_homogeneity",
    "first_principal_component",
    "fit_factor_model",
    "forest_importance",
    "hierarchical_cluster",
    "lasso_select",
    "pearson_cor_test",
    "pretreat",
    "select_num_factors",
    "set_max_jobs",
    "simulate_cluster",
    "simulate_design",
    "stability_select_k",
    "standardize",
    "wilcoxon_rank_sum",
]
