"""Survival classification harness: random forest, CV, t-tests, random search."""

from .cv import DEFAULT_FOLDS, CVResult, cross_validate, stratified_kfold
from .forest import (
    CLASSES,
    ForestModel,
    ForestParams,
    fit_forest,
    fit_tree,
    predict,
    with_seed,
)
from .search import DEFAULT_SEARCH_SAMPLES, SearchSpace, random_search
from .stats import TTestResult, regularized_incomplete_beta, t_two_sided_p, welch_t_test
from .tables import join_feature_tables

SURVIVAL_THRESHOLD_MONTHS = 60.0  # five years


def dichotomize_survival(months, threshold_months: float = SURVIVAL_THRESHOLD_MONTHS) -> list:
    """1 for survival at or above the threshold (default five years), else 0."""
    out = []
    for m in months:
        m = float(m)
        if m < 0:
            raise ValueError(f"survival months must be >= 0, got {m}")
        out.append(1 if m >= threshold_months else 0)
    return out


__all__ = [
    "CLASSES",
    "CVResult",
    "DEFAULT_FOLDS",
    "DEFAULT_SEARCH_SAMPLES",
    "ForestModel",
    "ForestParams",
    "SURVIVAL_THRESHOLD_MONTHS",
    "SearchSpace",
    "TTestResult",
    "cross_validate",
    "dichotomize_survival",
    "fit_forest",
    "fit_tree",
    "join_feature_tables",
    "predict",
    "random_search",
    "regularized_incomplete_beta",
    "stratified_kfold",
    "t_two_sided_p",
    "welch_t_test",
    "with_seed",
]
