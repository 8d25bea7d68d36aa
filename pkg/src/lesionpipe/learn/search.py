"""Seeded random search over forest hyperparameters, ranked by CV accuracy."""

from dataclasses import dataclass

import numpy as np

from .cv import CVResult, cross_validate
from .forest import ForestParams

DEFAULT_SEARCH_SAMPLES = 50


@dataclass(frozen=True)
class SearchSpace:
    """Candidate ranges: discrete tree counts and feature subsets, log-uniform alpha."""

    n_trees_choices: tuple = (100, 300, 500, 1000)
    ccp_alpha_range: tuple = (1e-4, 1e-1)
    max_features_choices: tuple = (None,)
    n_samples: int = DEFAULT_SEARCH_SAMPLES

    def __post_init__(self):
        if not self.n_trees_choices or not self.max_features_choices:
            raise ValueError("search space must have nonempty choice lists")
        lo, hi = self.ccp_alpha_range
        if not (0 < lo <= hi):
            raise ValueError(f"ccp_alpha_range must satisfy 0 < lo <= hi, got {self.ccp_alpha_range}")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")


def sample_params(space: SearchSpace, rng: np.random.Generator, base: ForestParams) -> ForestParams:
    lo, hi = space.ccp_alpha_range
    if lo == hi:
        alpha = float(lo)
    else:
        alpha = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
    return ForestParams(
        n_trees=int(rng.choice(np.asarray(space.n_trees_choices))),
        ccp_alpha=alpha,
        max_features=space.max_features_choices[int(rng.integers(len(space.max_features_choices)))],
        min_samples_split=base.min_samples_split,
        seed=base.seed,
    )


def random_search(X, y, space: SearchSpace | None = None, n: int | None = None,
                  k: int = 10, seed: int = 0, base_params: ForestParams | None = None) -> list:
    """Sample n combinations (duplicates dropped), cross-validate, rank by mean accuracy.

    Every combination is evaluated with the same CV seed, so all candidates
    see identical folds; ties keep the earlier sample.
    """
    if space is None:
        space = SearchSpace()
    if n is None:
        n = space.n_samples
    if base_params is None:
        base_params = ForestParams()
    rng = np.random.default_rng(seed)
    sampled = []
    seen = set()
    for _ in range(n):
        params = sample_params(space, rng, base_params)
        key = (params.n_trees, params.ccp_alpha, params.max_features)
        if key in seen:
            continue
        seen.add(key)
        sampled.append(params)
    results: list[tuple[ForestParams, CVResult]] = []
    for params in sampled:
        results.append((params, cross_validate(X, y, params, k=k, seed=seed)))
    order = sorted(range(len(results)), key=lambda i: (-results[i][1].mean, i))
    return [results[i] for i in order]
