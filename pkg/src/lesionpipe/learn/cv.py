"""Stratified k-fold cross-validation of the forest classifier."""

from dataclasses import dataclass

import numpy as np

from .forest import ForestParams, _check_features, _check_labels, fit_forest, with_seed

DEFAULT_FOLDS = 10


@dataclass(frozen=True)
class CVResult:
    fold_accuracies: tuple
    mean: float
    params: ForestParams
    seed: int

    def __post_init__(self):
        if abs(self.mean - float(np.mean(self.fold_accuracies))) > 1e-12:
            raise ValueError("mean does not match the fold accuracies")


def stratified_kfold(y, k: int, seed: int = 0) -> list:
    """Partition 0..n-1 into k folds with per-class counts differing by <= 1.

    Indices of each class are shuffled with the seeded generator, then dealt
    round-robin with a fold cursor that continues across classes, which also
    keeps total fold sizes within 1 of each other.
    """
    y = np.asarray(y)
    n = y.size
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of samples ({n})")
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(k)]
    cursor = 0
    for cls in np.unique(y):
        members = np.flatnonzero(y == cls)
        rng.shuffle(members)
        for idx in members:
            folds[cursor % k].append(int(idx))
            cursor += 1
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


def _fold_seed(seed: int, params_seed: int, fold: int) -> int:
    return int(np.random.SeedSequence([seed, params_seed, fold]).generate_state(1, np.uint64)[0])


def cross_validate(X, y, params: ForestParams | None = None, k: int = DEFAULT_FOLDS,
                   seed: int = 0, return_predictions: bool = False):
    """k-fold accuracy of the forest; each fold trains on the complement.

    The fold assignment and every per-fold forest seed derive from ``seed``
    (mixed with params.seed), so re-seeding re-randomizes the whole run.
    """
    if params is None:
        params = ForestParams()
    X = _check_features(X)
    y = _check_labels(y, X.shape[0])
    folds = stratified_kfold(y, k, seed)
    accuracies = []
    oof_pred = np.full(y.size, -1, dtype=np.int64)
    oof_frac1 = np.zeros(y.size, dtype=np.float64)
    oof_fold = np.full(y.size, -1, dtype=np.int64)
    for i, fold in enumerate(folds):
        train = np.setdiff1d(np.arange(y.size), fold, assume_unique=False)
        model = fit_forest(X[train], y[train], with_seed(params, _fold_seed(seed, params.seed, i)))
        labels, fracs = model.predict(X[fold])
        accuracies.append(float(np.mean(labels == y[fold])))
        oof_pred[fold] = labels
        oof_frac1[fold] = fracs[:, 1]
        oof_fold[fold] = i
    result = CVResult(
        fold_accuracies=tuple(accuracies),
        mean=float(np.mean(accuracies)),
        params=params,
        seed=int(seed),
    )
    if return_predictions:
        return result, oof_pred, oof_frac1, oof_fold
    return result
