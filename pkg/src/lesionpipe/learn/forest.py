"""Random forest classifier for the dichotomized survival label.

Each tree trains on a bootstrap of size n drawn from its own seeded stream,
grows with Gini splits over a random feature subset per node and is then
pruned by minimal cost-complexity at ccp_alpha.  Training and prediction are
fully deterministic for a given seed.
"""

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from ._treekernel import fit_forest_arrays, predict_votes

MODEL_FORMAT_VERSION = 1

CLASSES = (0, 1)


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 1000
    ccp_alpha: float = 0.01
    max_features: int | None = None  # None -> ceil(sqrt(p)) at fit time
    min_samples_split: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.ccp_alpha < 0:
            raise ValueError("ccp_alpha must be >= 0")
        if self.max_features is not None and self.max_features < 1:
            raise ValueError("max_features must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")


@dataclass(frozen=True)
class ForestModel:
    """Trained forest; per-tree nodes live in padded parallel arrays."""

    params: ForestParams
    feature_names: tuple
    n_features: int
    feature: np.ndarray    # (n_trees, max_nodes) int32, -1 for leaves
    threshold: np.ndarray  # float64
    left: np.ndarray       # int32
    right: np.ndarray      # int32
    count0: np.ndarray     # int64 leaf/internal class counts
    count1: np.ndarray
    n_nodes: np.ndarray    # int64 per tree
    classes: tuple = CLASSES

    @property
    def n_trees(self) -> int:
        return self.feature.shape[0]

    def predict(self, X) -> tuple:
        """Majority-vote labels and per-class vote fractions (ties go to class 0)."""
        X = _check_features(X, self.n_features)
        votes1 = predict_votes(X, self.feature, self.threshold, self.left, self.right,
                               self.count0, self.count1)
        n = self.n_trees
        frac1 = votes1 / n
        frac0 = (n - votes1) / n
        labels = (votes1 > n - votes1).astype(np.int64)
        return labels, np.stack([frac0, frac1], axis=1)

    def to_json_dict(self) -> dict:
        trees = []
        for ti in range(self.n_trees):
            nn = int(self.n_nodes[ti])
            trees.append(
                {
                    "feature": self.feature[ti, :nn].tolist(),
                    "threshold": self.threshold[ti, :nn].tolist(),
                    "left": self.left[ti, :nn].tolist(),
                    "right": self.right[ti, :nn].tolist(),
                    "counts": np.stack([self.count0[ti, :nn], self.count1[ti, :nn]], axis=1).tolist(),
                }
            )
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "params": {
                "n_trees": self.params.n_trees,
                "ccp_alpha": self.params.ccp_alpha,
                "max_features": self.params.max_features,
                "min_samples_split": self.params.min_samples_split,
                "seed": self.params.seed,
            },
            "classes": list(self.classes),
            "feature_names": list(self.feature_names),
            "n_features": self.n_features,
            "trees": trees,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ForestModel":
        if doc.get("format_version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {doc.get('format_version')}")
        params = ForestParams(**doc["params"])
        trees = doc["trees"]
        n_trees = len(trees)
        max_nodes = max(len(t["feature"]) for t in trees)
        feature = np.full((n_trees, max_nodes), -1, np.int32)
        threshold = np.zeros((n_trees, max_nodes), np.float64)
        left = np.full((n_trees, max_nodes), -1, np.int32)
        right = np.full((n_trees, max_nodes), -1, np.int32)
        count0 = np.zeros((n_trees, max_nodes), np.int64)
        count1 = np.zeros((n_trees, max_nodes), np.int64)
        n_nodes = np.zeros(n_trees, np.int64)
        for ti, t in enumerate(trees):
            nn = len(t["feature"])
            n_nodes[ti] = nn
            feature[ti, :nn] = t["feature"]
            threshold[ti, :nn] = t["threshold"]
            left[ti, :nn] = t["left"]
            right[ti, :nn] = t["right"]
            counts = np.asarray(t["counts"], dtype=np.int64)
            count0[ti, :nn] = counts[:, 0]
            count1[ti, :nn] = counts[:, 1]
        return cls(
            params=params,
            feature_names=tuple(doc["feature_names"]),
            n_features=int(doc["n_features"]),
            feature=feature,
            threshold=threshold,
            left=left,
            right=right,
            count0=count0,
            count1=count1,
            n_nodes=n_nodes,
            classes=tuple(doc["classes"]),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            json.dump(self.to_json_dict(), fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "ForestModel":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


def _check_features(X, expected_p: int | None = None) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"feature matrix must be 2-D, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("feature matrix contains non-finite entries")
    if expected_p is not None and X.shape[1] != expected_p:
        raise ValueError(f"expected {expected_p} features, got {X.shape[1]}")
    return X


def _check_labels(y, n: int) -> np.ndarray:
    y = np.asarray(y)
    if y.shape != (n,):
        raise ValueError(f"labels must have shape ({n},), got {y.shape}")
    y = y.astype(np.int64)
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 or 1")
    return y


def _tree_seeds(seed: int, n_trees: int) -> np.ndarray:
    return np.random.SeedSequence(seed).generate_state(n_trees, dtype=np.uint64)


def fit_forest(X, y, params: ForestParams | None = None, feature_names=None) -> ForestModel:
    """Train a forest; a single-class y yields a constant (but valid) predictor."""
    if params is None:
        params = ForestParams()
    X = _check_features(X)
    n, p = X.shape
    if n < 2:
        raise ValueError("need at least 2 samples")
    y = _check_labels(y, n)
    if feature_names is None:
        feature_names = tuple(f"f{i}" for i in range(p))
    elif len(feature_names) != p:
        raise ValueError("feature_names length must match the feature count")
    max_features = params.max_features
    if max_features is None:
        max_features = int(math.ceil(math.sqrt(p)))
    max_features = min(max_features, p)
    seeds = _tree_seeds(params.seed, params.n_trees)
    feature, threshold, left, right, count0, count1, n_nodes = fit_forest_arrays(
        X, y, seeds, max_features, params.min_samples_split, float(params.ccp_alpha), True
    )
    return ForestModel(
        params=params,
        feature_names=tuple(feature_names),
        n_features=p,
        feature=feature,
        threshold=threshold,
        left=left,
        right=right,
        count0=count0,
        count1=count1,
        n_nodes=n_nodes,
    )


def fit_tree(X, y, ccp_alpha: float = 0.0, min_samples_split: int = 2, seed: int = 0,
             bootstrap: bool = False, max_features: int | None = None) -> ForestModel:
    """Single CART grown on the full data (no bootstrap by default)."""
    X = _check_features(X)
    n, p = X.shape
    y = _check_labels(y, n)
    params = ForestParams(
        n_trees=1,
        ccp_alpha=ccp_alpha,
        max_features=p if max_features is None else max_features,
        min_samples_split=min_samples_split,
        seed=seed,
    )
    seeds = _tree_seeds(seed, 1)
    arrays = fit_forest_arrays(X, y, seeds, params.max_features, min_samples_split,
                               float(ccp_alpha), bootstrap)
    feature, threshold, left, right, count0, count1, n_nodes = arrays
    return ForestModel(
        params=params,
        feature_names=tuple(f"f{i}" for i in range(p)),
        n_features=p,
        feature=feature,
        threshold=threshold,
        left=left,
        right=right,
        count0=count0,
        count1=count1,
        n_nodes=n_nodes,
    )


def predict(model: ForestModel, X) -> tuple:
    """Functional alias of :meth:`ForestModel.predict`."""
    return model.predict(X)


def with_seed(params: ForestParams, seed: int) -> ForestParams:
    return replace(params, seed=int(seed))
