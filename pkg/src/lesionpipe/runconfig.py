"""Pipeline configuration: TOML sections [extract], [postproc], [review], [learn].

Unset keys fall back to the standard defaults (25 HU bins, 0.3 review
threshold, 1000 trees with ccp_alpha 0.01, 10 folds, 50 search samples).
Strict loading rejects unknown sections and keys as well as type mismatches;
the digest of the effective configuration is recorded into every report.
"""

import hashlib
import json
from dataclasses import dataclass, field, replace

import tomli

from .evaluate import DEFAULT_MIN_DICE
from .features import ExtractionConfig
from .learn import DEFAULT_FOLDS, DEFAULT_SEARCH_SAMPLES, ForestParams
from .postproc import DEFAULT_CONNECTIVITY


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    extract: ExtractionConfig = field(default_factory=ExtractionConfig)
    connectivity: int = DEFAULT_CONNECTIVITY
    threshold: float = 0.5
    min_dice: float = DEFAULT_MIN_DICE
    forest: ForestParams = field(default_factory=ForestParams)
    cv_folds: int = DEFAULT_FOLDS
    n_search: int = DEFAULT_SEARCH_SAMPLES

    def as_dict(self) -> dict:
        return {
            "extract": {
                "bin_width": self.extract.bin_width,
                "target_spacing_xy": list(self.extract.target_xy_spacing),
                "min_slice_pixels": self.extract.min_slice_pixels,
                "glcm_distance": self.extract.glcm_distance,
                "delta": self.extract.ngtdm_gldm_delta,
                "alpha": self.extract.gldm_alpha,
            },
            "postproc": {"connectivity": self.connectivity, "threshold": self.threshold},
            "review": {"min_dice": self.min_dice},
            "learn": {
                "n_trees": self.forest.n_trees,
                "ccp_alpha": self.forest.ccp_alpha,
                "max_features": self.forest.max_features,
                "min_samples_split": self.forest.min_samples_split,
                "k": self.cv_folds,
                "n_search": self.n_search,
            },
        }

    def digest(self) -> str:
        canon = json.dumps(self.as_dict(), sort_keys=True)
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:12]


def _want_number(section: str, key: str, value, integer: bool = False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"[{section}] {key}: expected a number, got {value!r}")
    if integer:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"[{section}] {key}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _want_pair(section: str, key: str, value) -> tuple:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"[{section}] {key}: expected a pair of numbers, got {value!r}")
    return tuple(_want_number(section, key, v) for v in value)


_KNOWN_KEYS = {
    "extract": {"bin_width", "target_spacing_xy", "min_slice_pixels", "glcm_distance", "delta", "alpha"},
    "postproc": {"connectivity", "threshold"},
    "review": {"min_dice"},
    "learn": {"n_trees", "ccp_alpha", "max_features", "min_samples_split", "k", "n_search"},
}


def config_from_dict(doc: dict, strict: bool = True) -> RunConfig:
    if strict:
        for section, body in doc.items():
            if section not in _KNOWN_KEYS:
                raise ConfigError(f"unknown config section [{section}]")
            if not isinstance(body, dict):
                raise ConfigError(f"section [{section}] must hold key/value pairs")
            unknown = set(body) - _KNOWN_KEYS[section]
            if unknown:
                raise ConfigError(f"unknown key(s) in [{section}]: {sorted(unknown)}")
    cfg = RunConfig()
    ext = doc.get("extract", {})
    extract = ExtractionConfig(
        bin_width=_want_number("extract", "bin_width", ext["bin_width"]) if "bin_width" in ext else cfg.extract.bin_width,
        target_xy_spacing=_want_pair("extract", "target_spacing_xy", ext["target_spacing_xy"])
        if "target_spacing_xy" in ext
        else cfg.extract.target_xy_spacing,
        min_slice_pixels=_want_number("extract", "min_slice_pixels", ext.get("min_slice_pixels", cfg.extract.min_slice_pixels), integer=True),
        glcm_distance=_want_number("extract", "glcm_distance", ext.get("glcm_distance", cfg.extract.glcm_distance), integer=True),
        ngtdm_gldm_delta=_want_number("extract", "delta", ext.get("delta", cfg.extract.ngtdm_gldm_delta), integer=True),
        gldm_alpha=_want_number("extract", "alpha", ext.get("alpha", cfg.extract.gldm_alpha)),
    )
    post = doc.get("postproc", {})
    review = doc.get("review", {})
    learn = doc.get("learn", {})
    forest = ForestParams(
        n_trees=_want_number("learn", "n_trees", learn.get("n_trees", cfg.forest.n_trees), integer=True),
        ccp_alpha=_want_number("learn", "ccp_alpha", learn.get("ccp_alpha", cfg.forest.ccp_alpha)),
        max_features=_want_number("learn", "max_features", learn["max_features"], integer=True)
        if "max_features" in learn
        else cfg.forest.max_features,
        min_samples_split=_want_number(
            "learn", "min_samples_split", learn.get("min_samples_split", cfg.forest.min_samples_split), integer=True
        ),
        seed=cfg.forest.seed,
    )
    return RunConfig(
        extract=extract,
        connectivity=_want_number("postproc", "connectivity", post.get("connectivity", cfg.connectivity), integer=True),
        threshold=_want_number("postproc", "threshold", post.get("threshold", cfg.threshold)),
        min_dice=_want_number("review", "min_dice", review.get("min_dice", cfg.min_dice)),
        forest=forest,
        cv_folds=_want_number("learn", "k", learn.get("k", cfg.cv_folds), integer=True),
        n_search=_want_number("learn", "n_search", learn.get("n_search", cfg.n_search), integer=True),
    )


def load_config(path, strict: bool = True) -> RunConfig:
    with open(path, "rb") as fh:
        try:
            doc = tomli.load(fh)
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(doc, strict=strict)


def config_with_seed(cfg: RunConfig, seed: int) -> RunConfig:
    return replace(cfg, forest=replace(cfg.forest, seed=int(seed)))
