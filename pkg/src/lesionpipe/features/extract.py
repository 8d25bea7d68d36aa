"""The full extraction pipeline: resample, discretize, compute all 70 features.

Texture families are computed in 2-D on every axial slice holding at least
``min_slice_pixels`` ROI pixels and averaged across those slices with equal
weight; gray levels come from a single discretization of the whole 3-D ROI so
slices share one scale.  First-order statistics use the whole ROI voxel set
and shape the whole 3-D mask.
"""

import numpy as np

from ..grid import LabelMask, Volume3D, discretize, resample_image_inplane, resample_mask_inplane
from .catalog import FeatureVector, catalog_names
from .config import ExtractionConfig
from .firstorder import first_order_features
from .shape import shape_features
from .texture import (
    glcm_features,
    gldm_features,
    glrlm_features,
    glszm_features,
    ngtdm_features,
)

_TEXTURE_FUNCS = (
    ("glcm", lambda b, cfg, ng: glcm_features(b, cfg, ng=ng)),
    ("glrlm", lambda b, cfg, ng: glrlm_features(b, ng=ng)),
    ("glszm", lambda b, cfg, ng: glszm_features(b, ng=ng)),
    ("ngtdm", lambda b, cfg, ng: ngtdm_features(b, cfg, ng=ng)),
    ("gldm", lambda b, cfg, ng: gldm_features(b, cfg, ng=ng)),
)


def _texture_means(bin_map: np.ndarray, slice_idx: list, cfg: ExtractionConfig, ng: int) -> tuple:
    """Average each texture family over its contributing slices.

    A slice can fail a single family (a sparse slice may have no GLCM pair in
    any direction); it is then skipped for that family only.
    """
    sums: dict = {}
    counts: dict = {fam: 0 for fam, _ in _TEXTURE_FUNCS}
    for k in slice_idx:
        sl = bin_map[:, :, k]
        for fam, func in _TEXTURE_FUNCS:
            try:
                feats = func(sl, cfg, ng)
            except ValueError:
                continue
            counts[fam] += 1
            for name, val in feats.items():
                sums[name] = sums.get(name, 0.0) + val
    values = {}
    degenerate = set()
    for fam, _ in _TEXTURE_FUNCS:
        fam_names = catalog_names(fam)
        if counts[fam] == 0:
            degenerate.update(fam_names)
            for name in fam_names:
                values[name] = 0.0
        else:
            for name in fam_names:
                values[name] = sums[name] / counts[fam]
    return values, degenerate


def extract_all(vol: Volume3D, mask: LabelMask, cfg: ExtractionConfig | None = None) -> FeatureVector:
    """Compute the full 70-feature catalog for one (image, mask) pair."""
    if cfg is None:
        cfg = ExtractionConfig()
    if mask.is_empty():
        raise ValueError("extract_all needs a nonempty ROI")
    vol_r = resample_image_inplane(vol, cfg.target_xy_spacing)
    mask_r = resample_mask_inplane(mask, cfg.target_xy_spacing)
    if mask_r.is_empty():
        raise ValueError("ROI vanished during in-plane resampling; use a finer target spacing")

    roi = discretize(vol_r, mask_r, cfg.bin_width)
    bin_map = roi.bin_map()

    values = {}
    values.update(first_order_features(vol_r, mask_r, cfg))
    values.update(shape_features(mask_r))

    per_slice = np.count_nonzero(mask_r.labels, axis=(0, 1))
    slice_idx = [int(k) for k in np.flatnonzero(per_slice >= cfg.min_slice_pixels)]
    texture_values, degenerate = _texture_means(bin_map, slice_idx, cfg, roi.num_levels)
    values.update(texture_values)

    ordered = {name: float(values[name]) for name in catalog_names()}
    return FeatureVector(
        values=ordered,
        config_hash=cfg.digest(),
        n_slices_used=len(slice_idx),
        degenerate=frozenset(degenerate),
    )
