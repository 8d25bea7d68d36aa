"""First-order intensity statistics over the whole 3-D ROI."""

import numpy as np

from ..grid import LabelMask, Volume3D, discretize


def _histogram_probs(bins: np.ndarray, num_levels: int) -> np.ndarray:
    counts = np.bincount(bins, minlength=num_levels + 1)[1:]
    return counts / counts.sum()


def first_order_features(vol: Volume3D, mask: LabelMask, cfg) -> dict:
    """The 17 first-order features, keyed by catalog name.

    Entropy and Uniformity are computed on the fixed-bin-width histogram
    (bins relative to the ROI minimum), everything else on the raw HU values.
    Skewness and Kurtosis are defined as 0 for a constant ROI.
    """
    roi = discretize(vol, mask, cfg.bin_width)
    x = vol.values[mask.labels != 0].astype(np.float64)
    n = x.size
    mean = float(x.mean())
    dev = x - mean
    m2 = float(np.mean(dev**2))
    p10, p25, p75, p90 = (float(np.percentile(x, q)) for q in (10, 25, 75, 90))
    if m2 > 0:
        skewness = float(np.mean(dev**3)) / m2**1.5
        kurtosis = float(np.mean(dev**4)) / m2**2
    else:
        skewness = 0.0
        kurtosis = 0.0
    robust = x[(x >= p10) & (x <= p90)]
    if robust.size:
        rmad = float(np.mean(np.abs(robust - robust.mean())))
    else:
        rmad = 0.0
    p = _histogram_probs(roi.bins, roi.num_levels)
    nz = p[p > 0]
    return {
        "firstorder_Mean": mean,
        "firstorder_Median": float(np.median(x)),
        "firstorder_Minimum": float(x.min()),
        "firstorder_Maximum": float(x.max()),
        "firstorder_Range": float(x.max() - x.min()),
        "firstorder_Percentile10": p10,
        "firstorder_Percentile90": p90,
        "firstorder_InterquartileRange": p75 - p25,
        "firstorder_Variance": m2,
        "firstorder_Skewness": skewness,
        "firstorder_Kurtosis": kurtosis,
        "firstorder_Energy": float(np.sum(x**2)),
        "firstorder_RootMeanSquared": float(np.sqrt(np.mean(x**2))),
        "firstorder_MeanAbsoluteDeviation": float(np.mean(np.abs(dev))),
        "firstorder_RobustMeanAbsoluteDeviation": rmad,
        "firstorder_Entropy": float(-np.sum(nz * np.log2(nz))),
        "firstorder_Uniformity": float(np.sum(p**2)),
    }
