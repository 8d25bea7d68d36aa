"""Texture matrices and features on a 2-D slice of gray-level bins.

Every function takes an int array where 0 marks pixels outside the ROI and
in-ROI pixels carry 1-based bins.  ``ng`` fixes the number of gray levels
(rows) of the matrices; trailing empty levels never change a feature value,
so per-slice features computed against the global level count match the
slice-local ones exactly.

GLCM and GLRLM use the four in-plane directions (0, 45, 90, 135 degrees) and
average features over them; GLSZM zones and all neighborhoods are
8-connected at the configured Chebyshev distance.
"""

import numpy as np
from scipy import ndimage

_DIRECTIONS = ((0, 1), (1, 1), (1, 0), (1, -1))

NGTDM_COARSENESS_CAP = 1e6


def _as_bins(bins) -> np.ndarray:
    arr = np.asarray(bins)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D bin slice, got shape {arr.shape}")
    if arr.min(initial=0) < 0:
        raise ValueError("bins must be >= 0 (0 marks outside the ROI)")
    return arr.astype(np.int64)


def _derive_ng(arr: np.ndarray, ng: int | None) -> int:
    top = int(arr.max(initial=0))
    if top == 0:
        raise ValueError("slice ROI is empty")
    if ng is None:
        return top
    if ng < top:
        raise ValueError(f"ng={ng} is smaller than the largest bin {top}")
    return int(ng)


def _shifted_views(arr: np.ndarray, da: int, db: int) -> tuple:
    """Views (a, b) with b displaced by (da, db) relative to a."""
    h, w = arr.shape
    a = arr[max(0, -da) : h + min(0, -da), max(0, -db) : w + min(0, -db)]
    b = arr[max(0, da) : h + min(0, da), max(0, db) : w + min(0, db)]
    return a, b


def glcm_matrices(bins, ng: int | None = None, distance: int = 1) -> list:
    """Symmetric co-occurrence count matrices, one per direction."""
    arr = _as_bins(bins)
    ng = _derive_ng(arr, ng)
    out = []
    for da, db in _DIRECTIONS:
        a, b = _shifted_views(arr, da * distance, db * distance)
        valid = (a > 0) & (b > 0)
        mat = np.zeros((ng, ng), dtype=np.float64)
        np.add.at(mat, (a[valid] - 1, b[valid] - 1), 1.0)
        out.append(mat + mat.T)
    return out


def _glcm_features_one(mat: np.ndarray) -> dict:
    total = mat.sum()
    p = mat / total
    ng = p.shape[0]
    i = np.arange(1, ng + 1, dtype=np.float64)
    ii, jj = np.meshgrid(i, i, indexing="ij")
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    mux = float(np.sum(i * px))
    muy = float(np.sum(i * py))
    sigx = float(np.sqrt(np.sum((i - mux) ** 2 * px)))
    sigy = float(np.sqrt(np.sum((i - muy) ** 2 * py)))
    if sigx * sigy > 0:
        correlation = float((np.sum(ii * jj * p) - mux * muy) / (sigx * sigy))
    else:
        correlation = 1.0  # a single occupied level is perfectly correlated
    nz = p[p > 0]
    # p_{x+y}(k), k = 2..2Ng and p_{x-y}(k), k = 0..Ng-1
    psum = np.zeros(2 * ng + 1)
    np.add.at(psum, (ii + jj).astype(np.int64).ravel(), p.ravel())
    pdiff = np.zeros(ng)
    np.add.at(pdiff, np.abs(ii - jj).astype(np.int64).ravel(), p.ravel())
    k_sum = np.arange(2 * ng + 1, dtype=np.float64)
    k_diff = np.arange(ng, dtype=np.float64)
    da = float(np.sum(k_diff * pdiff))
    nz_diff = pdiff[pdiff > 0]
    return {
        "glcm_JointEnergy": float(np.sum(p**2)),
        "glcm_JointEntropy": float(-np.sum(nz * np.log2(nz))),
        "glcm_Contrast": float(np.sum((ii - jj) ** 2 * p)),
        "glcm_Correlation": correlation,
        "glcm_InverseDifferenceMoment": float(np.sum(p / (1.0 + (ii - jj) ** 2))),
        "glcm_InverseDifference": float(np.sum(p / (1.0 + np.abs(ii - jj)))),
        "glcm_SumAverage": float(np.sum(k_sum * psum)),
        "glcm_DifferenceEntropy": float(-np.sum(nz_diff * np.log2(nz_diff))),
        "glcm_DifferenceVariance": float(np.sum((k_diff - da) ** 2 * pdiff)),
        "glcm_Autocorrelation": float(np.sum(ii * jj * p)),
    }


def glcm_features(bins, cfg, ng: int | None = None) -> dict:
    """Per-direction GLCM features averaged over the directions holding pairs."""
    mats = glcm_matrices(bins, ng=ng, distance=cfg.glcm_distance)
    per_dir = [_glcm_features_one(m) for m in mats if m.sum() > 0]
    if not per_dir:
        raise ValueError("no co-occurring in-ROI pixel pair in any direction")
    return {k: float(np.mean([d[k] for d in per_dir])) for k in per_dir[0]}


def _extract_lines(arr: np.ndarray, direction: tuple) -> list:
    h, w = arr.shape
    if direction == (0, 1):
        return [arr[r, :] for r in range(h)]
    if direction == (1, 0):
        return [arr[:, c] for c in range(w)]
    if direction == (1, 1):
        return [np.diagonal(arr, offset=k) for k in range(-(h - 1), w)]
    if direction == (1, -1):
        fl = arr[:, ::-1]
        return [np.diagonal(fl, offset=k) for k in range(-(h - 1), w)]
    raise ValueError(f"unsupported direction {direction}")


def _accumulate_runs(line: np.ndarray, mat: np.ndarray) -> None:
    n = line.size
    if n == 0:
        return
    change = np.empty(n, dtype=bool)
    change[0] = True
    np.not_equal(line[1:], line[:-1], out=change[1:])
    starts = np.flatnonzero(change)
    lengths = np.diff(np.append(starts, n))
    vals = line[starts]
    keep = vals > 0
    np.add.at(mat, (vals[keep] - 1, lengths[keep] - 1), 1.0)


def glrlm_matrices(bins, ng: int | None = None) -> list:
    """Run-length count matrices (maximal equal-bin runs), one per direction."""
    arr = _as_bins(bins)
    ng = _derive_ng(arr, ng)
    max_len = max(arr.shape)
    out = []
    for direction in _DIRECTIONS:
        mat = np.zeros((ng, max_len), dtype=np.float64)
        for line in _extract_lines(arr, direction):
            _accumulate_runs(np.ascontiguousarray(line), mat)
        out.append(mat)
    return out


def _distribution_features(mat: np.ndarray, n_pixels: int) -> dict:
    """Shared feature set of the gray-level x (length|size|dependence) matrices."""
    total = mat.sum()
    i = np.arange(1, mat.shape[0] + 1, dtype=np.float64)
    j = np.arange(1, mat.shape[1] + 1, dtype=np.float64)
    row_sums = mat.sum(axis=1)
    col_sums = mat.sum(axis=0)
    p = mat / total
    mu_i = float(np.sum(i * p.sum(axis=1)))
    mu_j = float(np.sum(j * p.sum(axis=0)))
    nz = p[p > 0]
    return {
        "small": float(np.sum(col_sums / j**2) / total),
        "large": float(np.sum(col_sums * j**2) / total),
        "gln": float(np.sum(row_sums**2) / total),
        "glnn": float(np.sum(row_sums**2) / total**2),
        "sn": float(np.sum(col_sums**2) / total),
        "snn": float(np.sum(col_sums**2) / total**2),
        "percentage": float(total / n_pixels),
        "gl_variance": float(np.sum((i - mu_i) ** 2 * p.sum(axis=1))),
        "size_variance": float(np.sum((j - mu_j) ** 2 * p.sum(axis=0))),
        "entropy": float(-np.sum(nz * np.log2(nz))),
    }


def glrlm_features(bins, ng: int | None = None) -> dict:
    arr = _as_bins(bins)
    n_pixels = int(np.count_nonzero(arr))
    mats = glrlm_matrices(arr, ng=ng)
    per_dir = [_distribution_features(m, n_pixels) for m in mats]
    mean = {k: float(np.mean([d[k] for d in per_dir])) for k in per_dir[0]}
    return {
        "glrlm_ShortRunEmphasis": mean["small"],
        "glrlm_LongRunEmphasis": mean["large"],
        "glrlm_GrayLevelNonUniformity": mean["gln"],
        "glrlm_GrayLevelNonUniformityNormalized": mean["glnn"],
        "glrlm_RunLengthNonUniformity": mean["sn"],
        "glrlm_RunLengthNonUniformityNormalized": mean["snn"],
        "glrlm_RunPercentage": mean["percentage"],
        "glrlm_GrayLevelVariance": mean["gl_variance"],
        "glrlm_RunVariance": mean["size_variance"],
        "glrlm_RunEntropy": mean["entropy"],
    }


def glszm_matrix(bins, ng: int | None = None) -> np.ndarray:
    """Size-zone counts: 8-connected equal-bin regions within the slice ROI."""
    arr = _as_bins(bins)
    ng = _derive_ng(arr, ng)
    n_pixels = int(np.count_nonzero(arr))
    mat = np.zeros((ng, n_pixels), dtype=np.float64)
    eight = np.ones((3, 3), dtype=bool)
    for level in np.unique(arr[arr > 0]):
        lab, k = ndimage.label(arr == level, structure=eight)
        if k == 0:
            continue
        sizes = np.bincount(lab.ravel())[1:]
        np.add.at(mat, (int(level) - 1, sizes - 1), 1.0)
    return mat


def glszm_features(bins, ng: int | None = None) -> dict:
    arr = _as_bins(bins)
    n_pixels = int(np.count_nonzero(arr))
    if n_pixels == 0:
        raise ValueError("slice ROI is empty")
    f = _distribution_features(glszm_matrix(arr, ng=ng), n_pixels)
    return {
        "glszm_SmallAreaEmphasis": f["small"],
        "glszm_LargeAreaEmphasis": f["large"],
        "glszm_GrayLevelNonUniformity": f["gln"],
        "glszm_GrayLevelNonUniformityNormalized": f["glnn"],
        "glszm_SizeZoneNonUniformity": f["sn"],
        "glszm_SizeZoneNonUniformityNormalized": f["snn"],
        "glszm_ZonePercentage": f["percentage"],
        "glszm_GrayLevelVariance": f["gl_variance"],
        "glszm_ZoneVariance": f["size_variance"],
        "glszm_ZoneEntropy": f["entropy"],
    }


def _neighbor_sums(arr: np.ndarray, delta: int) -> tuple:
    """Per-pixel sum and count of in-ROI neighbor bins within Chebyshev delta."""
    h, w = arr.shape
    inroi = arr > 0
    padded_vals = np.pad(arr.astype(np.float64), delta)
    padded_roi = np.pad(inroi.astype(np.float64), delta)
    sum_nb = np.zeros((h, w), dtype=np.float64)
    cnt_nb = np.zeros((h, w), dtype=np.float64)
    for da in range(-delta, delta + 1):
        for db in range(-delta, delta + 1):
            if da == 0 and db == 0:
                continue
            sum_nb += padded_vals[delta + da : delta + da + h, delta + db : delta + db + w]
            cnt_nb += padded_roi[delta + da : delta + da + h, delta + db : delta + db + w]
    return sum_nb, cnt_nb, inroi


def ngtdm_table(bins, ng: int | None = None, delta: int = 1) -> tuple:
    """Gray-tone difference sums s_i and pixel counts n_i.

    Only pixels with at least one in-ROI neighbor contribute; each adds
    |bin - mean neighbor bin| to its level's s entry.
    """
    arr = _as_bins(bins)
    ng = _derive_ng(arr, ng)
    sum_nb, cnt_nb, inroi = _neighbor_sums(arr, delta)
    valid = inroi & (cnt_nb > 0)
    levels = arr[valid]
    abar = sum_nb[valid] / cnt_nb[valid]
    s = np.bincount(levels, weights=np.abs(levels - abar), minlength=ng + 1)[1:]
    n = np.bincount(levels, minlength=ng + 1)[1:].astype(np.float64)
    return s, n


def ngtdm_features(bins, cfg, ng: int | None = None) -> dict:
    s, n = ngtdm_table(bins, ng=ng, delta=cfg.ngtdm_gldm_delta)
    total = n.sum()
    levels = np.arange(1, s.size + 1, dtype=np.float64)
    if total == 0:
        # no pixel has an in-ROI neighbor (single-pixel ROI): all sums vanish
        return {
            "ngtdm_Coarseness": NGTDM_COARSENESS_CAP,
            "ngtdm_Contrast": 0.0,
            "ngtdm_Busyness": 0.0,
            "ngtdm_Complexity": 0.0,
            "ngtdm_Strength": 0.0,
        }
    p = n / total
    pos = p > 0
    ngp = int(np.count_nonzero(pos))
    ps_sum = float(np.sum(p * s))
    coarseness = 1.0 / ps_sum if ps_sum > 0 else NGTDM_COARSENESS_CAP
    if ngp > 1:
        pij = np.outer(p, p)
        dij2 = (levels[:, None] - levels[None, :]) ** 2
        contrast = float(np.sum(pij * dij2) / (ngp * (ngp - 1)) * (s.sum() / total))
    else:
        contrast = 0.0
    ip = levels[pos] * p[pos]
    busy_denom = float(np.sum(np.abs(ip[:, None] - ip[None, :])))
    busyness = ps_sum / busy_denom if busy_denom > 0 else 0.0
    lv = levels[pos]
    pv = p[pos]
    sv = s[pos]
    dij = np.abs(lv[:, None] - lv[None, :])
    ps_pair = pv[:, None] * sv[:, None] + pv[None, :] * sv[None, :]
    complexity = float(np.sum(dij * ps_pair / (pv[:, None] + pv[None, :])) / total)
    s_sum = float(s.sum())
    if s_sum > 0:
        strength = float(np.sum((pv[:, None] + pv[None, :]) * (lv[:, None] - lv[None, :]) ** 2) / s_sum)
    else:
        strength = 0.0
    return {
        "ngtdm_Coarseness": coarseness,
        "ngtdm_Contrast": contrast,
        "ngtdm_Busyness": busyness,
        "ngtdm_Complexity": complexity,
        "ngtdm_Strength": strength,
    }


def gldm_matrix(bins, ng: int | None = None, delta: int = 1, alpha: float = 0.0) -> np.ndarray:
    """Dependence counts: D(i, k) pixels of level i with dependence k.

    Dependence = 1 + number of in-ROI neighbors within Chebyshev delta whose
    bin differs by at most alpha.
    """
    arr = _as_bins(bins)
    ng = _derive_ng(arr, ng)
    h, w = arr.shape
    inroi = arr > 0
    padded_vals = np.pad(arr, delta)
    padded_roi = np.pad(inroi, delta)
    dep = np.ones((h, w), dtype=np.int64)
    for da in range(-delta, delta + 1):
        for db in range(-delta, delta + 1):
            if da == 0 and db == 0:
                continue
            nb_vals = padded_vals[delta + da : delta + da + h, delta + db : delta + db + w]
            nb_roi = padded_roi[delta + da : delta + da + h, delta + db : delta + db + w]
            dep += (nb_roi & (np.abs(arr - nb_vals) <= alpha)).astype(np.int64)
    max_dep = (2 * delta + 1) ** 2
    mat = np.zeros((ng, max_dep), dtype=np.float64)
    np.add.at(mat, (arr[inroi] - 1, dep[inroi] - 1), 1.0)
    return mat


def gldm_features(bins, cfg, ng: int | None = None) -> dict:
    arr = _as_bins(bins)
    n_pixels = int(np.count_nonzero(arr))
    if n_pixels == 0:
        raise ValueError("slice ROI is empty")
    mat = gldm_matrix(arr, ng=ng, delta=cfg.ngtdm_gldm_delta, alpha=cfg.gldm_alpha)
    f = _distribution_features(mat, n_pixels)
    return {
        "gldm_SmallDependenceEmphasis": f["small"],
        "gldm_LargeDependenceEmphasis": f["large"],
        "gldm_GrayLevelNonUniformity": f["gln"],
        "gldm_DependenceNonUniformity": f["sn"],
        "gldm_DependenceNonUniformityNormalized": f["snn"],
        "gldm_GrayLevelVariance": f["gl_variance"],
        "gldm_DependenceVariance": f["size_variance"],
        "gldm_DependenceEntropy": f["entropy"],
    }
