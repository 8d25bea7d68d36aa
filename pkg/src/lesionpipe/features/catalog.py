"""The fixed 70-feature catalog and the FeatureVector container.

Column order everywhere (CSV, vectors, tables) is the catalog order below:
17 first-order, 10 shape, 10 GLCM, 10 GLRLM, 10 GLSZM, 5 NGTDM, 8 GLDM.
"""

from dataclasses import dataclass, field

_CATALOG_SPEC = [
    ("firstorder", "Mean", "mean of ROI intensities"),
    ("firstorder", "Median", "median of ROI intensities"),
    ("firstorder", "Minimum", "min of ROI intensities"),
    ("firstorder", "Maximum", "max of ROI intensities"),
    ("firstorder", "Range", "max - min"),
    ("firstorder", "Percentile10", "10th percentile, linear interpolation"),
    ("firstorder", "Percentile90", "90th percentile, linear interpolation"),
    ("firstorder", "InterquartileRange", "P75 - P25"),
    ("firstorder", "Variance", "population variance (/N)"),
    ("firstorder", "Skewness", "m3 / m2^1.5 (0 when m2 = 0)"),
    ("firstorder", "Kurtosis", "m4 / m2^2, non-excess (0 when m2 = 0)"),
    ("firstorder", "Energy", "sum of squared intensities"),
    ("firstorder", "RootMeanSquared", "sqrt(mean of squared intensities)"),
    ("firstorder", "MeanAbsoluteDeviation", "mean |x - mean|"),
    ("firstorder", "RobustMeanAbsoluteDeviation", "MAD over the [P10, P90] subset"),
    ("firstorder", "Entropy", "-sum p log2 p over the bin-width histogram"),
    ("firstorder", "Uniformity", "sum p^2 over the bin-width histogram"),
    ("shape", "VoxelVolume", "N * voxel volume"),
    ("shape", "SurfaceArea", "triangulated isosurface area"),
    ("shape", "Sphericity", "(36 pi V^2)^(1/3) / A on the isosurface mesh"),
    ("shape", "SurfaceVolumeRatio", "A / V on the isosurface mesh"),
    ("shape", "Maximum3DDiameter", "max pairwise distance between surface voxel centers"),
    ("shape", "MajorAxisLength", "4 sqrt(lambda1) of coordinate covariance"),
    ("shape", "MinorAxisLength", "4 sqrt(lambda2)"),
    ("shape", "LeastAxisLength", "4 sqrt(lambda3)"),
    ("shape", "Elongation", "sqrt(lambda2 / lambda1)"),
    ("shape", "Flatness", "sqrt(lambda3 / lambda1)"),
    ("glcm", "JointEnergy", "sum p^2"),
    ("glcm", "JointEntropy", "-sum p log2 p"),
    ("glcm", "Contrast", "sum (i-j)^2 p"),
    ("glcm", "Correlation", "(sum ij p - mux muy) / (sigx sigy), 1 when degenerate"),
    ("glcm", "InverseDifferenceMoment", "sum p / (1 + (i-j)^2)"),
    ("glcm", "InverseDifference", "sum p / (1 + |i-j|)"),
    ("glcm", "SumAverage", "sum k p_{x+y}(k)"),
    ("glcm", "DifferenceEntropy", "-sum p_{x-y} log2 p_{x-y}"),
    ("glcm", "DifferenceVariance", "variance of p_{x-y}"),
    ("glcm", "Autocorrelation", "sum ij p"),
    ("glrlm", "ShortRunEmphasis", "sum R/j^2 / Nr"),
    ("glrlm", "LongRunEmphasis", "sum R j^2 / Nr"),
    ("glrlm", "GrayLevelNonUniformity", "sum_i (sum_j R)^2 / Nr"),
    ("glrlm", "GrayLevelNonUniformityNormalized", "sum_i (sum_j R)^2 / Nr^2"),
    ("glrlm", "RunLengthNonUniformity", "sum_j (sum_i R)^2 / Nr"),
    ("glrlm", "RunLengthNonUniformityNormalized", "sum_j (sum_i R)^2 / Nr^2"),
    ("glrlm", "RunPercentage", "Nr / Np"),
    ("glrlm", "GrayLevelVariance", "variance of gray level under p = R/Nr"),
    ("glrlm", "RunVariance", "variance of run length under p = R/Nr"),
    ("glrlm", "RunEntropy", "-sum p log2 p"),
    ("glszm", "SmallAreaEmphasis", "sum S/j^2 / Nz"),
    ("glszm", "LargeAreaEmphasis", "sum S j^2 / Nz"),
    ("glszm", "GrayLevelNonUniformity", "sum_i (sum_j S)^2 / Nz"),
    ("glszm", "GrayLevelNonUniformityNormalized", "sum_i (sum_j S)^2 / Nz^2"),
    ("glszm", "SizeZoneNonUniformity", "sum_j (sum_i S)^2 / Nz"),
    ("glszm", "SizeZoneNonUniformityNormalized", "sum_j (sum_i S)^2 / Nz^2"),
    ("glszm", "ZonePercentage", "Nz / Np"),
    ("glszm", "GrayLevelVariance", "variance of gray level under p = S/Nz"),
    ("glszm", "ZoneVariance", "variance of zone size under p = S/Nz"),
    ("glszm", "ZoneEntropy", "-sum p log2 p"),
    ("ngtdm", "Coarseness", "1 / sum p_i s_i, capped at 1e6"),
    ("ngtdm", "Contrast", "[sum_{i!=j} p_i p_j (i-j)^2 / (Ngp (Ngp-1))] [sum s_i / N]"),
    ("ngtdm", "Busyness", "sum p_i s_i / sum |i p_i - j p_j|"),
    ("ngtdm", "Complexity", "(1/N) sum |i-j| (p_i s_i + p_j s_j) / (p_i + p_j)"),
    ("ngtdm", "Strength", "sum (p_i + p_j) (i-j)^2 / sum s_i"),
    ("gldm", "SmallDependenceEmphasis", "sum D/k^2 / Nd"),
    ("gldm", "LargeDependenceEmphasis", "sum D k^2 / Nd"),
    ("gldm", "GrayLevelNonUniformity", "sum_i (sum_k D)^2 / Nd"),
    ("gldm", "DependenceNonUniformity", "sum_k (sum_i D)^2 / Nd"),
    ("gldm", "DependenceNonUniformityNormalized", "sum_k (sum_i D)^2 / Nd^2"),
    ("gldm", "GrayLevelVariance", "variance of gray level under p = D/Nd"),
    ("gldm", "DependenceVariance", "variance of dependence under p = D/Nd"),
    ("gldm", "DependenceEntropy", "-sum p log2 p"),
]

FAMILIES = ("firstorder", "shape", "glcm", "glrlm", "glszm", "ngtdm", "gldm")

# (full_name, family, formula) in fixed output order
CATALOG = tuple((f"{fam}_{name}", fam, formula) for fam, name, formula in _CATALOG_SPEC)

_NAME_INDEX = {name: i for i, (name, _, _) in enumerate(CATALOG)}

TEXTURE_FAMILIES = ("glcm", "glrlm", "glszm", "ngtdm", "gldm")


def catalog_names(family: str | None = None) -> tuple:
    """Feature names in catalog order, optionally restricted to one family."""
    if family is None:
        return tuple(name for name, _, _ in CATALOG)
    if family not in FAMILIES:
        raise ValueError(f"unknown feature family {family!r}")
    return tuple(name for name, fam, _ in CATALOG if fam == family)


def catalog_index(name: str) -> int:
    return _NAME_INDEX[name]


def render_catalog() -> str:
    """Plain-text reference of the catalog: name, family, formula id."""
    lines = ["# feature catalog: name\tfamily\tformula"]
    lines += [f"{name}\t{fam}\t{formula}" for name, fam, formula in CATALOG]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class FeatureVector:
    """All 70 catalog features for one case, in catalog order.

    Degenerate entries (e.g. texture when no slice qualified) are stored as
    0.0 and listed in ``degenerate``; every stored value is finite.
    """

    values: dict
    config_hash: str
    n_slices_used: int
    degenerate: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        names = catalog_names()
        if tuple(self.values.keys()) != names:
            raise ValueError("feature vector must contain exactly the catalog names in order")
        bad = [k for k, v in self.values.items() if not _finite(v)]
        if bad:
            raise ValueError(f"non-finite feature values: {bad}")

    def as_list(self) -> list:
        return [float(v) for v in self.values.values()]


def _finite(v) -> bool:
    try:
        f = float(v)
    except (TypeError, ValueError):
        return False
    return f == f and abs(f) != float("inf")
