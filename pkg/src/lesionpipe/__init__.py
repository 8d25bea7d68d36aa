"""lesionpipe: lung-lesion segmentation post-processing, evaluation, radiomics
and survival modelling on voxel grids, verifiable on synthetic cohorts."""

from .evaluate import (
    CaseEvaluation,
    CohortReport,
    ReviewOutcome,
    cohort_stats,
    dice,
    simulate_review,
    volume_ratio,
)
from .grid import (
    DiscretizedROI,
    LabelMask,
    ProbabilityMap,
    VoxelGeometry,
    Volume3D,
    crop_to_bbox,
    discretize,
    resample_image_inplane,
    resample_mask_inplane,
)
from .nrrdio import NrrdFormatError, read_nrrd, write_nrrd
from .postproc import (
    ComponentSet,
    binarize,
    connected_components,
    ensemble_average,
    largest_component,
    rank_by_volume,
)

__version__ = "0.1.0"

__all__ = [
    "CaseEvaluation",
    "CohortReport",
    "ComponentSet",
    "DiscretizedROI",
    "LabelMask",
    "NrrdFormatError",
    "ProbabilityMap",
    "ReviewOutcome",
    "VoxelGeometry",
    "Volume3D",
    "binarize",
    "cohort_stats",
    "connected_components",
    "crop_to_bbox",
    "dice",
    "discretize",
    "ensemble_average",
    "largest_component",
    "rank_by_volume",
    "read_nrrd",
    "resample_image_inplane",
    "resample_mask_inplane",
    "simulate_review",
    "volume_ratio",
    "write_nrrd",
]
