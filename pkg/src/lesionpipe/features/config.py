"""Extraction parameters with their standard defaults."""

import hashlib
from dataclasses import dataclass


@dataclass(frozen=True)
class ExtractionConfig:
    """Knobs of the extraction pipeline.

    bin_width is the HU width of one gray level (default 25).  Texture is
    computed per axial slice on slices holding at least min_slice_pixels ROI
    pixels; glcm_distance, ngtdm_gldm_delta (Chebyshev) and gldm_alpha
    (gray-level tolerance) parametrize the texture neighborhoods.
    """

    bin_width: float = 25.0
    target_xy_spacing: tuple = (1.0, 1.0)
    min_slice_pixels: int = 5
    glcm_distance: int = 1
    ngtdm_gldm_delta: int = 1
    gldm_alpha: float = 0.0

    def __post_init__(self):
        if self.bin_width <= 0:
            raise ValueError(f"bin_width must be positive, got {self.bin_width}")
        tx, ty = self.target_xy_spacing
        if tx <= 0 or ty <= 0:
            raise ValueError(f"target_xy_spacing must be positive, got {self.target_xy_spacing}")
        if self.min_slice_pixels < 1:
            raise ValueError("min_slice_pixels must be >= 1")
        if self.glcm_distance < 1:
            raise ValueError("glcm_distance must be >= 1")
        if self.ngtdm_gldm_delta < 1:
            raise ValueError("ngtdm_gldm_delta must be >= 1")
        if self.gldm_alpha < 0:
            raise ValueError("gldm_alpha must be >= 0")

    def digest(self) -> str:
        """Short provenance hash recorded into every feature vector."""
        canon = (
            f"bin_width={self.bin_width!r};target={tuple(self.target_xy_spacing)!r};"
            f"min_slice_pixels={self.min_slice_pixels};distance={self.glcm_distance};"
            f"delta={self.ngtdm_gldm_delta};alpha={self.gldm_alpha!r}"
        )
        return hashlib.sha256(canon.encode("ascii")).hexdigest()[:12]
