"""Voxel grids with physical geometry, plus resampling, discretization and cropping.

Arrays are indexed ``[x, y, z]`` and the physical position of voxel (i, j, k)
is ``origin + axes @ ((i, j, k) * spacing)``.  All grid types are immutable:
their arrays are made read-only at construction and every operation returns a
new object.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class VoxelGeometry:
    """Physical layout of a voxel grid: mm spacing, mm origin, unit axis directions.

    ``axes[:, i]`` is the unit direction of index axis i; the matrix must be
    orthonormal to 1e-6.
    """

    spacing: np.ndarray
    origin: np.ndarray
    axes: np.ndarray = field(default=None)

    def __post_init__(self):
        spacing = np.asarray(self.spacing, dtype=np.float64).reshape(3)
        origin = np.asarray(self.origin, dtype=np.float64).reshape(3)
        axes = np.eye(3) if self.axes is None else np.asarray(self.axes, dtype=np.float64).reshape(3, 3)
        if not np.all(spacing > 0):
            raise ValueError(f"spacing must be strictly positive, got {spacing}")
        if not np.allclose(axes.T @ axes, np.eye(3), atol=1e-6):
            raise ValueError("axes matrix is not orthonormal (tolerance 1e-6)")
        object.__setattr__(self, "spacing", _readonly(spacing))
        object.__setattr__(self, "origin", _readonly(origin))
        object.__setattr__(self, "axes", _readonly(axes))

    def voxel_volume(self) -> float:
        """Volume of one voxel in mm^3."""
        return float(np.prod(self.spacing))

    def position(self, index) -> np.ndarray:
        """Physical mm position of a voxel index triple."""
        idx = np.asarray(index, dtype=np.float64)
        return self.origin + self.axes @ (idx * self.spacing)

    def approx_equal(self, other: "VoxelGeometry", tol: float = 1e-6) -> bool:
        return (
            np.allclose(self.spacing, other.spacing, rtol=0, atol=tol)
            and np.allclose(self.origin, other.origin, rtol=0, atol=tol)
            and np.allclose(self.axes, other.axes, rtol=0, atol=tol)
        )

    def shifted(self, index_offset) -> "VoxelGeometry":
        """Geometry whose voxel (0,0,0) sits at the given index of this grid."""
        return VoxelGeometry(self.spacing.copy(), self.position(index_offset), self.axes.copy())

    def with_spacing(self, spacing) -> "VoxelGeometry":
        return VoxelGeometry(np.asarray(spacing, dtype=np.float64), self.origin.copy(), self.axes.copy())


def _check_grid(values: np.ndarray, geometry: VoxelGeometry) -> None:
    if values.ndim != 3:
        raise ValueError(f"expected a 3-D array, got shape {values.shape}")
    if min(values.shape) < 1:
        raise ValueError(f"empty volume: dims {values.shape}")
    if not isinstance(geometry, VoxelGeometry):
        raise TypeError("geometry must be a VoxelGeometry")


@dataclass(frozen=True)
class Volume3D:
    """CT intensity grid (HU), stored as float32."""

    values: np.ndarray
    geometry: VoxelGeometry

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float32)
        _check_grid(values, self.geometry)
        if not np.all(np.isfinite(values)):
            raise ValueError("volume contains non-finite values")
        object.__setattr__(self, "values", _readonly(values))

    @property
    def dims(self) -> tuple:
        return self.values.shape


@dataclass(frozen=True)
class LabelMask:
    """Binary foreground mask; labels are uint8 values in {0, 1}."""

    labels: np.ndarray
    geometry: VoxelGeometry

    def __post_init__(self):
        labels = np.ascontiguousarray(self.labels, dtype=np.uint8)
        _check_grid(labels, self.geometry)
        if labels.max(initial=0) > 1:
            raise ValueError("mask labels must be 0 or 1")
        object.__setattr__(self, "labels", _readonly(labels))

    @property
    def dims(self) -> tuple:
        return self.labels.shape

    def count(self) -> int:
        return int(np.count_nonzero(self.labels))

    def is_empty(self) -> bool:
        return self.count() == 0

    def physical_volume(self) -> float:
        """Foreground volume in mm^3."""
        return self.count() * self.geometry.voxel_volume()


@dataclass(frozen=True)
class ProbabilityMap:
    """Per-voxel lesion probability in [0, 1], stored as float32."""

    probs: np.ndarray
    geometry: VoxelGeometry

    def __post_init__(self):
        probs = np.ascontiguousarray(self.probs, dtype=np.float32)
        _check_grid(probs, self.geometry)
        if probs.min(initial=0.0) < 0.0 or probs.max(initial=0.0) > 1.0:
            raise ValueError("probabilities must lie in [0, 1]")
        object.__setattr__(self, "probs", _readonly(probs))

    @property
    def dims(self) -> tuple:
        return self.probs.shape


@dataclass(frozen=True)
class DiscretizedROI:
    """ROI voxels mapped to gray-level bins of fixed HU width.

    ``bin(x) = floor((x - roi_min) / bin_width) + 1`` with roi_min taken over
    the ROI, so bin 1 is always attained and num_levels is the largest bin.
    """

    indices: np.ndarray          # (N, 3) int32 voxel index triples
    bins: np.ndarray             # (N,) int32, values in [1, num_levels]
    bin_width: float
    roi_min: float
    num_levels: int
    dims: tuple

    def __post_init__(self):
        object.__setattr__(self, "indices", _readonly(np.ascontiguousarray(self.indices, dtype=np.int32)))
        object.__setattr__(self, "bins", _readonly(np.ascontiguousarray(self.bins, dtype=np.int32)))

    def bin_map(self) -> np.ndarray:
        """Dense int32 map of the bins over the grid; 0 outside the ROI."""
        out = np.zeros(self.dims, dtype=np.int32)
        out[self.indices[:, 0], self.indices[:, 1], self.indices[:, 2]] = self.bins
        return out


def _require_same_grid(a, b, what: str = "grids") -> None:
    if a.dims != b.dims:
        raise ValueError(f"{what} have mismatched dims: {a.dims} vs {b.dims}")
    if not a.geometry.approx_equal(b.geometry):
        raise ValueError(f"{what} have mismatched geometry")


def _output_dims_inplane(dims, spacing, target_xy) -> tuple:
    nx = max(1, int(math.floor(dims[0] * spacing[0] / target_xy[0] + 0.5)))
    ny = max(1, int(math.floor(dims[1] * spacing[1] / target_xy[1] + 0.5)))
    return nx, ny, dims[2]


def _validate_target(target_xy) -> tuple:
    tx, ty = float(target_xy[0]), float(target_xy[1])
    if tx <= 0 or ty <= 0:
        raise ValueError(f"target spacing must be positive, got ({tx}, {ty})")
    return tx, ty


def resample_image_inplane(vol: Volume3D, target_xy_spacing) -> Volume3D:
    """Resample each axial slice to the target in-plane spacing.

    Cubic B-spline interpolation with mirror boundaries; the z axis is left
    untouched.  Output voxel j samples the input at j * new/old, so voxel
    (0, 0, k) keeps its physical position and the origin is unchanged.
    """
    tx, ty = _validate_target(target_xy_spacing)
    sx, sy, sz = vol.geometry.spacing
    if math.isclose(tx, sx, rel_tol=1e-12) and math.isclose(ty, sy, rel_tol=1e-12):
        return vol
    nx, ny, nz = _output_dims_inplane(vol.dims, vol.geometry.spacing, (tx, ty))
    cx = np.arange(nx, dtype=np.float64) * (tx / sx)
    cy = np.arange(ny, dtype=np.float64) * (ty / sy)
    coords = np.stack(np.meshgrid(cx, cy, indexing="ij"))
    out = np.empty((nx, ny, nz), dtype=np.float32)
    for k in range(nz):
        out[:, :, k] = ndimage.map_coordinates(
            vol.values[:, :, k].astype(np.float64), coords, order=3, mode="mirror"
        )
    geom = vol.geometry.with_spacing((tx, ty, sz))
    return Volume3D(out, geom)


def resample_mask_inplane(mask: LabelMask, target_xy_spacing) -> LabelMask:
    """Nearest-neighbor companion of :func:`resample_image_inplane`.

    Half-way sample positions snap to the lower index so upsampling a voxel
    by 2x yields an exact 2x2 block.
    """
    tx, ty = _validate_target(target_xy_spacing)
    sx, sy, sz = mask.geometry.spacing
    if math.isclose(tx, sx, rel_tol=1e-12) and math.isclose(ty, sy, rel_tol=1e-12):
        return mask
    nx, ny, nz = _output_dims_inplane(mask.dims, mask.geometry.spacing, (tx, ty))
    ix = np.clip(np.ceil(np.arange(nx) * (tx / sx) - 0.5).astype(np.intp), 0, mask.dims[0] - 1)
    iy = np.clip(np.ceil(np.arange(ny) * (ty / sy) - 0.5).astype(np.intp), 0, mask.dims[1] - 1)
    out = mask.labels[np.ix_(ix, iy, np.arange(nz))]
    geom = mask.geometry.with_spacing((tx, ty, sz))
    return LabelMask(out, geom)


def discretize(vol: Volume3D, mask: LabelMask, bin_width: float) -> DiscretizedROI:
    """Map ROI intensities to 1-based gray-level bins of fixed HU width."""
    if bin_width <= 0:
        raise ValueError(f"bin_width must be positive, got {bin_width}")
    _require_same_grid(vol, mask, "volume and mask")
    fg = mask.labels != 0
    if not fg.any():
        raise ValueError("cannot discretize an empty ROI")
    indices = np.argwhere(fg).astype(np.int32)
    x = vol.values[fg].astype(np.float64)
    roi_min = float(x.min())
    bins = (np.floor((x - roi_min) / float(bin_width)) + 1).astype(np.int32)
    return DiscretizedROI(
        indices=indices,
        bins=bins,
        bin_width=float(bin_width),
        roi_min=roi_min,
        num_levels=int(bins.max()),
        dims=vol.dims,
    )


def crop_to_bbox(vol: Volume3D, mask: LabelMask, margin: int = 0) -> tuple:
    """Crop volume and mask to the foreground bounding box plus a voxel margin."""
    if margin < 0:
        raise ValueError("margin must be >= 0")
    _require_same_grid(vol, mask, "volume and mask")
    fg = np.argwhere(mask.labels != 0)
    if fg.size == 0:
        raise ValueError("cannot crop to an empty mask")
    lo = np.maximum(fg.min(axis=0) - margin, 0)
    hi = np.minimum(fg.max(axis=0) + margin + 1, mask.dims)
    sl = tuple(slice(int(a), int(b)) for a, b in zip(lo, hi))
    geom = vol.geometry.shifted(lo)
    return Volume3D(vol.values[sl], geom), LabelMask(mask.labels[sl], geom)
