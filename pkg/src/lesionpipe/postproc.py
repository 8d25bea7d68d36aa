"""Segmentation post-processing: ensembling, binarization and 3-D components.

Candidate lesions are connected components of the binarized ensemble mask,
ranked by physical volume (largest first).  Equal volumes are ordered by the
first foreground voxel's linear index ``x + nx*(y + ny*z)`` so the ranking
never depends on labeling internals.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .grid import LabelMask, ProbabilityMap, VoxelGeometry, _require_same_grid

_STRUCTURES = {
    6: ndimage.generate_binary_structure(3, 1),
    18: ndimage.generate_binary_structure(3, 2),
    26: ndimage.generate_binary_structure(3, 3),
}

DEFAULT_CONNECTIVITY = 26


@dataclass(frozen=True)
class ComponentInfo:
    id: int
    voxel_count: int
    volume_mm3: float
    first_index: int  # linear index x + nx*(y + ny*z) of the first voxel


@dataclass(frozen=True)
class ComponentSet:
    """Volume-ranked connected components; id 1 is the largest, 0 is background."""

    label_field: np.ndarray
    components: tuple
    geometry: VoxelGeometry

    @property
    def dims(self) -> tuple:
        return self.label_field.shape

    def __len__(self) -> int:
        return len(self.components)

    def component_mask(self, comp_id: int) -> LabelMask:
        return LabelMask((self.label_field == comp_id).astype(np.uint8), self.geometry)


def ensemble_average(maps: list) -> ProbabilityMap:
    """Voxelwise mean of probability maps.

    Operands are sorted per voxel before summation, which makes the result
    exactly invariant under permutations of the argument list.
    """
    if not maps:
        raise ValueError("ensemble_average needs at least one probability map")
    first = maps[0]
    for m in maps[1:]:
        _require_same_grid(first, m, "probability maps")
    if len(maps) == 1:
        return first
    stack = np.sort(np.stack([m.probs.astype(np.float64) for m in maps]), axis=0)
    mean = np.add.reduce(stack, axis=0) / len(maps)
    return ProbabilityMap(np.clip(mean, 0.0, 1.0).astype(np.float32), first.geometry)


def binarize(prob: ProbabilityMap, threshold: float = 0.5) -> LabelMask:
    """Foreground where p > threshold (strict, so exactly 0.5 stays background)."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold}")
    return LabelMask((prob.probs > threshold).astype(np.uint8), prob.geometry)


def connected_components(mask: LabelMask, connectivity: int = DEFAULT_CONNECTIVITY) -> ComponentSet:
    """Partition foreground into maximal connected sets under 6/18/26 adjacency."""
    if connectivity not in _STRUCTURES:
        raise ValueError(f"connectivity must be 6, 18 or 26, got {connectivity}")
    raw, k = ndimage.label(mask.labels, structure=_STRUCTURES[connectivity])
    if k == 0:
        return ComponentSet(
            label_field=np.zeros(mask.dims, dtype=np.int32),
            components=(),
            geometry=mask.geometry,
        )
    flat = raw.ravel(order="F")  # order follows the linear-index convention
    counts = np.bincount(flat, minlength=k + 1)
    first = np.full(k + 1, flat.size, dtype=np.int64)
    np.minimum.at(first, flat, np.arange(flat.size, dtype=np.int64))
    order = sorted(range(1, k + 1), key=lambda i: (-counts[i], first[i]))
    remap = np.zeros(k + 1, dtype=np.int32)
    for rank, old in enumerate(order, start=1):
        remap[old] = rank
    voxvol = mask.geometry.voxel_volume()
    components = tuple(
        ComponentInfo(
            id=rank,
            voxel_count=int(counts[old]),
            volume_mm3=float(counts[old]) * voxvol,
            first_index=int(first[old]),
        )
        for rank, old in enumerate(order, start=1)
    )
    return ComponentSet(label_field=remap[raw], components=components, geometry=mask.geometry)


def rank_by_volume(cs: ComponentSet) -> list:
    """One mask per component, largest first; disjoint and reassembling the input."""
    return [cs.component_mask(c.id) for c in cs.components]


def largest_component(mask: LabelMask, connectivity: int = DEFAULT_CONNECTIVITY) -> LabelMask:
    """Keep only the top-ranked component (the stock post-processing baseline)."""
    cs = connected_components(mask, connectivity)
    if not cs.components:
        return mask
    return cs.component_mask(1)
