"""Seeded synthetic cohorts: ellipsoid lesions with calibrated predicted masks.

Each case carries a CT-like image, a reference mask (always one 26-connected
component), two probability maps that binarize to the same perturbed mask,
and a survival time tied to lesion volume (months fall with log-volume).

Prediction quality is controlled per case: a smooth level-set wiggle of the
reference boundary is bisected until the binarized prediction hits the target
overlap (+-0.05); sub-0.3 cases instead use a concentric under-segmentation so
they stay a single component whose best-candidate overlap equals the
whole-mask one.
"""

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy import ndimage

from .cohort import CaseEntry, CohortManifest, PredInput, write_manifest
from .evaluate import dice
from .grid import LabelMask, ProbabilityMap, VoxelGeometry, Volume3D
from .learn import SURVIVAL_THRESHOLD_MONTHS
from .nrrdio import write_nrrd
from .postproc import binarize, connected_components

_TEXTURE_MODES = ("uniform", "noisy", "shelled")
_CALIBRATION_TOL = 0.04
_MAX_FIT_ATTEMPTS = 32
_MAX_NOISE_ATTEMPTS = 6


@dataclass(frozen=True)
class PhantomSpec:
    """Cohort generator settings; the defaults give lung-like lesion volumes."""

    dims: tuple = (96, 96, 64)
    spacing: tuple = (1.5, 1.5, 2.5)
    volume_range_cm3: tuple = (0.2, 511.9)
    background_hu: float = -800.0
    lesion_mean_hu: float = 20.0
    lesion_noise_hu: float = 30.0
    background_noise_hu: float = 20.0
    shell_contrast_hu: float = 60.0
    texture: str = "noisy"
    target_dice_range: tuple = (0.55, 0.95)
    low_dice_range: tuple = (0.08, 0.22)
    fraction_low_dice: float = 0.0
    survival_base_months: float = SURVIVAL_THRESHOLD_MONTHS
    survival_slope: float = 12.0
    survival_noise_months: float = 6.0
    class_balance_range: tuple = (0.3, 0.7)
    boundary_noise_sigma_voxels: float = 2.0

    def __post_init__(self):
        lo, hi = self.volume_range_cm3
        if not (0 < lo <= hi):
            raise ValueError(f"volume range must be positive, got {self.volume_range_cm3}")
        for rng_pair in (self.target_dice_range, self.low_dice_range):
            a, b = rng_pair
            if not (0 <= a <= b <= 1):
                raise ValueError(f"dice range must lie in [0, 1], got {rng_pair}")
        if not 0 <= self.fraction_low_dice <= 1:
            raise ValueError("fraction_low_dice must lie in [0, 1]")
        if self.texture not in _TEXTURE_MODES:
            raise ValueError(f"texture must be one of {_TEXTURE_MODES}")
        if min(self.dims) < 8:
            raise ValueError("grid must be at least 8 voxels per axis")

    def geometry(self) -> VoxelGeometry:
        return VoxelGeometry(np.asarray(self.spacing, dtype=np.float64), np.zeros(3))

    def extent_mm(self) -> np.ndarray:
        return np.asarray(self.dims, dtype=np.float64) * np.asarray(self.spacing, dtype=np.float64)


@dataclass(frozen=True)
class GeneratedCase:
    volume: Volume3D
    ref_mask: LabelMask
    pred: ProbabilityMap        # primary model output
    pred_b: ProbabilityMap      # second model, same mask at a softer boundary
    survival_months: float
    target_dice: float
    achieved_dice: float


def _ellipsoid_mask(spec: PhantomSpec, center_mm, semi_mm) -> np.ndarray:
    coords = [np.arange(n, dtype=np.float64) * s for n, s in zip(spec.dims, spec.spacing)]
    dx = (coords[0][:, None, None] - center_mm[0]) / semi_mm[0]
    dy = (coords[1][None, :, None] - center_mm[1]) / semi_mm[1]
    dz = (coords[2][None, None, :] - center_mm[2]) / semi_mm[2]
    return dx**2 + dy**2 + dz**2 <= 1.0


def _signed_distance(fg: np.ndarray, spacing) -> np.ndarray:
    """Positive inside the mask, negative outside, in mm."""
    inside = ndimage.distance_transform_edt(fg, sampling=spacing)
    outside = ndimage.distance_transform_edt(~fg, sampling=spacing)
    return inside - outside


def _mask_dice(a: np.ndarray, b: np.ndarray) -> float:
    sa = int(np.count_nonzero(a))
    sb = int(np.count_nonzero(b))
    if sa + sb == 0:
        return 1.0
    return 2.0 * int(np.count_nonzero(a & b)) / (sa + sb)


def _sample_axes(rng, spec: PhantomSpec, volume_mm3: float) -> np.ndarray:
    """Semi-axes (mm) with product r^3 matching the volume; raises if unfittable."""
    r = (3.0 * volume_mm3 / (4.0 * math.pi)) ** (1.0 / 3.0)
    margin = 2.0 * np.asarray(spec.spacing)
    extent = spec.extent_mm()
    for _ in range(_MAX_FIT_ATTEMPTS):
        f = rng.uniform(0.7, 1.3, 3)
        f /= np.prod(f) ** (1.0 / 3.0)
        semi = r * f
        if np.all(2 * semi + 2 * margin <= extent):
            return semi
    raise ValueError(
        f"lesion of {volume_mm3 / 1000.0:.1f} cm^3 cannot fit in a "
        f"{tuple(spec.dims)} grid at spacing {tuple(spec.spacing)}"
    )


def _wiggled_mask(ref: np.ndarray, sdf: np.ndarray, noise: np.ndarray, target: float) -> tuple:
    """Bisect the boundary-perturbation strength until the overlap hits target."""
    if target >= 1.0:
        return ref.copy(), 1.0
    lo, hi = 0.0, 1.0
    for _ in range(60):
        if _mask_dice(np.asarray(sdf + hi * noise > 0), ref) < target:
            break
        hi *= 2.0
    else:
        return None, 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        d = _mask_dice(np.asarray(sdf + mid * noise > 0), ref)
        if abs(d - target) <= _CALIBRATION_TOL * 0.5:
            lo = hi = mid
            break
        if d > target:
            lo = mid
        else:
            hi = mid
    s = 0.5 * (lo + hi)
    out = np.asarray(sdf + s * noise > 0)
    return out, _mask_dice(out, ref)


def _shrunk_mask(spec: PhantomSpec, center_mm, semi_mm, ref: np.ndarray, target: float) -> tuple:
    """Concentric under-segmentation: overlap of a gamma-scaled ellipsoid.

    Analytically dice = 2 g^3 / (1 + g^3); bisection absorbs voxelization.
    """
    lo, hi = 0.02, 0.999
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        m = _ellipsoid_mask(spec, center_mm, np.asarray(semi_mm) * mid)
        d = _mask_dice(m, ref)
        if abs(d - target) <= _CALIBRATION_TOL * 0.5:
            return m, d
        if d > target:
            hi = mid
        else:
            lo = mid
    m = _ellipsoid_mask(spec, center_mm, np.asarray(semi_mm) * 0.5 * (lo + hi))
    return m, _mask_dice(m, ref)


def _probability_pair(pred: np.ndarray, spec: PhantomSpec) -> tuple:
    """Two probability maps whose 0.5-binarization is exactly the mask."""
    sdf = _signed_distance(pred, spec.spacing)
    smin = float(min(spec.spacing))
    geometry = spec.geometry()
    maps = []
    for width in (0.5 * smin, 0.8 * smin):
        probs = 1.0 / (1.0 + np.exp(-sdf / width))
        maps.append(ProbabilityMap(np.clip(probs, 0.0, 1.0).astype(np.float32), geometry))
    return maps[0], maps[1]


def _paint_image(rng, spec: PhantomSpec, ref: np.ndarray, center_mm, semi_mm) -> np.ndarray:
    """Intensities are rounded to whole HU (like real CT), which keeps float32
    storage exact and intensity shifts by whole HU bitwise-reproducible."""
    img = np.full(spec.dims, spec.background_hu, dtype=np.float64)
    if spec.texture == "uniform":
        img[ref] = spec.lesion_mean_hu
        return np.rint(img)
    img += rng.normal(0.0, spec.background_noise_hu, spec.dims)
    lesion = rng.normal(spec.lesion_mean_hu, spec.lesion_noise_hu, spec.dims)
    if spec.texture == "shelled":
        core = _ellipsoid_mask(spec, center_mm, np.asarray(semi_mm) * 0.7)
        lesion += np.where(core, 0.5 * spec.shell_contrast_hu, -0.5 * spec.shell_contrast_hu)
    img[ref] = lesion[ref]
    return np.rint(img)


def gen_case(spec: PhantomSpec, seed: int, low_dice: bool = False) -> GeneratedCase:
    """Generate one case, fully determined by (spec, seed, low_dice)."""
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    lo, hi = spec.volume_range_cm3
    volume_cm3 = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
    volume_mm3 = volume_cm3 * 1000.0
    semi = _sample_axes(rng, spec, volume_mm3)
    margin = 2.0 * np.asarray(spec.spacing)
    extent = spec.extent_mm()
    center = np.array(
        [rng.uniform(s + m, e - s - m) for s, m, e in zip(semi, margin, extent)]
    )
    ref = _ellipsoid_mask(spec, center, semi)
    if not ref.any():
        raise ValueError("lesion rasterized to an empty mask; volume too small for this grid")
    _, n_comp = ndimage.label(ref, structure=np.ones((3, 3, 3), dtype=bool))
    if n_comp != 1:
        raise ValueError("reference mask is not a single 26-connected component")

    img = _paint_image(rng, spec, ref, center, semi)

    ln_mid = 0.5 * (np.log(lo) + np.log(hi))
    months = (
        spec.survival_base_months
        - spec.survival_slope * (np.log(volume_cm3) - ln_mid)
        + rng.normal(0.0, spec.survival_noise_months)
    )
    months = float(max(0.0, months))

    if low_dice:
        t_lo, t_hi = spec.low_dice_range
    else:
        t_lo, t_hi = spec.target_dice_range
    target = float(rng.uniform(t_lo, t_hi))

    if low_dice:
        pred_fg, achieved = _shrunk_mask(spec, center, semi, ref, target)
    else:
        sdf = _signed_distance(ref, spec.spacing)
        scale = float(np.mean(semi)) * 0.5
        sigma = spec.boundary_noise_sigma_voxels
        pred_fg = None
        for _ in range(_MAX_NOISE_ATTEMPTS):
            noise = ndimage.gaussian_filter(rng.standard_normal(spec.dims), sigma=sigma)
            noise *= scale / max(noise.std(), 1e-12)
            pred_fg, achieved = _wiggled_mask(ref, sdf, noise, target)
            if pred_fg is not None and abs(achieved - target) <= _CALIBRATION_TOL:
                break
        if pred_fg is None:
            raise ValueError("failed to calibrate the predicted mask to the target overlap")
    if abs(achieved - target) > 0.05:
        raise ValueError(
            f"calibration missed the target overlap: wanted {target:.3f}, got {achieved:.3f}"
        )

    pred_a, pred_b = _probability_pair(pred_fg, spec)
    geometry = spec.geometry()
    ref_mask = LabelMask(ref.astype(np.uint8), geometry)
    case = GeneratedCase(
        volume=Volume3D(img.astype(np.float32), geometry),
        ref_mask=ref_mask,
        pred=pred_a,
        pred_b=pred_b,
        survival_months=months,
        target_dice=target,
        achieved_dice=float(dice(binarize(pred_a), ref_mask)),
    )
    if abs(case.achieved_dice - achieved) > 1e-12:
        raise AssertionError("probability map does not binarize back to the calibrated mask")
    return case


def _rebalance_survival(months: list, balance_range: tuple) -> list:
    """Mirror the months closest to the threshold until the class split fits.

    Only boundary cases move, so the volume-survival trend stays learnable.
    """
    t = SURVIVAL_THRESHOLD_MONTHS
    months = [float(m) for m in months]
    lo, hi = balance_range
    n = len(months)
    while True:
        labels = [1 if m >= t else 0 for m in months]
        frac = sum(labels) / n
        if lo <= frac <= hi:
            return months
        majority = 1 if frac > hi else 0
        candidates = [i for i, lab in enumerate(labels) if lab == majority]
        flip = min(candidates, key=lambda i: abs(months[i] - t))
        mirrored = 2.0 * t - months[flip]
        if majority == 1 and mirrored >= t:
            mirrored = t - 1.0
        if majority == 0 and mirrored < t:
            mirrored = t
        months[flip] = max(0.0, mirrored)


def gen_cohort(n: int, spec: PhantomSpec, seed: int, out_dir, encoding: str = "gzip") -> Path:
    """Write an n-case cohort (images, masks, probability maps, manifest).

    Exactly round(fraction_low_dice * n) cases are built below the 0.3
    overlap; survival labels are nudged into the configured class balance.
    Returns the manifest path.
    """
    if n < 1:
        raise ValueError("cohort size must be >= 1")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ss = np.random.SeedSequence(int(seed))
    case_seeds = ss.generate_state(n, dtype=np.uint64)
    n_low = int(round(spec.fraction_low_dice * n))
    pick_rng = np.random.default_rng(ss.spawn(1)[0])
    low_idx = set(int(i) for i in pick_rng.choice(n, size=n_low, replace=False)) if n_low else set()

    cases = [gen_case(spec, int(case_seeds[i]), low_dice=i in low_idx) for i in range(n)]
    months = _rebalance_survival([c.survival_months for c in cases], spec.class_balance_range)
    cases = [replace(c, survival_months=m) for c, m in zip(cases, months)]

    entries = []
    for i, case in enumerate(cases):
        cid = f"case{i:04d}"
        image_path = out_dir / f"{cid}_image.nrrd"
        ref_path = out_dir / f"{cid}_ref.nrrd"
        pred_a_path = out_dir / f"{cid}_pred_a.nrrd"
        pred_b_path = out_dir / f"{cid}_pred_b.nrrd"
        write_nrrd(case.volume, image_path, encoding=encoding)
        write_nrrd(case.ref_mask, ref_path, encoding=encoding)
        write_nrrd(case.pred, pred_a_path, encoding=encoding)
        write_nrrd(case.pred_b, pred_b_path, encoding=encoding)
        entries.append(
            CaseEntry(
                case_id=cid,
                image=image_path,
                ref_mask=ref_path,
                pred=(
                    PredInput("model_a", "prob", pred_a_path),
                    PredInput("model_b", "prob", pred_b_path),
                ),
                survival_months=case.survival_months,
            )
        )
    manifest_path = out_dir / "manifest.json"
    write_manifest(CohortManifest(tuple(entries)), manifest_path)
    provenance = {
        entries[i].case_id: {
            "target_dice": cases[i].target_dice,
            "achieved_dice": cases[i].achieved_dice,
            "low_dice": i in low_idx,
            "survival_months": cases[i].survival_months,
        }
        for i in range(n)
    }
    with open(out_dir / "cohort_provenance.json", "w", encoding="utf-8", newline="") as fh:
        json.dump(provenance, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest_path


def case_components_ok(case: GeneratedCase, min_dice: float = 0.3) -> bool:
    """True when review acceptance matches the case's construction target."""
    mask = binarize(case.pred)
    cs = connected_components(mask)
    best = 0.0
    for comp in cs.components:
        best = max(best, dice(cs.component_mask(comp.id), case.ref_mask))
    accepted = best >= min_dice
    return accepted == (case.achieved_dice >= min_dice)
