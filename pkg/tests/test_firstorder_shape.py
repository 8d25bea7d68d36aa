import numpy as np
import pytest

from conftest import make_mask, make_volume
from lesionpipe.features import ExtractionConfig, first_order_features, shape_features

CFG = ExtractionConfig()


def _roi(values, spacing=(1.0, 1.0, 1.0)):
    arr = np.asarray(values, dtype=np.float64).reshape(-1, 1, 1)
    return make_volume(arr, spacing), make_mask(np.ones_like(arr), spacing)


class TestFirstOrder:
    def test_three_value_hand_example(self):
        vol, mask = _roi([0.0, 25.0, 50.0])
        f = first_order_features(vol, mask, CFG)
        assert f["firstorder_Mean"] == pytest.approx(25.0)
        assert f["firstorder_Variance"] == pytest.approx(1250.0 / 3.0)
        assert f["firstorder_Energy"] == pytest.approx(3125.0)
        assert f["firstorder_Entropy"] == pytest.approx(np.log2(3.0))
        assert f["firstorder_Uniformity"] == pytest.approx(1.0 / 3.0)
        assert f["firstorder_Minimum"] == 0.0
        assert f["firstorder_Maximum"] == 50.0
        assert f["firstorder_Range"] == 50.0
        assert f["firstorder_RootMeanSquared"] == pytest.approx(np.sqrt(3125.0 / 3.0))

    def test_constant_roi_degenerate(self):
        vol, mask = _roi([42.0] * 10)
        f = first_order_features(vol, mask, CFG)
        assert f["firstorder_Variance"] == 0.0
        assert f["firstorder_Entropy"] == 0.0
        assert f["firstorder_Uniformity"] == 1.0
        assert f["firstorder_Range"] == 0.0
        assert f["firstorder_Skewness"] == 0.0
        assert f["firstorder_Kurtosis"] == 0.0

    def test_histogram_features_shift_invariant(self, rng):
        # integer HU keeps the float32 shift exact, as on real CT data
        values = np.rint(rng.normal(0, 80, 60))
        vol, mask = _roi(values)
        vol2, _ = _roi(values + 100.0)
        a = first_order_features(vol, mask, CFG)
        b = first_order_features(vol2, mask, CFG)
        assert a["firstorder_Entropy"] == b["firstorder_Entropy"]
        assert a["firstorder_Uniformity"] == b["firstorder_Uniformity"]
        assert b["firstorder_Mean"] == pytest.approx(a["firstorder_Mean"] + 100.0, rel=1e-12)

    def test_percentiles_and_iqr_linear_interpolation(self):
        values = list(range(1, 11))  # 1..10
        vol, mask = _roi(values)
        f = first_order_features(vol, mask, CFG)
        assert f["firstorder_Percentile10"] == pytest.approx(np.percentile(values, 10))
        assert f["firstorder_Percentile90"] == pytest.approx(np.percentile(values, 90))
        assert f["firstorder_InterquartileRange"] == pytest.approx(
            np.percentile(values, 75) - np.percentile(values, 25)
        )

    def test_mad_and_robust_mad(self):
        values = [0.0, 0.0, 0.0, 100.0]
        vol, mask = _roi(values)
        f = first_order_features(vol, mask, CFG)
        assert f["firstorder_MeanAbsoluteDeviation"] == pytest.approx(37.5)
        # rMAD over values within [P10, P90] = [0, 0, 0] -> 0
        assert f["firstorder_RobustMeanAbsoluteDeviation"] == pytest.approx(0.0)

    def test_skewness_kurtosis_against_moments(self, rng):
        values = rng.normal(0, 1, 200) ** 3  # clearly skewed
        vol, mask = _roi(values)
        f = first_order_features(vol, mask, CFG)
        dev = values - values.mean()
        m2 = np.mean(dev**2)
        assert f["firstorder_Skewness"] == pytest.approx(np.mean(dev**3) / m2**1.5, rel=1e-6)
        assert f["firstorder_Kurtosis"] == pytest.approx(np.mean(dev**4) / m2**2, rel=1e-6)

    def test_empty_roi_rejected(self):
        vol = make_volume(np.zeros((2, 2, 2)))
        with pytest.raises(ValueError, match="empty"):
            first_order_features(vol, make_mask(np.zeros((2, 2, 2))), CFG)


class TestShape:
    def test_single_voxel(self):
        labels = np.zeros((3, 3, 3))
        labels[1, 1, 1] = 1
        f = shape_features(make_mask(labels))
        assert f["shape_VoxelVolume"] == pytest.approx(1.0)
        # isosurface of one voxel is the octahedron through its face centers
        assert f["shape_SurfaceArea"] == pytest.approx(np.sqrt(3.0), rel=1e-6)
        oct_vol = 1.0 / 6.0
        assert f["shape_Sphericity"] == pytest.approx(
            (36 * np.pi * oct_vol**2) ** (1 / 3) / np.sqrt(3.0), rel=1e-6
        )
        assert f["shape_Maximum3DDiameter"] == 0.0
        assert f["shape_Elongation"] == 1.0
        assert f["shape_Flatness"] == 1.0

    def test_cube_10mm(self):
        labels = np.zeros((12, 12, 12))
        labels[1:11, 1:11, 1:11] = 1
        f = shape_features(make_mask(labels))
        assert f["shape_VoxelVolume"] == pytest.approx(1000.0)
        # flat faces 6*81 plus twelve 45-degree bevels and eight corner triangles
        hand_area = 6 * 81 + 12 * 9 * np.sqrt(0.5) + 8 * (np.sqrt(3) / 4) * 0.5
        assert f["shape_SurfaceArea"] == pytest.approx(hand_area, rel=1e-6)
        # most distant surface-voxel centers are opposite cube corners
        assert f["shape_Maximum3DDiameter"] == pytest.approx(np.sqrt(3 * 9.0**2))
        assert f["shape_Sphericity"] < 1.0

    def test_sphericity_in_unit_interval(self, rng):
        for _ in range(8):
            labels = (rng.random((9, 9, 9)) < 0.4).astype(np.uint8)
            if not labels.any():
                continue
            f = shape_features(make_mask(labels))
            assert 0.0 < f["shape_Sphericity"] <= 1.0  # isoperimetric bound

    def test_sphere_axis_lengths(self):
        n = 25
        idx = np.indices((n, n, n))
        labels = ((idx[0] - 12.0) ** 2 + (idx[1] - 12.0) ** 2 + (idx[2] - 12.0) ** 2) <= 100.0
        f = shape_features(make_mask(labels))
        # uniform ball: covariance eigenvalues r^2/5 -> axis length 4 r / sqrt(5)
        expected = 4 * 10.0 / np.sqrt(5.0)
        assert f["shape_MajorAxisLength"] == pytest.approx(expected, rel=0.05)
        assert f["shape_Elongation"] == pytest.approx(1.0, abs=0.03)
        assert f["shape_Flatness"] == pytest.approx(1.0, abs=0.03)
        assert f["shape_Maximum3DDiameter"] == pytest.approx(20.0, rel=0.05)

    def test_translation_invariance(self, rng):
        labels = np.zeros((12, 12, 12))
        labels[2:5, 3:6, 2:5] = (rng.random((3, 3, 3)) < 0.8)
        if not labels.any():
            labels[3, 4, 3] = 1
        a = shape_features(make_mask(labels, spacing=(1.0, 2.0, 1.5)))
        b = shape_features(make_mask(np.roll(labels, (4, 3, 5), (0, 1, 2)), spacing=(1.0, 2.0, 1.5)))
        for name in a:
            assert a[name] == pytest.approx(b[name], rel=1e-9), name

    def test_anisotropic_spacing_volume_and_slab(self):
        labels = np.zeros((6, 6, 6))
        labels[1:5, 1:5, 2] = 1  # flat 4x4 slab
        f = shape_features(make_mask(labels, spacing=(2.0, 1.0, 3.0)))
        assert f["shape_VoxelVolume"] == pytest.approx(16 * 6.0)
        assert f["shape_Flatness"] < 0.5  # slab is much flatter than long

    def test_empty_mask_rejected(self):
        with pytest.raises(ValueError, match="nonempty"):
            shape_features(make_mask(np.zeros((3, 3, 3))))
