import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lesionpipe.features import ExtractionConfig
from lesionpipe.features.texture import (
    glcm_features,
    glcm_matrices,
    gldm_features,
    gldm_matrix,
    glrlm_features,
    glrlm_matrices,
    glszm_features,
    glszm_matrix,
    ngtdm_features,
    ngtdm_table,
)
from oracles import (
    oracle_distribution_features,
    oracle_glcm_features_one,
    oracle_glcm_matrices,
    oracle_gldm_matrix,
    oracle_glrlm_matrices,
    oracle_glszm_matrix,
    oracle_ngtdm_features,
    oracle_ngtdm_table,
)

CFG = ExtractionConfig()

slices = arrays(
    dtype=np.int64,
    shape=st.tuples(st.integers(1, 6), st.integers(1, 6)),
    elements=st.integers(0, 4),
).filter(lambda a: a.max() > 0)


class TestGlcm:
    def test_two_by_two_hand_example(self):
        bins = np.array([[1, 1], [2, 2]])
        horizontal, diag45, vertical, diag135 = glcm_matrices(bins, ng=2)
        # rows of the nested list are lines of constant first index
        p_h = horizontal / horizontal.sum()
        assert p_h[0, 0] == pytest.approx(0.5)
        assert p_h[1, 1] == pytest.approx(0.5)
        assert np.sum(p_h * (np.arange(2)[:, None] - np.arange(2)[None, :]) ** 2) == 0.0
        p_v = vertical / vertical.sum()
        assert p_v[0, 1] == pytest.approx(0.5)
        assert p_v[1, 0] == pytest.approx(0.5)
        contrast_v = np.sum(p_v * (np.arange(2)[:, None] - np.arange(2)[None, :]) ** 2)
        assert contrast_v == pytest.approx(1.0)

    def test_hand_example_features(self):
        bins = np.array([[1, 1], [2, 2]])
        f_h = glcm_features(bins[:1, :], CFG)  # single row -> only horizontal pairs
        assert f_h["glcm_JointEnergy"] == pytest.approx(1.0)

    def test_constant_slice(self):
        bins = np.full((3, 3), 1)
        f = glcm_features(bins, CFG)
        assert f["glcm_Contrast"] == 0.0
        assert f["glcm_JointEnergy"] == pytest.approx(1.0)
        assert f["glcm_Correlation"] == 1.0  # degenerate rule

    def test_matrices_symmetric(self, rng):
        for _ in range(10):
            bins = rng.integers(0, 5, (5, 5))
            if bins.max() == 0:
                continue
            for mat in glcm_matrices(bins, ng=4):
                assert np.array_equal(mat, mat.T)

    def test_normalization_sums_to_one(self, rng):
        bins = rng.integers(1, 4, (6, 6))
        for mat in glcm_matrices(bins, ng=3):
            p = mat / mat.sum()
            assert p.sum() == pytest.approx(1.0)

    def test_no_pairs_raises(self):
        bins = np.array([[1]])
        with pytest.raises(ValueError, match="pair"):
            glcm_features(bins, CFG)

    def test_distance_two(self):
        bins = np.array([[1, 2, 1, 2]])
        mats = glcm_matrices(bins, ng=2, distance=2)
        # horizontal pairs at distance 2: (1,1) and (2,2)
        assert mats[0][0, 0] == 2
        assert mats[0][1, 1] == 2
        assert mats[0][0, 1] == 0

    @given(slices)
    @settings(max_examples=60, deadline=None)
    def test_matches_oracle(self, bins):
        ng = int(bins.max())
        mine = glcm_matrices(bins, ng=ng)
        ref = oracle_glcm_matrices(bins, ng)
        for a, b in zip(mine, ref):
            assert np.array_equal(a, b)
        if any(m.sum() > 0 for m in mine):
            f = glcm_features(bins, CFG, ng=ng)
            per_dir = [oracle_glcm_features_one(m) for m in ref if m.sum() > 0]
            for name in f:
                expected = np.mean([d[name] for d in per_dir])
                assert f[name] == pytest.approx(expected, abs=1e-10)


class TestGlrlm:
    def test_row_hand_example(self):
        bins = np.array([[1, 1, 2]])
        mats = glrlm_matrices(bins, ng=2)
        horizontal = mats[0]
        assert horizontal[0, 1] == 1  # level 1, run length 2
        assert horizontal[1, 0] == 1  # level 2, run length 1
        assert horizontal.sum() == 2
        f = oracle_distribution_features(horizontal, 3)
        assert f["small"] == pytest.approx((1 / 4 + 1) / 2)  # SRE = 0.625
        assert f["percentage"] == pytest.approx(2 / 3)

    def test_constant_row_single_long_run(self):
        n = 7
        bins = np.ones((1, n), dtype=int)
        horizontal = glrlm_matrices(bins, ng=1)[0]
        assert horizontal[0, n - 1] == 1
        f = oracle_distribution_features(horizontal, n)
        assert f["large"] == pytest.approx(n**2)

    def test_two_color_checkerboard_horizontal_unit_runs(self):
        bins = np.indices((4, 4)).sum(axis=0) % 2 + 1
        horizontal = glrlm_matrices(bins, ng=2)[0]
        assert np.all(horizontal[:, 1:] == 0)  # every horizontal run has length 1

    def test_four_level_checkerboard_all_unit_runs(self):
        # neighbors differ in all four directions, so every run is a single pixel
        i, j = np.indices((5, 5))
        bins = (2 * i + j) % 4 + 1
        f = glrlm_features(bins, ng=4)
        assert f["glrlm_ShortRunEmphasis"] == pytest.approx(1.0)
        assert f["glrlm_RunPercentage"] == pytest.approx(1.0)

    def test_runs_broken_by_roi_holes(self):
        bins = np.array([[1, 0, 1, 1]])
        horizontal = glrlm_matrices(bins, ng=1)[0]
        assert horizontal[0, 0] == 1  # isolated single
        assert horizontal[0, 1] == 1  # run of two

    def test_run_mass_equals_pixels(self, rng):
        bins = rng.integers(0, 4, (6, 6))
        bins[0, 0] = max(bins[0, 0], 1)
        n_pixels = np.count_nonzero(bins)
        for mat in glrlm_matrices(bins, ng=3):
            j = np.arange(1, mat.shape[1] + 1)
            assert np.sum(mat * j[None, :]) == n_pixels

    @given(slices)
    @settings(max_examples=60, deadline=None)
    def test_matches_oracle(self, bins):
        ng = int(bins.max())
        mine = glrlm_matrices(bins, ng=ng)
        ref = oracle_glrlm_matrices(bins, ng)
        for a, b in zip(mine, ref):
            assert np.array_equal(a, b)
        n_pixels = int(np.count_nonzero(bins))
        f = glrlm_features(bins, ng=ng)
        per_dir = [oracle_distribution_features(m, n_pixels) for m in ref]
        for key, name in [
            ("small", "glrlm_ShortRunEmphasis"),
            ("large", "glrlm_LongRunEmphasis"),
            ("gln", "glrlm_GrayLevelNonUniformity"),
            ("glnn", "glrlm_GrayLevelNonUniformityNormalized"),
            ("sn", "glrlm_RunLengthNonUniformity"),
            ("snn", "glrlm_RunLengthNonUniformityNormalized"),
            ("percentage", "glrlm_RunPercentage"),
            ("gl_variance", "glrlm_GrayLevelVariance"),
            ("size_variance", "glrlm_RunVariance"),
            ("entropy", "glrlm_RunEntropy"),
        ]:
            expected = np.mean([d[key] for d in per_dir])
            assert f[name] == pytest.approx(expected, abs=1e-10), name


class TestGlszm:
    def test_hand_example(self):
        bins = np.array([[1, 1], [1, 2]])
        mat = glszm_matrix(bins, ng=2)
        assert mat[0, 2] == 1  # level 1, size 3
        assert mat[1, 0] == 1  # level 2, size 1
        assert mat.sum() == 2
        f = glszm_features(bins, ng=2)
        assert f["glszm_ZonePercentage"] == pytest.approx(0.5)

    def test_constant_slice_single_zone(self):
        bins = np.ones((3, 4), dtype=int)
        f = glszm_features(bins, ng=1)
        assert f["glszm_LargeAreaEmphasis"] == pytest.approx(144.0)  # one zone of 12
        assert f["glszm_ZonePercentage"] == pytest.approx(1 / 12)

    def test_checkerboard_two_levels_diagonal_zones(self):
        bins = np.indices((4, 4)).sum(axis=0) % 2 + 1
        # 8-connected equal-bin zones of a two-level checkerboard join diagonally
        mat = glszm_matrix(bins, ng=2)
        assert mat[0, 7] == 1 and mat[1, 7] == 1  # two diagonal mega-zones of 8

    def test_four_level_checkerboard_all_singleton_zones(self):
        i, j = np.indices((5, 5))
        bins = (2 * i + j) % 4 + 1  # all 8-neighbors differ
        mat = glszm_matrix(bins, ng=4)
        assert np.all(mat[:, 1:] == 0)
        f = glszm_features(bins, ng=4)
        assert f["glszm_ZonePercentage"] == pytest.approx(1.0)

    @given(slices)
    @settings(max_examples=60, deadline=None)
    def test_matches_oracle(self, bins):
        ng = int(bins.max())
        mine = glszm_matrix(bins, ng=ng)
        ref = oracle_glszm_matrix(bins, ng)
        assert np.array_equal(mine, ref)
        n_pixels = int(np.count_nonzero(bins))
        f = glszm_features(bins, ng=ng)
        d = oracle_distribution_features(ref, n_pixels)
        assert f["glszm_SmallAreaEmphasis"] == pytest.approx(d["small"], abs=1e-10)
        assert f["glszm_LargeAreaEmphasis"] == pytest.approx(d["large"], abs=1e-10)
        assert f["glszm_ZonePercentage"] == pytest.approx(d["percentage"], abs=1e-10)
        assert f["glszm_ZoneEntropy"] == pytest.approx(d["entropy"], abs=1e-10)


class TestNgtdm:
    def test_constant_slice_cap(self):
        bins = np.ones((3, 3), dtype=int)
        f = ngtdm_features(bins, CFG)
        assert f["ngtdm_Coarseness"] == 1e6
        assert f["ngtdm_Contrast"] == 0.0
        assert f["ngtdm_Busyness"] == 0.0
        assert f["ngtdm_Strength"] == 0.0

    def test_two_level_row_hand(self):
        bins = np.array([[1, 2, 1]])
        s, n = ngtdm_table(bins, ng=2)
        # ends see only the middle (mean 2), middle sees two ones (mean 1)
        assert s.tolist() == [2.0, 1.0]
        assert n.tolist() == [2.0, 1.0]

    def test_single_pixel_roi(self):
        bins = np.array([[0, 0], [0, 1]])
        f = ngtdm_features(bins, CFG)
        assert f["ngtdm_Coarseness"] == 1e6

    def test_bin_shift_invariance(self, rng):
        bins = rng.integers(1, 4, (5, 5))
        a = ngtdm_features(bins, CFG, ng=3)
        b = ngtdm_features(bins + 2, CFG, ng=5)
        # shifting every level by a constant leaves s, n and spacing of levels alike
        assert a["ngtdm_Contrast"] == pytest.approx(b["ngtdm_Contrast"], rel=1e-9)
        assert a["ngtdm_Coarseness"] == pytest.approx(b["ngtdm_Coarseness"], rel=1e-9)

    @given(slices)
    @settings(max_examples=60, deadline=None)
    def test_matches_oracle(self, bins):
        ng = int(bins.max())
        s_mine, n_mine = ngtdm_table(bins, ng=ng)
        s_ref, n_ref = oracle_ngtdm_table(bins, ng)
        assert np.allclose(s_mine, s_ref, atol=1e-12)
        assert np.array_equal(n_mine, n_ref)
        f = ngtdm_features(bins, CFG, ng=ng)
        ref = oracle_ngtdm_features(s_ref, n_ref)
        for name in f:
            assert f[name] == pytest.approx(ref[name], abs=1e-10), name


class TestGldm:
    def test_constant_3x3_alpha0(self):
        bins = np.ones((3, 3), dtype=int)
        mat = gldm_matrix(bins, ng=1, delta=1, alpha=0.0)
        assert mat[0, 3] == 4  # corners: 3 neighbors + 1
        assert mat[0, 5] == 4  # edges: 5 neighbors + 1
        assert mat[0, 8] == 1  # center: 8 neighbors + 1
        assert mat.sum() == 9

    def test_single_pixel(self):
        bins = np.array([[1]])
        mat = gldm_matrix(bins, ng=1)
        assert mat[0, 0] == 1
        f = gldm_features(bins, CFG)
        assert f["gldm_LargeDependenceEmphasis"] == pytest.approx(1.0)

    def test_alpha_saturation(self, rng):
        bins = rng.integers(1, 5, (4, 4))
        big_alpha = gldm_matrix(bins, ng=4, delta=1, alpha=100.0)
        uniform = gldm_matrix(np.ones_like(bins), ng=1, delta=1, alpha=0.0)
        assert np.array_equal(big_alpha.sum(axis=0), uniform.sum(axis=0))

    @given(slices)
    @settings(max_examples=60, deadline=None)
    def test_matches_oracle(self, bins):
        ng = int(bins.max())
        mine = gldm_matrix(bins, ng=ng, delta=1, alpha=0.0)
        ref = oracle_gldm_matrix(bins, ng, delta=1, alpha=0.0)
        assert np.array_equal(mine, ref)
        n_pixels = int(np.count_nonzero(bins))
        f = gldm_features(bins, CFG, ng=ng)
        d = oracle_distribution_features(ref, n_pixels)
        assert f["gldm_SmallDependenceEmphasis"] == pytest.approx(d["small"], abs=1e-10)
        assert f["gldm_LargeDependenceEmphasis"] == pytest.approx(d["large"], abs=1e-10)
        assert f["gldm_GrayLevelNonUniformity"] == pytest.approx(d["gln"], abs=1e-10)
        assert f["gldm_DependenceNonUniformity"] == pytest.approx(d["sn"], abs=1e-10)
        assert f["gldm_DependenceEntropy"] == pytest.approx(d["entropy"], abs=1e-10)


class TestPaddingInvariance:
    def test_global_level_count_does_not_change_features(self, rng):
        for _ in range(5):
            bins = rng.integers(0, 4, (5, 5))
            if bins.max() == 0:
                continue
            ng = int(bins.max())
            for func in (
                lambda b, n: glcm_features(b, CFG, ng=n) if any(m.sum() for m in glcm_matrices(b, ng=n)) else {},
                lambda b, n: glrlm_features(b, ng=n),
                lambda b, n: glszm_features(b, ng=n),
                lambda b, n: ngtdm_features(b, CFG, ng=n),
                lambda b, n: gldm_features(b, CFG, ng=n),
            ):
                tight = func(bins, ng)
                padded = func(bins, ng + 3)
                for name in tight:
                    assert tight[name] == pytest.approx(padded[name], abs=1e-12), name
