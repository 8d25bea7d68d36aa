import pytest

from lesionpipe.runconfig import ConfigError, RunConfig, config_with_seed, load_config


def _load(tmp_path, text, **kwargs):
    path = tmp_path / "run.toml"
    path.write_text(text)
    return load_config(path, **kwargs)


class TestDefaults:
    def test_empty_file_gives_paper_defaults(self, tmp_path):
        cfg = _load(tmp_path, "")
        assert cfg.extract.bin_width == 25.0
        assert cfg.min_dice == 0.3
        assert cfg.forest.n_trees == 1000
        assert cfg.forest.ccp_alpha == 0.01
        assert cfg.cv_folds == 10
        assert cfg.n_search == 50
        assert cfg.connectivity == 26
        assert cfg.threshold == 0.5

    def test_runconfig_object_defaults_match(self):
        cfg = RunConfig()
        assert cfg.extract.target_xy_spacing == (1.0, 1.0)
        assert cfg.forest.min_samples_split == 2


class TestOverrides:
    def test_single_key_override(self, tmp_path):
        cfg = _load(tmp_path, "[extract]\nbin_width = 50\n")
        assert cfg.extract.bin_width == 50.0
        assert cfg.min_dice == 0.3  # untouched

    def test_learn_section(self, tmp_path):
        cfg = _load(tmp_path, "[learn]\nn_trees = 64\nccp_alpha = 0.002\nk = 5\n")
        assert cfg.forest.n_trees == 64
        assert cfg.forest.ccp_alpha == 0.002
        assert cfg.cv_folds == 5

    def test_target_spacing_pair(self, tmp_path):
        cfg = _load(tmp_path, "[extract]\ntarget_spacing_xy = [2.0, 2.0]\n")
        assert cfg.extract.target_xy_spacing == (2.0, 2.0)


class TestValidation:
    def test_string_where_number_expected(self, tmp_path):
        with pytest.raises(ConfigError, match="expected a number"):
            _load(tmp_path, '[extract]\nbin_width = "abc"\n')

    def test_unknown_key_strict(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown key"):
            _load(tmp_path, "[extract]\nbin_widht = 25\n")

    def test_unknown_section_strict(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown config section"):
            _load(tmp_path, "[training]\nepochs = 3\n")

    def test_non_strict_ignores_unknown(self, tmp_path):
        cfg = _load(tmp_path, "[extras]\nfoo = 1\n", strict=False)
        assert cfg.extract.bin_width == 25.0

    def test_float_for_integer_key_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="integer"):
            _load(tmp_path, "[learn]\nn_trees = 10.5\n")

    def test_malformed_toml(self, tmp_path):
        with pytest.raises(ConfigError):
            _load(tmp_path, "[extract\nbin_width = 25\n")


class TestDigest:
    def test_digest_stable_and_sensitive(self, tmp_path):
        a = _load(tmp_path, "")
        b = RunConfig()
        assert a.digest() == b.digest()
        c = _load(tmp_path, "[extract]\nbin_width = 50\n")
        assert c.digest() != a.digest()

    def test_seed_does_not_change_digest(self):
        cfg = RunConfig()
        assert config_with_seed(cfg, 123).digest() == cfg.digest()
        assert config_with_seed(cfg, 123).forest.seed == 123
