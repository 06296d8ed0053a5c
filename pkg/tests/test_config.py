import numpy as np
import pytest

from ultraloc import config as cfg_mod
from ultraloc.channel import OPTIMIZED_LAYOUT, ORIGINAL_LAYOUT
from ultraloc.errors import ConfigError


def write(tmp_path, text, name="sim.ini"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestDefaults:
    def test_default_config_is_valid(self):
        cfg = cfg_mod.default_config()
        cfg_mod.validate_config(cfg)
        assert cfg.scene.layout is ORIGINAL_LAYOUT
        assert cfg.waveform.sample_rate == 340_000.0
        assert len(cfg.waveform.center_frequencies) == 6

    def test_drone_domain_from_config(self):
        domain = cfg_mod.default_config().drone_domain()
        assert domain.points().shape[0] == 486


class TestLoadConfig:
    def test_roundtrip_overrides(self, tmp_path):
        path = write(
            tmp_path,
            """
[scene]
layout = optimized

[waveform]
burst_bits = 8

[channel]
snr_db = none
multipath = false

[run]
trials = 3
seed = 77
snr_list = 0, 10, 20
""",
        )
        cfg = cfg_mod.load_config(path)
        assert np.array_equal(
            cfg.scene.layout.positions, OPTIMIZED_LAYOUT.positions
        )
        assert cfg.waveform.burst_bits == 8
        assert cfg.channel.snr_db is None
        assert not cfg.channel.multipath
        assert cfg.run.trials == 3
        assert cfg.run.snr_list == (0.0, 10.0, 20.0)

    def test_unknown_section_rejected(self, tmp_path):
        path = write(tmp_path, "[typo]\nx = 1\n")
        with pytest.raises(ConfigError, match=r"unknown section \[typo\]"):
            cfg_mod.load_config(path)

    def test_unknown_key_rejected(self, tmp_path):
        path = write(tmp_path, "[run]\ntrails = 5\n")
        with pytest.raises(ConfigError, match="unknown key 'trails'"):
            cfg_mod.load_config(path)

    def test_bad_value_reported_with_key(self, tmp_path):
        path = write(tmp_path, "[run]\ntrials = many\n")
        with pytest.raises(ConfigError, match="bad value for 'trials'"):
            cfg_mod.load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            cfg_mod.load_config(tmp_path / "nope.ini")

    def test_nyquist_violation_rejected(self, tmp_path):
        path = write(tmp_path, "[waveform]\nsample_rate = 90000\n")
        with pytest.raises(ConfigError, match="Nyquist"):
            cfg_mod.load_config(path)

    def test_chip_misalignment_rejected(self, tmp_path):
        path = write(tmp_path, "[waveform]\nsymbol_duration = 0.0020001\n")
        with pytest.raises(ConfigError, match="whole number of samples"):
            cfg_mod.load_config(path)

    def test_domain_outside_room_rejected(self, tmp_path):
        path = write(tmp_path, "[run]\ndomain_z = 0.5, 4.5\n")
        with pytest.raises(ConfigError, match="inside the room"):
            cfg_mod.load_config(path)

    def test_bad_fusion_weights_rejected(self, tmp_path):
        path = write(tmp_path, "[fusion]\nw1 = 0.5\nw2 = 0.6\n")
        with pytest.raises(ConfigError, match="sum to 1"):
            cfg_mod.load_config(path)


class TestResolveLayout:
    def test_builtins(self):
        assert cfg_mod.resolve_layout("original") is ORIGINAL_LAYOUT
        assert cfg_mod.resolve_layout("optimized") is OPTIMIZED_LAYOUT

    def test_json_file(self, tmp_path):
        path = write(
            tmp_path,
            "[[1, 1, 3], [4, 1, 3.5], [4, 4, 3], [1, 4, 3.5]]",
            name="beacons.json",
        )
        layout = cfg_mod.resolve_layout(str(path))
        assert layout.positions.shape == (4, 3)
        assert layout.positions[1][2] == 3.5

    def test_text_file(self, tmp_path):
        path = write(
            tmp_path,
            "# beacon coordinates\n1 1 3\n4, 1, 3.5\n4 4 3\n1 4 3.5\n",
            name="beacons.txt",
        )
        layout = cfg_mod.resolve_layout(str(path))
        assert layout.positions.shape == (4, 3)

    def test_missing_file_rejected(self):
        with pytest.raises(ConfigError):
            cfg_mod.resolve_layout("no-such-layout-file.txt")

    def test_wrong_shape_rejected(self, tmp_path):
        path = write(tmp_path, "[[1, 1, 3], [4, 1, 3.5]]", name="two.json")
        with pytest.raises(ConfigError):
            cfg_mod.resolve_layout(str(path))
