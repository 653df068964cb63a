import json

import pytest

from qclab.config import (
    SUBCOMMANDS,
    default_config,
    grid_from_config,
    load_config,
    merge,
    potential_from_config,
    units_from_config,
)
from qclab.errors import ConfigError


class TestDefaults:
    @pytest.mark.parametrize("name", SUBCOMMANDS)
    def test_every_subcommand_ships_a_config(self, name):
        cfg = default_config(name)
        assert isinstance(cfg, dict) and cfg

    def test_unknown(self):
        with pytest.raises(ConfigError):
            default_config("teleport")


class TestMerge:
    def test_nested_override(self):
        out = merge({"grid": {"n": 2048, "L": 40.0}}, {"grid": {"n": 1024}})
        assert out == {"grid": {"n": 1024, "L": 40.0}}

    def test_int_for_float(self):
        assert merge({"L": 40.0}, {"L": 20})["L"] == 20

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="grid.m"):
            merge({"grid": {"n": 2048}}, {"grid": {"m": 1}})

    @pytest.mark.parametrize("value", ["big", True, [1]])
    def test_type_mismatch(self, value):
        with pytest.raises(ConfigError):
            merge({"n": 2048}, {"n": value})

    def test_potential_replaced_whole(self):
        base = {"potential": {"family": "harmonic", "stiffness": 1.0}}
        out = merge(base, {"potential": {"family": "linear", "force": 2.0}})
        assert out["potential"] == {"family": "linear", "force": 2.0}

    def test_default_untouched(self):
        base = {"grid": {"n": 2048}}
        merge(base, {"grid": {"n": 64}})
        assert base["grid"]["n"] == 2048


class TestLoad:
    def test_file(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"subcommand": "born", "sigma": 0.25}))
        assert load_config("born", path)["sigma"] == 0.25

    def test_bad_json(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config("born", path)

    def test_not_an_object(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigError):
            load_config("born", path)


class TestBuilders:
    def test_grid(self):
        g = grid_from_config({"dim": 2, "n": 128, "L": 20.0})
        assert g.shape == (128, 128)
        with pytest.raises(ConfigError):
            grid_from_config({"n": 100, "L": 20.0})
        with pytest.raises(ConfigError):
            grid_from_config({"L": 20.0})

    def test_units(self):
        assert units_from_config({"mass": 2.0}).mass == 2.0
        with pytest.raises(ConfigError):
            units_from_config({"hbar": 0.0})

    def test_potentials(self):
        V = potential_from_config({"family": "harmonic", "stiffness": 2.0, "center": 1.0})
        assert V.force_at([2.0])[0] == -2.0
        ramp = potential_from_config({"family": "linear", "force": 1.0,
                                      "schedule": {"kind": "ramp", "rate": 1.0}})
        assert ramp.force_at([0.0], t=1.0)[0] == 2.0
        wave = potential_from_config({"family": "free",
                                      "schedule": {"kind": "sinusoid", "amplitude": 1.0,
                                                   "frequency": 1.0}})
        assert wave.time_dependent

    @pytest.mark.parametrize("desc", [
        {"family": "quartic"},
        {"family": "harmonic"},
        {"family": "linear", "force": 1.0, "extra": 2},
        {"family": "free", "schedule": {"kind": "pulse"}},
        {"family": "free", "schedule_mode": "sideways"},
    ])
    def test_bad_potentials(self, desc):
        with pytest.raises(ConfigError):
            potential_from_config(desc)
