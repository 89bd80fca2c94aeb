import json

import pytest

from accsim.config import ConfigError, config_from_dict, config_to_dict, load_config
from accsim.scenario import PRESETS, ReplayProfile


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_round_trip_through_json(name):
    cfg = PRESETS[name]
    text = json.dumps(config_to_dict(cfg))
    assert config_from_dict(json.loads(text)) == cfg


def test_minimal_config():
    cfg = config_from_dict({"ego_target_speed": 50, "lead_profile": {"kind": "constant", "speed": 50}})
    assert cfg.ego_target_speed == 50 and cfg.initial_gap == 30.0


def test_unknown_top_level_key():
    with pytest.raises(ConfigError, match="unknown key.*ego_speed"):
        config_from_dict({"ego_speed": 50, "lead_profile": {"kind": "constant", "speed": 50}})


def test_unknown_nested_key():
    with pytest.raises(ConfigError, match="attack: unknown key.*rate"):
        config_from_dict(
            {"ego_target_speed": 50, "lead_profile": {"kind": "constant", "speed": 50}, "attack": {"rate": 0.5}}
        )


def test_bad_profile_kind():
    with pytest.raises(ConfigError, match="lead_profile"):
        config_from_dict({"ego_target_speed": 50, "lead_profile": {"kind": "sine"}})


def test_invalid_value_reported():
    with pytest.raises(ConfigError, match="ids"):
        config_from_dict(
            {
                "ego_target_speed": 50,
                "lead_profile": {"kind": "constant", "speed": 50},
                "ids": {"detection_rate": 2.0},
            }
        )


def test_json_syntax_error_has_line(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{\n  "ego_target_speed": 50,\n  oops\n}')
    with pytest.raises(ConfigError, match="line 3"):
        load_config(p)


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/config.json")


def test_replay_path_relative_to_config(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"ego_target_speed": 25, "lead_profile": {"kind": "replay", "path": "lead.log"}}))
    cfg = load_config(p)
    assert isinstance(cfg.lead_profile, ReplayProfile)
    assert cfg.lead_profile.path == str(tmp_path / "lead.log")


def test_null_end_time_means_open_window():
    cfg = config_from_dict(
        {
            "ego_target_speed": 50,
            "lead_profile": {"kind": "constant", "speed": 50},
            "attack": {"enabled": True, "end_time": None},
        }
    )
    assert cfg.attack.end_time == float("inf")
