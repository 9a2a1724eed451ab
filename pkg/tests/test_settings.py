import json

import pytest

from davnsim.core.errors import ConfigError
from davnsim.core.models import DelayMode, LinkBudget, QueueParams
from davnsim.core.settings_manager import (
    DavnSettings,
    SettingsManager,
    field_index,
    load_settings,
    nest_overrides,
)


def test_default_file_matches_model_defaults(default_toml):
    """config/default.toml restates every default"""
    assert load_settings(default_toml).model_dump() == DavnSettings().model_dump()


def test_defaults_carry_the_notation_constants():
    """Model defaults hold the published constants"""
    settings = DavnSettings()
    assert settings.link.carrier_frequency == 2.4e9
    assert settings.link.transmit_power == 0.28
    assert settings.link.message_size_bits == 4096
    assert settings.propulsion.blade_profile_power == 84.14
    assert settings.queue.state_arrival_rate == 2.5
    assert settings.vehicles.density == [40, 80, 120]
    assert settings.run.step_seconds == 0.4


def test_precedence_file_env_flags(tmp_path, monkeypatch):
    """Flags override environment, which overrides the TOML file"""
    path = tmp_path / "run.toml"
    path.write_text("[run]\nseed = 5\nsteps = 20\n", encoding="utf-8")
    assert load_settings(path).run.seed == 5

    monkeypatch.setenv("DAVN_RUN__SEED", "7")
    settings = load_settings(path)
    assert settings.run.seed == 7
    assert settings.run.steps == 20

    assert load_settings(path, {"seed": 9}).run.seed == 9


def test_environment_without_file(monkeypatch):
    """DAVN_ variables apply with no config file"""
    monkeypatch.setenv("DAVN_QUEUE__PAPER_MOMENTS", "true")
    assert load_settings().queue.paper_moments is True


def test_unknown_key_rejected(tmp_path):
    """Typos in the TOML file are errors"""
    path = tmp_path / "bad.toml"
    path.write_text("[run]\nsteps = 10\nspeed = 3\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_settings(path)
    with pytest.raises(ConfigError):
        load_settings(overrides={"no_such_key": 1})


def test_invalid_values_rejected(tmp_path):
    """Out-of-range values raise ConfigError"""
    path = tmp_path / "bad.toml"
    path.write_text("[run]\nsteps = 0\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_settings(path)
    with pytest.raises(ConfigError):
        load_settings(overrides={"horizontal_speeds_kmh": [5.0]})
    with pytest.raises(ConfigError):
        load_settings(overrides={"eta_los": 30.0})


def test_malformed_and_missing_files(tmp_path):
    """Broken or absent files raise ConfigError"""
    path = tmp_path / "broken.toml"
    path.write_text("[run\nsteps = ", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_settings(path)
    with pytest.raises(ConfigError):
        load_settings(tmp_path / "absent.toml")


def test_field_index_is_flat_and_complete():
    """Every key is unique across sections"""
    index = field_index()
    assert index["paper_moments"][0] == "queue"
    assert index["d2d_transfers"][0] == "link"
    assert index["hover_charging"][0] == "propulsion"
    assert index["trace_path"][0] == "vehicles"
    assert len(index) == sum(
        len(DavnSettings.model_fields[s].annotation.model_fields) for s in DavnSettings.model_fields
    )
    assert nest_overrides({"seed": 1, "lanes": 2}) == {"run": {"seed": 1}, "vehicles": {"lanes": 2}}


def test_run_config_from_settings():
    """Settings produce the immutable engine config"""
    settings = load_settings(overrides={"steps": 12, "delay_mode": "physical", "d2d_transfers": [[1, 2, 1]]})
    config = settings.to_run_config(80)
    assert config.steps == 12
    assert config.density == 80
    assert config.delay_mode is DelayMode.PHYSICAL
    assert config.d2d_transfers == ((1, 2, 1),)
    assert type(config.link) is LinkBudget
    assert type(config.queue) is QueueParams
    assert len(config.ellipses) == len(config.trajectories) == 4
    assert config.trajectories[3].horizontal_speed == pytest.approx(30 / 3.6)


def test_trace_path_replaces_density(tmp_path):
    """A trace path disables the density sweep"""
    trace = tmp_path / "trace.csv"
    config = load_settings(overrides={"trace_path": str(trace)}).to_run_config(40)
    assert config.density is None
    assert config.trace_path == trace


def test_settings_manager_singleton(tmp_path):
    """One manager per process, with get, save and reset"""
    manager = SettingsManager.load(overrides={"seed": 3})
    assert SettingsManager() is manager
    assert manager.get("run.seed") == 3
    assert manager.get("queue.paper_moments") is False
    assert manager.get("run.nothing", "fallback") == "fallback"

    path = manager.save_settings(tmp_path / "out" / "effective.json")
    saved = json.loads(path.read_text(encoding="utf-8"))
    assert saved["run"]["seed"] == 3
    assert saved["link"]["bandwidth"] == 1e8

    SettingsManager.reset()
    assert SettingsManager().get("run.seed") == 0
