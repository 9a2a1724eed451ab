from davnsim.core.settings_manager import load_settings
from davnsim.core.sweep_service import SweepService


def _settings(tmp_path, **overrides):
    values = {"steps": 4, "density": [3, 6, 9], "seed": 12, "output_dir": str(tmp_path)}
    values.update(overrides)
    return load_settings(overrides=values)


def test_member_seeds_and_paths(tmp_path):
    """Member i runs with seed XOR i and writes its own file"""
    configs = SweepService(_settings(tmp_path)).member_configs()
    assert [c.density for c in configs] == [3, 6, 9]
    assert [c.seed for c in configs] == [12, 13, 14]
    assert [c.output_path.name for c in configs] == ["dataset_rho3.csv", "dataset_rho6.csv", "dataset_rho9.csv"]


def test_trace_gives_a_single_member(tmp_path):
    """A trace run is one member writing dataset.csv"""
    settings = _settings(tmp_path, trace_path=str(tmp_path / "trace.csv"))
    (config,) = SweepService(settings).member_configs()
    assert config.density is None
    assert config.output_path.name == "dataset.csv"


def test_sweep_reports_progress(tmp_path):
    """Status and done callbacks fire once per member"""
    events = []
    members = SweepService(_settings(tmp_path)).run(callback=lambda kind, payload: events.append(kind))
    assert [m.density for m in members] == [3, 6, 9]
    assert events.count("status") == 3
    assert events.count("done") == 3
    assert all(m.dataset_path.exists() and m.summary_path.exists() for m in members)


def test_workers_do_not_change_outputs(tmp_path):
    """Worker processes write the same bytes as a serial sweep"""
    serial = SweepService(_settings(tmp_path / "serial")).run()
    parallel = SweepService(_settings(tmp_path / "parallel", workers=2)).run()
    assert [m.index for m in parallel] == [0, 1, 2]
    for a, b in zip(serial, parallel):
        assert a.dataset_path.read_bytes() == b.dataset_path.read_bytes()
