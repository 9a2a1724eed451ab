import pandas as pd
import pytest

from davnsim.cli import build_parser, main, parse_flag_value
from davnsim.core.mobility import export_trace, synth_highway
from davnsim.core.settings_manager import field_index


def test_analyze_queue_prints_the_analysis(capsys):
    """analyze-queue prints both classes and exits 0"""
    assert main(["analyze-queue", "--vehicles", "10"]) == 0
    out = capsys.readouterr().out
    for label in ("E[W1]", "E[S1]", "E[S2]", "rho_1, rho_2, rho"):
        assert label in out


def test_analyze_queue_unstable_exits_2(capsys):
    """An overloaded processor is a model-domain error"""
    assert main(["analyze-queue", "--cpu-clock-hz", "1000"]) == 2
    assert "unstable" in capsys.readouterr().err


def test_analyze_queue_with_des_note(tmp_path, capsys):
    """--validate runs the DES and --note writes the comparison"""
    note = tmp_path / "note.txt"
    assert main(["analyze-queue", "--validate", "2000", "--note", str(note)]) == 0
    assert "E[S2] classical" in capsys.readouterr().out
    assert "E[W1]" in note.read_text(encoding="utf-8")


def test_config_errors_exit_1(tmp_path):
    """Bad files and bad values exit with 1"""
    assert main(["analyze-queue", "--config", str(tmp_path / "absent.toml")]) == 1
    assert main(["simulate", "--steps", "0", "--output-dir", str(tmp_path)]) == 1
    assert main(["simulate", "--p-up", "2", "--output-dir", str(tmp_path)]) == 1


def test_gen_trajectory(tmp_path):
    """gen-trajectory writes one row per UAV per step"""
    out = tmp_path / "traj.csv"
    assert main(["gen-trajectory", "--steps", "10", "--seed", "4", "--out", str(out)]) == 0
    frame = pd.read_csv(out)
    assert len(frame) == 44
    assert frame["z"].between(100, 150).all()


def test_simulate_smoke(tmp_path):
    """A short run writes the dataset, the summary and passes --check"""
    args = ["simulate", "--steps", "10", "--density", "5", "--seed", "1", "--output-dir", str(tmp_path), "--check"]
    assert main(args) == 0
    assert (tmp_path / "dataset_rho5.csv").exists()
    assert (tmp_path / "dataset_rho5_summary.csv").exists()
    assert (tmp_path / "effective_config.json").exists()
    assert len(pd.read_csv(tmp_path / "dataset_rho5.csv")) == 40


def test_simulate_is_deterministic(tmp_path):
    """Two invocations with one seed give identical bytes"""
    for name in ("a", "b"):
        assert main(["simulate", "--steps", "15", "--density", "20", "--seed", "2",
                     "--output-dir", str(tmp_path / name)]) == 0
    for filename in ("dataset_rho20.csv", "dataset_rho20_summary.csv"):
        assert (tmp_path / "a" / filename).read_bytes() == (tmp_path / "b" / filename).read_bytes()


def test_density_sweep_writes_one_file_per_density(tmp_path):
    """--density 3,4 gives two datasets"""
    assert main(["simulate", "--steps", "5", "--density", "3,4", "--output-dir", str(tmp_path)]) == 0
    assert sorted(p.name for p in tmp_path.glob("dataset_rho?.csv")) == ["dataset_rho3.csv", "dataset_rho4.csv"]


def test_simulate_from_trace(tmp_path):
    """A trace file replaces the synthetic highway"""
    trace_path = export_trace(synth_highway(10, seed=0, steps=6), tmp_path / "trace.csv")
    out = tmp_path / "out"
    assert main(["simulate", "--steps", "5", "--trace-path", str(trace_path),
                 "--output-dir", str(out), "--check"]) == 0
    assert (out / "dataset.csv").exists()


def test_bad_trace_exits_1(tmp_path):
    """Trace ingestion errors are input errors"""
    trace_path = tmp_path / "trace.csv"
    trace_path.write_text("step,vehicle_id\n0,a\n", encoding="utf-8")
    assert main(["simulate", "--steps", "2", "--trace-path", str(trace_path), "--output-dir", str(tmp_path)]) == 1


def test_help_lists_every_configuration_key(capsys):
    """Every config key has a flag in --help"""
    with pytest.raises(SystemExit) as info:
        build_parser().parse_args(["simulate", "--help"])
    assert info.value.code == 0
    out = capsys.readouterr().out
    for key in field_index():
        assert "--" + key.replace("_", "-") in out
    assert "--config" in out


def test_bool_flags_have_negations():
    """Boolean keys accept --x and --no-x"""
    args = build_parser().parse_args(["simulate", "--no-hover-charging", "--paper-moments"])
    assert args.hover_charging is False
    assert args.paper_moments is True


def test_parse_flag_value():
    """Flag strings become values pydantic accepts"""
    assert parse_flag_value("density", "40, 80,120") == ["40", "80", "120"]
    assert parse_flag_value("ellipse_centers", "0:637,637:0") == [["0", "637"], ["637", "0"]]
    assert parse_flag_value("d2d_transfers", "1:2:3") == [["1", "2", "3"]]
    assert parse_flag_value("interference_radius", "none") is None
    assert parse_flag_value("seed", "3") == "3"
    assert parse_flag_value("steps", 7) == 7
