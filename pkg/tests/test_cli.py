"""Unit tests for the command-line interface."""

import json

import numpy as np
import pytest

from beamsim.cli import main
from beamsim.fieldgen import BeamModelSpec, generate_ensemble
from beamsim.spectral import spectrum
from beamsim.traceio import read_trace


def run(*argv):
    return main(list(argv))


def csv_values(path):
    """Parse a quantity,value CSV report into a dict (metadata lines skipped)."""
    out = {}
    for line in path.read_text().splitlines():
        if line.startswith("#") or line.startswith("quantity,"):
            continue
        name, value, _formula = line.split(",", 2)
        out[name] = float(value)
    return out


class TestBlackbody:
    def test_report_contains_paper_scenario_numbers(self, tmp_path):
        path = tmp_path / "report.csv"
        assert run("blackbody", "--out", str(path)) == 0
        values = csv_values(path)
        assert values["T_prime_K"] == pytest.approx(4.6e5, rel=0.02)
        assert values["T_doubleprime_K"] == pytest.approx(2.9e15, rel=0.02)
        assert values["collimation_efficiency_approx"] == pytest.approx(2.6e-12, rel=0.05)
        assert -52.5 <= values["filtering_efficiency_log10_total"] <= -49.5

    def test_json_format(self, tmp_path):
        path = tmp_path / "report.json"
        assert run("blackbody", "--format", "json", "--out", str(path)) == 0
        body = json.loads(path.read_text())
        assert body["report"]["T_prime_K"] == pytest.approx(4.6e5, rel=0.02)
        assert body["config"]["power"] == 0.1
        assert "tool_version" in body

    def test_filament_area_for_60W_bulb(self, tmp_path):
        path = tmp_path / "report.csv"
        assert run("blackbody", "--power", "60", "--out", str(path)) == 0
        assert csv_values(path)["filament_area_for_peak_m2"] == pytest.approx(15e-6, rel=0.05)

    def test_stdout_when_no_out(self, capsys):
        assert run("blackbody") == 0
        assert "T_prime_K" in capsys.readouterr().out

    def test_io_error_exit_code(self, tmp_path):
        missing = tmp_path / "no_such_dir" / "report.csv"
        assert run("blackbody", "--out", str(missing)) == 4

    def test_bad_value_exit_code(self):
        assert run("blackbody", "--power", "-1") == 3


class TestUsageErrors:
    def test_missing_required_flags(self):
        assert run("simulate") == 2

    def test_unknown_subcommand(self):
        assert run("frobnicate") == 2

    def test_help_exits_zero(self):
        assert run("--help") == 0


class TestSimulate:
    ARGS = ("simulate", "--family", "laser", "--nu", "100", "--gamma", "1",
            "--dt", "0.01", "--duration", "50", "--traces", "3", "--seed", "42")

    def test_writes_traces_and_manifest(self, tmp_path, capsys):
        out = tmp_path / "run"
        assert run(*self.ARGS, "--out", str(out)) == 0
        files = sorted(out.glob("*.ftrc"))
        assert len(files) == 3
        manifest = json.loads((out / "run.json").read_text())
        assert manifest["config"]["seed"] == 42
        assert manifest["expected_flux"] == 25.0
        assert "expected nu*Gamma/4 = 25" in capsys.readouterr().out
        trace = read_trace(files[0])
        assert trace.model.family == "laser"
        assert trace.n_samples == 5000

    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run(*self.ARGS, "--out", str(a)) == 0
        assert run(*self.ARGS, "--out", str(b)) == 0
        for fa in sorted(a.iterdir()):
            assert fa.read_bytes() == (b / fa.name).read_bytes()

    def test_degenerate_zero_brightness(self, tmp_path, capsys):
        out = tmp_path / "zero"
        assert run("simulate", "--family", "thermal", "--nu", "0", "--gamma", "1",
                   "--dt", "0.01", "--duration", "50", "--traces", "2",
                   "--seed", "1", "--out", str(out)) == 0
        assert "degenerate" in capsys.readouterr().out
        assert json.loads((out / "run.json").read_text())["degenerate"] is True

    def test_numerical_error_exit_code(self, tmp_path):
        assert run("simulate", "--family", "thermal", "--nu", "100", "--gamma", "1",
                   "--dt", "5", "--duration", "500", "--traces", "1",
                   "--seed", "1", "--out", str(tmp_path / "x")) == 3


class TestSpectrum:
    def test_inline_matches_library(self, tmp_path):
        path = tmp_path / "spec.json"
        assert run("spectrum", "--family", "thermal", "--nu", "100", "--gamma", "1",
                   "--dt", "0.01", "--duration", "20", "--traces", "4",
                   "--seed", "9", "--format", "json", "--out", str(path)) == 0
        body = json.loads(path.read_text())
        model = BeamModelSpec(family="thermal", nu=100.0, gamma=1.0)
        expected = spectrum(generate_ensemble(model, 0.01, 2000, 9, 4))
        assert np.allclose(body["spectrum"]["values"], expected.values)

    def test_from_stored_traces(self, tmp_path):
        run_dir = tmp_path / "run"
        assert run(*TestSimulate.ARGS, "--out", str(run_dir)) == 0
        path = tmp_path / "spec.csv"
        assert run("spectrum", "--in", str(run_dir), "--out", str(path)) == 0
        assert "# ensemble_size=3" in path.read_text()

    def test_empty_input_dir(self, tmp_path):
        assert run("spectrum", "--in", str(tmp_path)) == 3

    def test_byte_identical_reruns(self, tmp_path):
        args = ("spectrum", "--family", "laser", "--nu", "100", "--gamma", "1",
                "--dt", "0.01", "--duration", "20", "--traces", "3", "--seed", "5")
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(*args, "--out", str(a)) == 0
        assert run(*args, "--out", str(b)) == 0
        assert a.read_bytes() == b.read_bytes()


class TestG2Command:
    def test_ideal_laser_column_of_ones(self, tmp_path):
        path = tmp_path / "g2.csv"
        assert run("g2", "--family", "laser", "--nu", "100", "--gamma", "1",
                   "--dt", "0.01", "--duration", "20", "--traces", "5",
                   "--seed", "3", "--taus", "0.0,0.5,1.0", "--out", str(path)) == 0
        rows = [line for line in path.read_text().splitlines()
                if not line.startswith("#") and not line.startswith("tau,")]
        for row in rows:
            assert float(row.split(",")[1]) == 1.0

    def test_filtered_g2_runs(self, tmp_path):
        path = tmp_path / "g2f.json"
        assert run("g2", "--family", "thermal", "--nu", "100", "--gamma", "1",
                   "--dt", "0.01", "--duration", "100", "--traces", "10",
                   "--seed", "3", "--taus", "0.0", "--filter-fwhm", "1.0",
                   "--format", "json", "--out", str(path)) == 0
        body = json.loads(path.read_text())
        assert 1.0 < body["g2"]["values"][0] < 4.0


class TestConfigFile:
    def test_config_supplies_defaults_and_flags_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("family=laser\nnu=100\ngamma=1\ndt=0.01\n"
                       "duration=20\ntraces=4\nseed=9\n")
        path = tmp_path / "spec.csv"
        assert run("spectrum", "--config", str(cfg), "--traces", "6",
                   "--out", str(path)) == 0
        text = path.read_text()
        assert "# traces=6" in text       # flag wins
        assert "# seed=9" in text         # config fills the rest

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("frobnication_level=11\n")
        assert run("spectrum", "--config", str(cfg)) == 3

    def test_malformed_line(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("this is not a key value pair\n")
        assert run("spectrum", "--config", str(cfg)) == 3


class TestSweepCommand:
    def test_small_sweep_table(self, tmp_path):
        path = tmp_path / "sweep.csv"
        assert run("sweep", "--nu", "100", "--gamma", "1", "--dt", "0.001",
                   "--duration", "250", "--traces", "3", "--seed", "5",
                   "--fwhms", "100,0.1", "--out", str(path)) == 0
        rows = [line for line in path.read_text().splitlines()
                if not line.startswith("#") and not line.startswith("fwhm,")]
        assert len(rows) == 2
        fwhm, value, _err, size = rows[0].split(",")
        assert float(fwhm) == 100.0
        assert float(value) > 0.9
        assert int(size) == 3
