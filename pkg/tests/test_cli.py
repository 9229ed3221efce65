import math

import numpy as np
import pytest

from spindrive.cli import ConfigError, main, parse_config
from spindrive.sweep import read_spectrum_csv

TP = 2 * math.pi


def write_cfg(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


class TestParseConfig:
    def test_defaults_applied(self, tmp_path):
        cfg = parse_config(write_cfg(tmp_path, ""))
        assert cfg["model.frame"] == "rwa"
        assert cfg["sim.dt_us"] == 1e-4
        assert cfg["grid.phases"] == 16

    def test_values_and_comments(self, tmp_path):
        cfg = parse_config(write_cfg(tmp_path, (
            "# a comment\n"
            "model.rabi_mw_mhz = 0.43   # inline comment\n"
            "\n"
            "sim.t_total_us = 5\n")))
        assert cfg["model.rabi_mw_mhz"] == 0.43
        assert cfg["sim.t_total_us"] == 5.0

    def test_missing_file_names_path(self, tmp_path):
        missing = tmp_path / "nope.cfg"
        with pytest.raises(ConfigError, match="nope.cfg"):
            parse_config(missing)

    def test_unknown_key_names_line(self, tmp_path):
        path = write_cfg(tmp_path, "model.rabi_mw_mhz = 0.5\nbogus.key = 1\n")
        with pytest.raises(ConfigError, match=r":2:"):
            parse_config(path)

    def test_bad_value_rejected(self, tmp_path):
        path = write_cfg(tmp_path, "sim.dt_us = fast\n")
        with pytest.raises(ConfigError, match="dt_us"):
            parse_config(path)

    def test_bad_enum_rejected(self, tmp_path):
        path = write_cfg(tmp_path, "model.frame = interaction\n")
        with pytest.raises(ConfigError):
            parse_config(path)


class TestExitCodes:
    def test_missing_config_is_2(self, tmp_path, capsys):
        assert main(["evolve", "--config", str(tmp_path / "nope.cfg")]) == 2
        assert "nope.cfg" in capsys.readouterr().err

    def test_unknown_key_is_2(self, tmp_path, capsys):
        path = write_cfg(tmp_path, "nope = 1\n")
        assert main(["evolve", "--config", path]) == 2

    def test_analytic_domain_error_is_4(self, tmp_path, capsys):
        path = write_cfg(tmp_path, "model.omega_rf_mhz = 0\n")
        assert main(["analyze", "floquet", "--config", path]) == 4

    def test_simulation_error_is_3(self, tmp_path, capsys):
        # dephasing outside the rwa frame is not supported
        path = write_cfg(tmp_path, ("model.frame = lab\n"
                                    "sim.dephasing_mhz = 0.5\n"
                                    "sim.t_total_us = 1\n"
                                    "sim.dt_us = 0.001\n"))
        assert main(["evolve", "--config", path, "--out", str(tmp_path)]) == 3


class TestEvolve:
    def test_no_drive_observable_is_one(self, tmp_path, capsys):
        path = write_cfg(tmp_path, ("model.rabi_mw_mhz = 0\n"
                                    "model.mod_rf_mhz = 0\n"
                                    "sim.t_total_us = 1\n"
                                    "sim.dt_us = 0.001\n"))
        assert main(["evolve", "--config", path, "--out", str(tmp_path)]) == 0
        out = capsys.readouterr().out
        value = float(out.split("=")[1])
        assert value == pytest.approx(1.0, abs=1e-12)

    def test_pi_pulse_endpoint(self, tmp_path, capsys):
        path = write_cfg(tmp_path, ("model.mod_rf_mhz = 0\n"
                                    "sim.observable = endpoint\n"
                                    "sim.t_total_us = 1\n"))
        assert main(["evolve", "--config", path, "--out", str(tmp_path)]) == 0
        value = float(capsys.readouterr().out.split("=")[1])
        assert value == pytest.approx(0.0, abs=1e-6)

    def test_outputs_written(self, tmp_path, capsys):
        path = write_cfg(tmp_path, ("output.prefix = demo\n"
                                    "sim.t_total_us = 1\n"
                                    "sim.dt_us = 0.001\n"))
        assert main(["evolve", "--config", path, "--out", str(tmp_path)]) == 0
        traj = tmp_path / "demo_trajectory.csv"
        echo = tmp_path / "demo_trajectory.cfg"
        assert traj.is_file() and echo.is_file()
        assert traj.read_text().splitlines()[0] == "t_us,p0"
        # the echo is itself a valid, complete config
        cfg = parse_config(echo)
        assert cfg["output.prefix"] == "demo"

    def test_echo_reproduces_run(self, tmp_path, capsys):
        path = write_cfg(tmp_path, ("model.detuning_mhz = 1.5\n"
                                    "sim.t_total_us = 2\n"
                                    "sim.dt_us = 0.001\n"))
        assert main(["evolve", "--config", path, "--out", str(tmp_path)]) == 0
        first = (tmp_path / "run_trajectory.csv").read_bytes()
        echo = tmp_path / "run_trajectory.cfg"
        out2 = tmp_path / "second"
        assert main(["evolve", "--config", str(echo),
                     "--out", str(out2)]) == 0
        assert (out2 / "run_trajectory.csv").read_bytes() == first


class TestSpectrum:
    CFG = ("model.rabi_mw_mhz = 0.5\n"
           "model.mod_rf_mhz = 3\n"
           "grid.rf_min_mhz = 4\n"
           "grid.rf_max_mhz = 5\n"
           "grid.rf_points = 2\n"
           "grid.mw_min_mhz = -1\n"
           "grid.mw_max_mhz = 1\n"
           "grid.mw_points = 3\n"
           "grid.phases = 4\n"
           "sim.dt_us = 0.001\n"
           "sim.t_total_us = 2\n")

    def test_files_and_round_trip(self, tmp_path, capsys):
        path = write_cfg(tmp_path, self.CFG)
        assert main(["spectrum", "--config", path,
                     "--out", str(tmp_path)]) == 0
        csv = tmp_path / "run_spectrum.csv"
        assert csv.is_file()
        assert (tmp_path / "run_spectrum.csv.meta").is_file()
        assert (tmp_path / "run_spectrum.cfg").is_file()
        grid = read_spectrum_csv(csv)
        assert grid.signal.shape == (2, 3)

    def test_deterministic_across_runs(self, tmp_path, capsys):
        path = write_cfg(tmp_path, self.CFG)
        a_dir = tmp_path / "a"
        b_dir = tmp_path / "b"
        assert main(["spectrum", "--config", path, "--out", str(a_dir)]) == 0
        assert main(["spectrum", "--config", path, "--out", str(b_dir),
                     "--threads", "1"]) == 0
        assert ((a_dir / "run_spectrum.csv").read_bytes()
                == (b_dir / "run_spectrum.csv").read_bytes())

    def test_normalize_rows(self, tmp_path, capsys):
        path = write_cfg(tmp_path, self.CFG)
        assert main(["spectrum", "--config", path, "--out", str(tmp_path),
                     "--normalize", "rows"]) == 0
        grid = read_spectrum_csv(tmp_path / "run_spectrum.csv")
        assert np.allclose(grid.signal.mean(axis=1), 1.0, atol=1e-12)

    def test_single_cell_matches_evolve(self, tmp_path, capsys):
        common = ("model.detuning_mhz = 2\n"
                  "model.mod_rf_mhz = 3\n"
                  "model.omega_rf_mhz = 5\n"
                  "sim.dt_us = 0.001\n"
                  "sim.t_total_us = 2\n")
        spath = write_cfg(tmp_path, common + ("grid.rf_min_mhz = 5\n"
                                              "grid.rf_max_mhz = 5\n"
                                              "grid.rf_points = 1\n"
                                              "grid.mw_min_mhz = 2\n"
                                              "grid.mw_max_mhz = 2\n"
                                              "grid.mw_points = 1\n"
                                              "grid.phases = 1\n"), "s.cfg")
        assert main(["spectrum", "--config", spath,
                     "--out", str(tmp_path)]) == 0
        grid = read_spectrum_csv(tmp_path / "run_spectrum.csv")
        epath = write_cfg(tmp_path, common, "e.cfg")
        assert main(["evolve", "--config", epath,
                     "--out", str(tmp_path)]) == 0
        value = float(capsys.readouterr().out.splitlines()[-1].split("=")[1])
        assert grid.signal[0, 0] == pytest.approx(value, abs=1e-12)


class TestAnalyze:
    def test_cdt_values(self, tmp_path, capsys):
        path = write_cfg(tmp_path, ("model.mod_rf_mhz = 15.4\n"
                                    "analyze.n = 0\n"
                                    "analyze.k = 3\n"))
        assert main(["analyze", "cdt", "--config", path]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "m,omega_rf_mhz"
        vals = [float(ln.split(",")[1]) for ln in lines[1:]]
        assert vals == pytest.approx([12.8075817813, 5.57963119083,
                                      3.55915974132], rel=1e-9)

    def test_sidebands_central_amplitude(self, tmp_path, capsys):
        path = write_cfg(tmp_path, ("model.rabi_mw_mhz = 0.5\n"
                                    "model.mod_rf_mhz = 3\n"
                                    "model.omega_rf_mhz = 5\n"
                                    "analyze.max_order = 3\n"))
        assert main(["analyze", "sidebands", "--config", path]) == 0
        rows = {int(ln.split(",")[0]): float(ln.split(",")[1])
                for ln in capsys.readouterr().out.strip().splitlines()[1:]}
        assert set(rows) == set(range(-3, 4))
        assert rows[0] == pytest.approx(0.25 * 0.6711327442643627, rel=1e-9)

    def test_lines_positions(self, tmp_path, capsys):
        path = write_cfg(tmp_path, ("model.mod_rf_mhz = 3\n"
                                    "model.omega_rf_mhz = 5\n"
                                    "analyze.max_order = 5\n"))
        assert main(["analyze", "lines", "--config", path]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "n,delta_mhz,effective_rabi_mhz"
        deltas = [float(ln.split(",")[1]) for ln in lines[1:]]
        assert deltas == pytest.approx([-10.0, -5.0, 0.0, 5.0, 10.0])

    def test_lineshape_normalized(self, tmp_path, capsys):
        path = write_cfg(tmp_path, ("model.mod_rf_mhz = 6\n"
                                    "analyze.hwhm_mhz = 0.5\n"
                                    "analyze.grid_points = 2001\n"))
        assert main(["analyze", "lineshape", "--config", path]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "delta_mhz,density"
        data = np.array([[float(v) for v in ln.split(",")]
                         for ln in lines[1:]])
        assert np.trapezoid(data[:, 1], data[:, 0]) == pytest.approx(1.0,
                                                                 abs=1e-6)

    def test_floquet_symmetric_pair(self, tmp_path, capsys):
        path = write_cfg(tmp_path, ("model.detuning_mhz = 0\n"
                                    "model.rabi_mw_mhz = 0.5\n"
                                    "model.mod_rf_mhz = 3\n"
                                    "model.omega_rf_mhz = 5\n"))
        assert main(["analyze", "floquet", "--config", path]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "index,quasienergy_mhz"
        qs = [float(ln.split(",")[1]) for ln in lines[1:]]
        assert len(qs) == 2
        # gap = Omega_MW |J_0(1.2)| to within 2%
        gap = abs(qs[1] - qs[0])
        assert gap == pytest.approx(0.5 * 0.6711327442643627, rel=0.02)
