import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from oamboost.cli import main

SRC = str(Path(__file__).resolve().parents[1] / "src")


def read_csv_rows(path):
    lines = Path(path).read_text(encoding="utf-8").strip().splitlines()
    header = lines[0].split(",")
    return header, [line.split(",") for line in lines[1:]]


class TestSpectrumCommand:
    def test_rest_frame_antidiagonal(self, tmp_path, capsys):
        assert main(["spectrum", "--gamma", "1", "--half-width", "3", "--out", str(tmp_path)]) == 0
        header, rows = read_csv_rows(tmp_path / "spectrum_g1.csv")
        assert header == ["l_a", "l_b", "value"]
        for la, lb, value in rows:
            expected = 1.0 if int(la) == -int(lb) else 0.0
            assert float(value) == expected
        assert (tmp_path / "spectrum_g1.meta.json").exists()
        header, rows = read_csv_rows(tmp_path / "conditional_g1_la0.csv")
        assert header == ["l_b", "value"]
        assert len(rows) == 7

    def test_broadened_spectrum(self, tmp_path):
        assert main(["spectrum", "--gamma", "10", "--half-width", "20", "--out", str(tmp_path)]) == 0
        _, rows = read_csv_rows(tmp_path / "spectrum_g10.csv")
        values = {(int(la), int(lb)): float(v) for la, lb, v in rows}
        q = 9.0 / 11.0
        assert values[(0, 0)] == 1.0
        assert values[(0, 2)] == pytest.approx(q**2, rel=1e-12)
        assert values[(0, 1)] == 0.0
        assert values[(5, -1)] == pytest.approx(q**4, rel=1e-12)

    def test_json_format(self, tmp_path):
        assert main(
            ["spectrum", "--gamma", "2", "--half-width", "2", "--format", "json", "--out", str(tmp_path)]
        ) == 0
        payload = json.loads((tmp_path / "spectrum_g2.json").read_text())
        assert payload["gamma"] == 2.0
        assert payload["window"] == {"a": [-2, 2], "b": [-2, 2]}
        cond = json.loads((tmp_path / "conditional_g2_la0.json").read_text())
        assert cond["l_a"] == 0
        assert cond["values"][2] == 1.0

    def test_invalid_gamma_exits_2(self, tmp_path, capsys):
        assert main(["spectrum", "--gamma", "0.5", "--out", str(tmp_path)]) == 2
        err = capsys.readouterr().err
        assert "gamma must be >= 1" in err
        assert not list(tmp_path.iterdir())

    def test_missing_gamma_exits_2(self, tmp_path, capsys):
        assert main(["spectrum", "--out", str(tmp_path)]) == 2
        assert "--gamma is required" in capsys.readouterr().err


class TestSweepCommand:
    def test_monotone_mode_count(self, tmp_path):
        gammas = ",".join(str(g) for g in range(1, 21))
        assert main(["sweep", "--gamma", gammas, "--out", str(tmp_path)]) == 0
        header, rows = read_csv_rows(tmp_path / "sweep.csv")
        assert header == ["gamma", "omega_closed", "m", "eta", "beta"]
        assert len(rows) == 20
        omegas = [float(row[1]) for row in rows]
        assert all(a < b for a, b in zip(omegas, omegas[1:]))

    def test_single_rest_frame_row(self, tmp_path):
        assert main(["sweep", "--gamma", "1", "--out", str(tmp_path)]) == 0
        _, rows = read_csv_rows(tmp_path / "sweep.csv")
        assert [float(v) for v in rows[0]] == [1.0, 1.0, 1.0, 0.0, 0.0]

    def test_empty_list_exits_2(self, tmp_path, capsys):
        assert main(["sweep", "--gamma", "", "--out", str(tmp_path)]) == 2
        assert "at least one" in capsys.readouterr().err


class TestHologramCommand:
    def test_pgm_with_naming_convention(self, tmp_path):
        assert main(
            ["hologram", "--l", "1", "--gamma", "10", "--width", "32", "--height", "32", "--out", str(tmp_path)]
        ) == 0
        data = (tmp_path / "holo_l1_g10_32x32.pgm").read_bytes()
        assert data.startswith(b"P5\n32 32\n255\n")
        assert len(data) == len(b"P5\n32 32\n255\n") + 32 * 32

    def test_zero_charge_uniform(self, tmp_path):
        assert main(
            ["hologram", "--l", "0", "--gamma", "3", "--width", "8", "--height", "8", "--out", str(tmp_path)]
        ) == 0
        data = (tmp_path / "holo_l0_g3_8x8.pgm").read_bytes()
        assert set(data[len(b"P5\n8 8\n255\n") :]) == {0}

    def test_odd_size_center_pixel(self, tmp_path):
        assert main(
            ["hologram", "--l", "1", "--gamma", "2", "--width", "5", "--height", "5",
             "--format", "csv", "--out", str(tmp_path)]
        ) == 0
        rows = (tmp_path / "holo_l1_g2_5x5.csv").read_text().strip().splitlines()
        center = float(rows[2].split(",")[2])
        assert center == 0.0

    def test_invalid_gamma(self, tmp_path, capsys):
        assert main(["hologram", "--l", "1", "--gamma", "0.2", "--out", str(tmp_path)]) == 2
        assert "gamma must be >= 1" in capsys.readouterr().err


class TestSimulateAndEstimateCommands:
    def run_simulate(self, tmp_path, seed="7"):
        return main(
            [
                "simulate", "--gamma", "5", "--half-width", "15", "--half-width-a", "0",
                "--pair-rate", "5000", "--accidental-rate", "2", "--seed", seed,
                "--out", str(tmp_path),
            ]
        )

    def test_simulate_writes_counts_and_sidecar(self, tmp_path):
        assert self.run_simulate(tmp_path) == 0
        header, rows = read_csv_rows(tmp_path / "counts_g5_seed7.csv")
        assert header == ["l_a", "l_b", "count"]
        assert len(rows) == 31
        meta = json.loads((tmp_path / "counts_g5_seed7.meta.json").read_text())
        assert meta["gamma_encoded"] == 5.0
        assert meta["model"]["pair_rate"] == 5000.0
        assert meta["windows"] == {"a": [0, 0], "b": [-15, 15]}

    def test_simulate_deterministic(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        assert self.run_simulate(a) == 0
        assert self.run_simulate(b) == 0
        assert (a / "counts_g5_seed7.csv").read_bytes() == (b / "counts_g5_seed7.csv").read_bytes()
        assert (a / "counts_g5_seed7.meta.json").read_bytes() == (
            b / "counts_g5_seed7.meta.json"
        ).read_bytes()

    def test_estimate_from_counts(self, tmp_path):
        assert self.run_simulate(tmp_path) == 0
        assert main(
            [
                "estimate", "--counts", str(tmp_path / "counts_g5_seed7.csv"),
                "--subtract", "both", "--out", str(tmp_path),
            ]
        ) == 0
        for method in ("m_sum", "least_squares"):
            payload = json.loads((tmp_path / f"fit_{method}.json").read_text())
            assert set(payload) == {"gamma_meas", "method", "residual", "eta", "beta", "window", "l_a"}
            assert payload["method"] == method
            assert payload["gamma_meas"] == pytest.approx(5.0, rel=0.1)
            assert payload["window"] == [-15, 15]

    def test_estimate_missing_file(self, tmp_path, capsys):
        assert main(["estimate", "--counts", str(tmp_path / "nope.csv")]) == 2
        assert "does not exist" in capsys.readouterr().err

    def test_estimate_l_a_outside_window(self, tmp_path, capsys):
        assert self.run_simulate(tmp_path) == 0
        assert main(
            ["estimate", "--counts", str(tmp_path / "counts_g5_seed7.csv"), "--l-a", "3"]
        ) == 2
        assert "--l-a" in capsys.readouterr().err


class TestExperimentCommand:
    def test_noiseless_recovery(self, tmp_path):
        assert main(
            [
                "experiment", "--gamma", "1,2,5,10", "--noiseless",
                "--half-width", "200", "--out", str(tmp_path),
            ]
        ) == 0
        summary = json.loads((tmp_path / "experiment_summary.json").read_text())
        for row in summary["results"]:
            encoded = row["gamma_encoded"]
            assert row["gamma_meas_m_sum"] == pytest.approx(encoded, abs=1e-4)
            assert row["gamma_meas_least_squares"] == pytest.approx(encoded, abs=1e-4)
            assert np.cosh(row["eta"]) == pytest.approx(row["gamma_meas_least_squares"], rel=1e-10)

    def test_noiseless_window_limited_at_gamma_twenty(self, tmp_path):
        assert main(
            [
                "experiment", "--gamma", "20", "--noiseless",
                "--half-width", "20", "--out", str(tmp_path),
            ]
        ) == 0
        summary = json.loads((tmp_path / "experiment_summary.json").read_text())
        row = summary["results"][0]
        assert row["gamma_meas_m_sum"] < 20.0 - 1.0
        assert row["gamma_meas_least_squares"] == pytest.approx(20.0, abs=1e-4)

    def test_noisy_run_and_batch(self, tmp_path):
        assert main(
            [
                "experiment", "--gamma", "2,5", "--seed", "42", "--runs", "3",
                "--half-width", "40", "--out", str(tmp_path),
            ]
        ) == 0
        header, rows = read_csv_rows(tmp_path / "experiment_batch.csv")
        assert header == ["seed", "gamma_encoded", "gamma_meas", "method", "residual"]
        assert len(rows) == 2 * 3 * 2
        seeds = {int(row[0]) for row in rows}
        assert seeds == {42, 43, 44}
        summary = json.loads((tmp_path / "experiment_summary.json").read_text())
        for row in summary["results"]:
            assert row["gamma_meas_least_squares"] == pytest.approx(row["gamma_encoded"], rel=0.05)
        assert summary["parameters"]["subtract"] == "both"

    def test_default_gamma_ladder(self, tmp_path):
        assert main(["experiment", "--out", str(tmp_path)]) == 0
        summary = json.loads((tmp_path / "experiment_summary.json").read_text())
        assert [row["gamma_encoded"] for row in summary["results"]] == [1.0, 2.0, 5.0, 10.0, 20.0]
        assert summary["parameters"]["seed"] == 42
        for row in summary["results"]:
            if row["gamma_encoded"] <= 10.0:
                assert row["gamma_meas_least_squares"] == pytest.approx(
                    row["gamma_encoded"], rel=0.05
                )

    def test_deterministic_outputs(self, tmp_path):
        args = ["experiment", "--gamma", "5", "--seed", "9", "--half-width", "30"]
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        for name in ("experiment_batch.csv", "experiment_summary.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_invalid_gamma_aborts_without_outputs(self, tmp_path, capsys):
        assert main(["experiment", "--gamma", "2,0.5", "--out", str(tmp_path)]) == 2
        assert "gamma must be >= 1" in capsys.readouterr().err
        assert not list(tmp_path.iterdir())


class TestConfigFile:
    def test_config_supplies_values(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("gamma = 3\nhalf-width = 4\nout = {}\n".format(tmp_path), encoding="utf-8")
        assert main(["spectrum", "--config", str(cfg)]) == 0
        assert (tmp_path / "spectrum_g3.csv").exists()

    def test_flags_override_config(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(f"gamma = 3\nout = {tmp_path}\n", encoding="utf-8")
        assert main(["spectrum", "--config", str(cfg), "--gamma", "7"]) == 0
        assert (tmp_path / "spectrum_g7.csv").exists()
        assert not (tmp_path / "spectrum_g3.csv").exists()

    def test_unknown_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("gamma = 3\nbogus = 1\n", encoding="utf-8")
        assert main(["spectrum", "--config", str(cfg), "--out", str(tmp_path)]) == 2
        assert "unknown config key" in capsys.readouterr().err

    def test_comments_and_blanks(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            f"# experiment manifest\n\ngamma = 2  # encoded factor\nout = {tmp_path}\n",
            encoding="utf-8",
        )
        assert main(["sweep", "--config", str(cfg)]) == 0
        assert (tmp_path / "sweep.csv").exists()


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "oamboost", "sweep", "--gamma", "1,2", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
        env={"PYTHONPATH": SRC, "PATH": "/usr/bin:/bin"},
    )
    assert proc.returncode == 0
    assert (tmp_path / "sweep.csv").exists()


def test_usage_error_from_argparse():
    with pytest.raises(SystemExit) as exc:
        main(["bogus-command"])
    assert exc.value.code == 2
