"""Pipeline and CLI: file inventory, metadata headers, determinism, exit codes.

Runs use a narrow analysis window and a reduced quadrature so each swap
build takes about a second; physics-accuracy checks live in the module
test files and the acceptance suite.
"""

import json
import re

import numpy as np
import pytest

from sfgswap import cli
from sfgswap import pipeline as pl
from sfgswap import quantum_state as qs
from sfgswap.config import SimConfig

FLOAT_RE = re.compile(r"-?\d\.\d{15}e[+-]\d+")


def tiny_config(tmp_path, **kwargs):
    base = dict(
        analysis_half_width_rad_per_fs=0.08,
        integration_points=60,
        n_bins=4,
        points_per_bin=3,
        output_dir=str(tmp_path),
    )
    base.update(kwargs)
    return SimConfig(**base)


def read_header(path):
    meta = {}
    for line in path.read_text().splitlines():
        if not line.startswith("#"):
            break
        key, _, value = line[1:].partition("=")
        meta[key.strip()] = value.strip()
    return meta


def data_lines(path):
    lines = [l for l in path.read_text().splitlines() if l and not l.startswith("#")]
    return lines[0].split(","), lines[1:]


class TestToyRun:
    def test_rows_match_closed_forms(self, tmp_path):
        config = tiny_config(tmp_path)
        rows, files = pl.run_toy(config, n_modes=[2, 5], etas=[0.1, 1.0])
        assert len(rows) == 8  # 2 variants x 2 n x 2 eta
        for variant, n, eta, neg in rows:
            expected = qs.toy_state_negativity(n, eta, coherent=(variant == "coherent"))
            assert neg == pytest.approx(expected, abs=1e-14)
        header, lines = data_lines(files[0])
        assert header == ["model", "n_modes", "eta", "negativity"]
        assert len(lines) == 8

    def test_bad_toy_arguments_rejected(self, tmp_path):
        config = tiny_config(tmp_path)
        from sfgswap.errors import ConfigurationError

        with pytest.raises(ConfigurationError):
            pl.run_toy(config, n_modes=[1])
        with pytest.raises(ConfigurationError):
            pl.run_toy(config, etas=[1.5])


class TestSourceRun:
    def test_pair_probability_and_calibration(self, tmp_path):
        config = tiny_config(tmp_path)
        csv_path, json_path = pl.run_source_jsi(config, calibrate=True)
        report = json.loads(json_path.read_text())
        assert report["pair_probability"] == pytest.approx(0.1009, rel=2e-3)
        assert report["calibrated_p_avg_w_for_xi2_0p1"] == pytest.approx(1.3674, rel=2e-3)
        assert report["peak_omega_i_rad_per_fs"] == pytest.approx(1.561, abs=0.05)
        assert report["peak_omega_s_rad_per_fs"] == pytest.approx(3.090, abs=0.05)
        header, lines = data_lines(csv_path)
        assert header == ["omega_i_rad_per_fs", "omega_s_rad_per_fs", "jsi"]
        assert len(lines) > 100
        assert FLOAT_RE.match(lines[0].split(",")[0])

    def test_dark_pump_warns_and_writes_zero_intensity(self, tmp_path):
        config = tiny_config(tmp_path, p_avg_w=0.0)
        with pytest.warns(UserWarning, match="p_avg_w = 0"):
            csv_path, json_path = pl.run_source_jsi(config)
        report = json.loads(json_path.read_text())
        assert report["pair_probability"] == 0.0
        _, lines = data_lines(csv_path)
        assert all(float(line.split(",")[2]) == 0.0 for line in lines)


@pytest.fixture(scope="module")
def swap_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("swap")
    config = tiny_config(tmp)
    summary, files = pl.run_swap(config, sweep=[0.5], export_amplitude=True)
    return config, summary, files, tmp


class TestSwapRun:

    def test_file_inventory(self, swap_run):
        config, summary, files, tmp = swap_run
        names = sorted(p.name for p in files)
        assert names == [
            "conditional_jsi_bin0.csv",
            "conditional_jsi_bin1.csv",
            "conditional_jsi_bin2.csv",
            "conditional_jsi_bin3.csv",
            "herald_spectrum.csv",
            "metrics.json",
            "psi.csv",
            "psi.json",
            "sweep_summary.csv",
        ]
        assert all(p.exists() for p in files)
        assert (tmp / "swap_L0.5mm" / "metrics.json").exists()

    def test_metadata_headers(self, swap_run):
        config, summary, files, tmp = swap_run
        meta = read_header(tmp / "swap_L0.5mm" / "herald_spectrum.csv")
        assert meta["schema_version"] == "1"
        assert meta["config_hash"] == config.config_hash()
        assert "rad/fs" in meta["units"]
        assert "grid_sfg" in meta
        payload = json.loads((tmp / "swap_L0.5mm" / "metrics.json").read_text())
        assert payload["config_hash"] == config.config_hash()
        assert payload["schema_version"] == 1

    def test_bin_probabilities_partition_xi2(self, swap_run):
        config, summary, files, tmp = swap_run
        payload = summary[0]
        total = sum(b["probability"] for b in payload["bins"])
        assert total == pytest.approx(payload["xi2"], rel=1e-10)
        assert payload["unresolved"]["probability"] == pytest.approx(payload["xi2"], rel=1e-10)

    def test_metric_ranges(self, swap_run):
        config, summary, files, tmp = swap_run
        payload = summary[0]
        for b in payload["bins"]:
            assert 0.0 < b["purity"] <= 1.0 + 1e-12
            assert b["negativity"] >= 0.0
            assert b["compression_residual"] < 1e-3
        assert payload["averages"]["purity"] > payload["unresolved"]["purity"]
        assert payload["averages"]["negativity"] > payload["unresolved"]["negativity"]

    def test_amplitude_export_sidecar(self, swap_run):
        config, summary, files, tmp = swap_run
        sidecar = json.loads((tmp / "swap_L0.5mm" / "psi.json").read_text())
        assert sidecar["xi2"] == pytest.approx(summary[0]["xi2"], rel=1e-12)
        assert sidecar["quadrature_points"] == config.integration_points
        _, lines = data_lines(tmp / "swap_L0.5mm" / "psi.csv")
        assert len(lines) == sidecar["rows"] > 0

    def test_sweep_summary_row_per_length(self, swap_run):
        config, summary, files, tmp = swap_run
        header, lines = data_lines(tmp / "sweep_summary.csv")
        assert header[0] == "sfg_length_mm"
        assert len(lines) == 1
        fields = lines[0].split(",")
        assert float(fields[0]) == 0.5
        assert all(FLOAT_RE.match(f) for f in fields)


class TestDeterminism:
    def test_outputs_byte_identical_across_thread_budgets(self, tmp_path):
        runs = {}
        for threads in (1, 3):
            out = tmp_path / f"t{threads}"
            config = tiny_config(out, threads=threads)
            pl.run_swap(config, sweep=[0.5], export_amplitude=True)
            runs[threads] = {
                p.relative_to(out): p.read_bytes()
                for p in sorted(out.rglob("*"))
                if p.is_file()
            }
        assert runs[1].keys() == runs[3].keys()
        for name in runs[1]:
            assert runs[1][name] == runs[3][name], f"{name} differs between thread budgets"


class TestRatesRun:
    def test_rates_rows(self, tmp_path):
        config = tiny_config(tmp_path)
        rows, files = pl.run_rates(config, sweep=[0.25, 0.5])
        assert [r[0] for r in rows] == [0.25, 0.5]
        for _, xi2, herald, false, multi, std in rows:
            assert 0 < xi2 < 1
            assert herald == pytest.approx(xi2 * 1e9, rel=1e-12)
            assert false == pytest.approx(xi2**2 * 1e9, rel=1e-12)
            assert multi == pytest.approx((1 - config.gamma) * xi2, rel=1e-12)
            assert np.isfinite(std) and std > 0
        assert rows[0][1] < rows[1][1]  # longer upconverter, higher probability


class TestCli:
    def test_validate_passes(self, capsys):
        rc = cli.main(["validate"])
        out = capsys.readouterr().out
        assert rc == 0
        assert out.count("PASS") == 6
        assert "FAIL" not in out

    def test_toy_subcommand_writes_files(self, tmp_path, capsys):
        rc = cli.main(
            ["--output-dir", str(tmp_path), "toy", "--n-modes", "2,3", "--eta", "0.5"]
        )
        assert rc == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert out == [str(tmp_path / "toy_negativity.csv")]

    def test_swap_subcommand_with_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "analysis_half_width_rad_per_fs = 0.08\n"
            "integration_points = 60\n"
            "n_bins = 4\n"
        )
        rc = cli.main(
            [
                "--config",
                str(cfg),
                "--output-dir",
                str(tmp_path / "out"),
                "swap",
                "--sfg-length-mm",
                "0.5",
            ]
        )
        assert rc == 0
        printed = capsys.readouterr().out.strip().splitlines()
        assert str(tmp_path / "out" / "sweep_summary.csv") in printed
        assert (tmp_path / "out" / "swap_L0.5mm" / "metrics.json").exists()

    def test_set_overrides_reach_the_run(self, tmp_path):
        rc = cli.main(
            [
                "--output-dir",
                str(tmp_path),
                "--set",
                "p_avg_w=0.69",
                "source-jsi",
            ]
        )
        assert rc == 0
        report = json.loads((tmp_path / "source_report.json").read_text())
        assert report["p_avg_w"] == 0.69

    def test_unknown_key_exits_2(self, tmp_path, capsys):
        rc = cli.main(["--output-dir", str(tmp_path), "--set", "bogus=1", "toy"])
        assert rc == 2
        assert "unknown configuration key" in capsys.readouterr().err

    def test_missing_config_file_exits_2(self, tmp_path, capsys):
        rc = cli.main(["--config", str(tmp_path / "absent.cfg"), "toy"])
        assert rc == 2
        assert "error" in capsys.readouterr().err

    def test_malformed_set_exits_2(self, capsys):
        rc = cli.main(["--set", "p_avg_w", "toy"])
        assert rc == 2
        assert "KEY=VALUE" in capsys.readouterr().err
