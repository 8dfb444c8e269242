"""Config parsing, experiment runners, manifests, and the determinism contract."""

import csv
import hashlib
import json
import math

import numpy as np
import pytest

from finiteqm.errors import ConfigError
from finiteqm.experiments import ExperimentConfig, atomic_write_text, parse_config, run


def write_config(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def read_csv_rows(path):
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


CCR_CFG = """\
# ladder realization at dim 4
experiment = ccr
scheme = ladder
dim = 4
hbar = 1
"""


class TestParseConfig:
    def test_parses_keys_and_defaults(self, tmp_path):
        cfg = parse_config(write_config(tmp_path, CCR_CFG))
        assert cfg.experiment == "ccr"
        assert cfg.parameters["dim"] == "4"
        assert cfg.seed == 0
        assert cfg.format == "csv"

    def test_cli_overrides_win(self, tmp_path):
        path = write_config(tmp_path, CCR_CFG + "seed = 5\nformat = csv\n")
        cfg = parse_config(path, output_dir=tmp_path / "out", seed=9, fmt="json")
        assert cfg.seed == 9
        assert cfg.format == "json"
        assert cfg.output_dir == tmp_path / "out"

    def test_missing_experiment(self, tmp_path):
        with pytest.raises(ConfigError, match="experiment"):
            parse_config(write_config(tmp_path, "dim = 4\n"))

    def test_unknown_experiment(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown experiment"):
            parse_config(write_config(tmp_path, "experiment = teleport\n"))

    def test_malformed_line_reports_line_number(self, tmp_path):
        text = "experiment = ccr\nscheme ladder\n"
        with pytest.raises(ConfigError, match="line 2"):
            parse_config(write_config(tmp_path, text))

    def test_duplicate_key_reports_both_lines(self, tmp_path):
        text = "experiment = ccr\ndim = 4\ndim = 8\n"
        with pytest.raises(ConfigError, match="line 3.*line 2"):
            parse_config(write_config(tmp_path, text))

    def test_bad_seed(self, tmp_path):
        with pytest.raises(ConfigError, match="seed"):
            parse_config(write_config(tmp_path, CCR_CFG + "seed = soon\n"))

    def test_bad_format(self, tmp_path):
        with pytest.raises(ConfigError, match="format"):
            parse_config(write_config(tmp_path, CCR_CFG + "format = yaml\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            parse_config(tmp_path / "absent.cfg")


class TestCcrExperiment:
    def test_ladder_dim4_residuals_in_csv(self, tmp_path):
        cfg = parse_config(write_config(tmp_path, CCR_CFG), output_dir=tmp_path / "out")
        manifest = run(cfg)
        rows = read_csv_rows(tmp_path / "out" / "ccr_residuals.csv")
        got = [float(r["residual_re"]) for r in rows]
        assert got == pytest.approx([1.0, 1.0, 1.0, -3.0], abs=1e-12)
        summary = read_csv_rows(tmp_path / "out" / "ccr_summary.csv")[0]
        assert float(summary["deviation"]) == pytest.approx(4.0, abs=1e-12)
        assert float(summary["lower_bound"]) == pytest.approx(2.0, abs=1e-15)
        assert {name for name, _ in manifest.outputs} == {"ccr_residuals.csv", "ccr_summary.csv"}

    def test_grid_scheme_runs(self, tmp_path):
        text = "experiment = ccr\nscheme = grid\ndim = 8\nhalf_width = 2.0\n"
        cfg = parse_config(write_config(tmp_path, text), output_dir=tmp_path / "out")
        run(cfg)
        summary = read_csv_rows(tmp_path / "out" / "ccr_summary.csv")[0]
        assert abs(float(summary["trace_re"])) <= 1e-10

    def test_json_format(self, tmp_path):
        cfg = parse_config(write_config(tmp_path, CCR_CFG),
                           output_dir=tmp_path / "out", fmt="json")
        run(cfg)
        doc = json.loads((tmp_path / "out" / "ccr_result.json").read_text())
        assert doc["dim"] == 4
        assert [r["re"] for r in doc["diagonal_residuals"]] == pytest.approx(
            [1.0, 1.0, 1.0, -3.0], abs=1e-12)

    def test_grid_dim_too_small_is_config_error(self, tmp_path):
        text = "experiment = ccr\nscheme = grid\ndim = 2\n"
        cfg = parse_config(write_config(tmp_path, text), output_dir=tmp_path / "out")
        with pytest.raises(ConfigError):
            run(cfg)

    def test_unknown_parameter_rejected(self, tmp_path):
        cfg = parse_config(write_config(tmp_path, CCR_CFG + "flux = 3\n"),
                           output_dir=tmp_path / "out")
        with pytest.raises(ConfigError, match="flux"):
            run(cfg)


class TestBoxExperiment:
    def test_levels_and_samples(self, tmp_path):
        text = "experiment = box\nwidth = pi\ncutoff = 5\nsamples = 21\n"
        cfg = parse_config(write_config(tmp_path, text), output_dir=tmp_path / "out")
        run(cfg)
        rows = read_csv_rows(tmp_path / "out" / "box_levels.csv")
        energies = [float(r["energy"]) for r in rows]
        assert energies == pytest.approx([0.5 * n * n for n in range(1, 6)], rel=1e-15)
        samples = read_csv_rows(tmp_path / "out" / "box_wavefunction.csv")
        assert float(samples[0]["psi_re"]) == 0.0
        assert float(samples[-1]["psi_re"]) == 0.0

    def test_level_out_of_range(self, tmp_path):
        text = "experiment = box\ncutoff = 3\nlevel = 7\n"
        cfg = parse_config(write_config(tmp_path, text), output_dir=tmp_path / "out")
        with pytest.raises(ConfigError, match="level"):
            run(cfg)


class TestPropagateExperiment:
    def test_convergence_scan_rows(self, tmp_path):
        text = ("experiment = propagate\nmode = imaginary_time\npotential = harmonic\n"
                "omega = 1\nx_start = 0\nx_end = 0\nduration = 1\nslices = 4,8,16,32\n"
                "grid_half_width = 8\ngrid_points = 513\n")
        cfg = parse_config(write_config(tmp_path, text), output_dir=tmp_path / "out")
        run(cfg)
        rows = read_csv_rows(tmp_path / "out" / "propagate_result.csv")
        assert [int(r["K"]) for r in rows] == [4, 8, 16, 32]
        errors = [float(r["error"]) for r in rows]
        assert np.all(np.diff(errors) < 0)

    def test_single_amplitude_json(self, tmp_path):
        text = ("experiment = propagate\nmode = real_time\npotential = free\n"
                "x_start = 0\nx_end = 0\nduration = 1\nslices = 1\n")
        cfg = parse_config(write_config(tmp_path, text),
                           output_dir=tmp_path / "out", fmt="json")
        run(cfg)
        doc = json.loads((tmp_path / "out" / "propagate_result.json").read_text())
        assert doc[0]["re"] == pytest.approx(0.2820947917738782, abs=1e-15)
        assert doc[0]["im"] == pytest.approx(-0.2820947917738782, abs=1e-15)

    def test_missing_required_key(self, tmp_path):
        text = "experiment = propagate\nx_start = 0\nx_end = 0\nslices = 2\n"
        cfg = parse_config(write_config(tmp_path, text), output_dir=tmp_path / "out")
        with pytest.raises(ConfigError, match="duration"):
            run(cfg)

    def test_failed_run_writes_nothing(self, tmp_path):
        out = tmp_path / "out"
        text = "experiment = propagate\nx_start = 0\nx_end = 0\nslices = 2\n"
        cfg = parse_config(write_config(tmp_path, text), output_dir=out)
        with pytest.raises(ConfigError):
            run(cfg)
        assert not out.exists() or list(out.iterdir()) == []


class TestGaussianExperiment:
    def test_declared_exact_pi_gives_flat_scan(self, tmp_path):
        text = "experiment = gaussian\na = pi\nn_max = 100\n"
        cfg = parse_config(write_config(tmp_path, text), output_dir=tmp_path / "out")
        run(cfg)
        rows = read_csv_rows(tmp_path / "out" / "gaussian_norm.csv")
        assert len(rows) == 100
        assert all(float(r["log_f"]) == 0.0 for r in rows)
        tri = read_csv_rows(tmp_path / "out" / "gaussian_trichotomy.csv")[0]
        assert tri["classification"] == "constant_1"

    def test_off_critical_scan_and_precision(self, tmp_path):
        text = "experiment = gaussian\na = 4\nn_max = 10\nepsilon = 0.01\n"
        cfg = parse_config(write_config(tmp_path, text), output_dir=tmp_path / "out")
        run(cfg)
        rows = read_csv_rows(tmp_path / "out" / "gaussian_norm.csv")
        slope = float(rows[1]["log_f"]) - float(rows[0]["log_f"])
        assert slope == pytest.approx(1.5 * math.log(math.pi / 4.0), rel=1e-12)
        prec = read_csv_rows(tmp_path / "out" / "gaussian_precision.csv")
        assert [int(r["N"]) for r in prec] == [10, 20, 40, 80, 160]
        assert all(int(r["pi_digits"]) >= 1 for r in prec)


class TestManifestAndDeterminism:
    def test_digests_recomputable(self, tmp_path):
        cfg = parse_config(write_config(tmp_path, CCR_CFG), output_dir=tmp_path / "out")
        manifest = run(cfg)
        doc = json.loads(manifest.path.read_text())
        assert doc["experiment"] == "ccr"
        assert doc["version"]
        for entry in doc["outputs"]:
            data = (tmp_path / "out" / entry["file"]).read_bytes()
            assert hashlib.sha256(data).hexdigest() == entry["sha256"]

    def test_reruns_are_byte_identical(self, tmp_path):
        text = ("experiment = propagate\nmode = imaginary_time\npotential = harmonic\n"
                "omega = 1\nx_start = 0.1\nx_end = -0.2\nduration = 1\nslices = 8\n"
                "grid_half_width = 8\ngrid_points = 257\n")
        outs = []
        for name in ("a", "b"):
            cfg = parse_config(write_config(tmp_path, text, name + ".cfg"),
                               output_dir=tmp_path / name, seed=3)
            manifest = run(cfg)
            outs.append((manifest, (tmp_path / name / "propagate_result.csv").read_bytes()))
        assert outs[0][0].outputs == outs[1][0].outputs
        assert outs[0][1] == outs[1][1]

    def test_no_temp_files_left_behind(self, tmp_path):
        cfg = parse_config(write_config(tmp_path, CCR_CFG), output_dir=tmp_path / "out")
        run(cfg)
        leftovers = [p for p in (tmp_path / "out").iterdir() if p.suffix == ".tmp"]
        assert leftovers == []

    def test_atomic_write_creates_parents(self, tmp_path):
        target = tmp_path / "deep" / "nested" / "file.csv"
        atomic_write_text(target, "x,y\n")
        assert target.read_text() == "x,y\n"

    def test_float_formatting_round_trips(self, tmp_path):
        cfg = parse_config(write_config(tmp_path, CCR_CFG), output_dir=tmp_path / "out")
        run(cfg)
        summary = read_csv_rows(tmp_path / "out" / "ccr_summary.csv")[0]
        assert float(summary["lower_bound"]) == 2.0
