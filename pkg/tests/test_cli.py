import csv
import io
import json

import pytest

from sarfeas.cli import main
from sarfeas.config import load_config, parse_config
from sarfeas.errors import ConfigError


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def data_rows(text):
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def write_config(tmp_path, raw, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(raw))
    return path


class TestConfig:
    def test_bundled_fixture_loads(self, scenario):
        assert set(scenario.sar) == {"X", "Ku"}
        assert scenario.ship.area_m2 == 48
        assert scenario.detection.p_fa_pixel == 1e-14
        assert len(scenario.sweep.values()) == 33
        assert scenario.sweep.values()[0] == 0.1 and scenario.sweep.values()[-1] == 0.5
        assert scenario.options.sigma0_bracket == (0.01, 100.0)

    def test_unknown_key_rejected(self, raw_config):
        raw_config["ship"]["colour"] = "grey"
        with pytest.raises(ConfigError, match="ship"):
            parse_config(raw_config)
        del raw_config["ship"]["colour"]
        raw_config["extra"] = 1
        with pytest.raises(ConfigError):
            parse_config(raw_config)

    def test_detection_exclusive(self, raw_config):
        raw_config["detection"]["p_fa_overall"] = 1e-5
        with pytest.raises(ConfigError):
            parse_config(raw_config)

    def test_semantic_error_becomes_config_error(self, raw_config):
        raw_config["ship"]["width_m"] = 20
        with pytest.raises(ConfigError):
            parse_config(raw_config)

    def test_unknown_band(self, scenario):
        with pytest.raises(ConfigError):
            scenario.band("L")

    def test_digest_stable(self, raw_config, fixture_path):
        assert parse_config(raw_config).digest == load_config(fixture_path).digest

    def test_bad_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(p)


class TestGeometryCommand:
    def test_text_report(self, capsys, fixture_path):
        code, out, _ = run(capsys, "geometry", fixture_path)
        assert code == 0
        assert "r_slant_max_m" in out and "377558" in out

    def test_csv(self, capsys, fixture_path):
        code, out, _ = run(capsys, "geometry", fixture_path, "--format", "csv")
        rows = {r["quantity"]: r for r in data_rows(out)}
        assert abs(float(rows["r_slant_max_m"]["derived"]) - 377_558) < 0.002 * 377_558
        assert float(rows["grazing_far_deg"]["reference"]) == 67.3451

    def test_no_intersection_exit_3(self, capsys, tmp_path, raw_config):
        raw_config["geometry"]["look_angle_deg"] = 89.9
        code, _, err = run(capsys, "geometry", write_config(tmp_path, raw_config))
        assert code == 3 and "no-intersection" in err

    def test_schema_error_exit_2(self, capsys, tmp_path, raw_config):
        raw_config["geometry"]["altitude_m"] = -1
        code, _, err = run(capsys, "geometry", write_config(tmp_path, raw_config))
        assert code == 2 and "altitude_m" in err

    def test_missing_file_exit_2(self, capsys, tmp_path):
        code, _, _ = run(capsys, "geometry", tmp_path / "nope.json")
        assert code == 2


class TestValidateCommand:
    def test_small_sample_runs(self, capsys, fixture_path):
        code, out, _ = run(capsys, "validate", fixture_path, "--nmc", 100, "--seed", 1)
        assert code == 0
        rows = data_rows(out)
        assert len(rows) == 3 * 26
        assert list(rows[0]) == ["beta", "mean_snr_db", "pd_theory", "pd_mc", "std_err", "rel_err_pct"]
        assert "max rel_err_pct beta=2" in out

    def test_byte_identical(self, tmp_path, fixture_path, monkeypatch):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        monkeypatch.setenv("SARFEAS_THREADS", "1")
        main(["validate", str(fixture_path), "--nmc", "3000", "--seed", "4", "--betas", "2", "--out", str(a)])
        monkeypatch.setenv("SARFEAS_THREADS", "3")
        main(["validate", str(fixture_path), "--nmc", "3000", "--seed", "4", "--betas", "2", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()
        assert b"seed: 4" in a.read_bytes()

    def test_bad_nmc(self, capsys, fixture_path):
        code, _, _ = run(capsys, "validate", fixture_path, "--nmc", 0)
        assert code == 2


class TestSweepCommand:
    def test_single_point(self, capsys, fixture_path):
        code, out, _ = run(capsys, "sweep", fixture_path, "--band", "X", "--delta-r", "0.25")
        assert code == 0
        rows = data_rows(out)
        assert len(rows) == 1
        assert list(rows[0]) == ["delta_r_m", "min_sigma0_db", "rcs_min_m2", "m", "p_d", "converged"]
        assert rows[0]["converged"] == "true" and rows[0]["m"] == "2"
        assert "# optimum delta_r_m=0.25" in out

    def test_one_file_per_band(self, capsys, tmp_path, fixture_path):
        out = tmp_path / "fig4.csv"
        code, _, _ = run(capsys, "sweep", fixture_path, "--delta-r", "0.2,0.25", "--out", out)
        assert code == 0
        for band in ("X", "Ku"):
            text = (tmp_path / f"fig4_{band}.csv").read_text()
            assert f"# band: {band}" in text
            assert len(data_rows(text)) == 2

    def test_failed_point_in_column(self, capsys, fixture_path):
        code, out, _ = run(capsys, "sweep", fixture_path, "--band", "X", "--delta-r", "0.25,12")
        assert code == 0
        rows = data_rows(out)
        assert rows[1]["converged"] == "false" and rows[1]["min_sigma0_db"] == "nan"

    def test_total_failure_nonzero(self, capsys, fixture_path):
        code, _, _ = run(capsys, "sweep", fixture_path, "--band", "X", "--delta-r", "12")
        assert code != 0

    def test_unknown_band(self, capsys, fixture_path):
        code, _, _ = run(capsys, "sweep", fixture_path, "--band", "S")
        assert code == 2


class TestPipelineCommand:
    def test_text(self, capsys, fixture_path):
        code, out, _ = run(capsys, "pipeline", fixture_path, "--sigma0-db", "1.07", "--delta-r", "0.25")
        assert code == 0
        for label in ("a", "mean_snr", "alpha_prime", "N_ps_w", "P_D_sw", "P_FA_sw"):
            assert f"  {label} " in out

    def test_default_delta_r_from_bandwidth(self, capsys, fixture_path):
        code, out, _ = run(capsys, "pipeline", fixture_path, "--sigma0-db", "0", "--format", "csv")
        rows = {r["quantity"]: r for r in data_rows(out)}
        assert float(rows["delta_r"]["value"]) == pytest.approx(0.25)

    def test_signal_free(self, capsys, fixture_path):
        code, out, _ = run(capsys, "pipeline", fixture_path, "--sigma0-db", "-60", "--format", "csv")
        rows = {r["quantity"]: float(r["value"]) for r in data_rows(out)}
        assert rows["P_D_sw"] == pytest.approx(rows["P_FA_sw"], rel=1e-3)

    def test_infeasible_exit_3(self, capsys, fixture_path):
        code, _, err = run(capsys, "pipeline", fixture_path, "--sigma0-db", "0", "--delta-r", "12")
        assert code == 3 and "block" in err


def test_sweep_rows_roundtrip_through_pipeline(capsys, fixture_path):
    _, out, _ = run(capsys, "sweep", fixture_path, "--band", "Ku", "--delta-r", "0.15,0.4")
    for row in data_rows(out):
        code, pout, _ = run(capsys, "pipeline", fixture_path, "--band", "Ku", "--format", "csv",
                            "--sigma0-db", row["min_sigma0_db"], "--delta-r", row["delta_r_m"])
        vals = {r["quantity"]: float(r["value"]) for r in data_rows(pout)}
        assert abs(vals["P_D_sw"] - 0.9) < 1e-4
