"""End-to-end tests of the command-line interface."""

import math

import pytest

from dualpolsim.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main

PATTERN_HEADER = (
    "azimuth_deg, port1_co_dBi, port1_cross_dBi, port2_co_dBi, port2_cross_dBi\n"
)


@pytest.fixture
def pattern_file(tmp_path):
    rows = "".join(f"{-180 + i * 10}, 6.0, -14.0, 5.0, -11.0\n" for i in range(36))
    path = tmp_path / "pattern.csv"
    path.write_text(PATTERN_HEADER + rows)
    return path


def test_table1_to_stdout(capsys):
    assert main(["table1", "--xpd", "3,5,10,20,30"]) == EXIT_OK
    out = capsys.readouterr().out
    lines = out.strip().splitlines()
    assert lines[0] == "xpd_db,rho_exact,rho_approx,d_iso_lambda,d_lap_lambda,spread_deg"
    assert len(lines) == 6
    row10 = dict(zip(lines[0].split(","), lines[3].split(",")))
    assert float(row10["rho_exact"]) == pytest.approx(0.5750, abs=5e-4)
    assert float(row10["d_iso_lambda"]) == pytest.approx(0.220, abs=0.002)
    assert float(row10["spread_deg"]) == 26.0


def test_table1_to_file(tmp_path, capsys):
    out_file = tmp_path / "table.csv"
    assert main(["table1", "--xpd", "20", "--spread", "20", "--out", str(out_file)]) == EXIT_OK
    capsys.readouterr()
    body = out_file.read_text().strip().splitlines()
    assert len(body) == 2
    assert body[1].startswith("20,0.198")


def test_spacing_isotropic(capsys):
    assert main(["spacing", "--rho", "0.575", "--dist", "iso"]) == EXIT_OK
    value = float(capsys.readouterr().out.strip())
    assert value == pytest.approx(0.2204, abs=0.002)


def test_spacing_laplacian(capsys):
    assert main(["spacing", "--rho", "0.198", "--dist", "lap", "--spread", "26"]) == EXIT_OK
    value = float(capsys.readouterr().out.strip())
    assert value == pytest.approx(0.9518, abs=0.01)


def test_spacing_unreachable_target_exits_3(capsys):
    code = main(["spacing", "--rho", "0.01", "--dist", "lap", "--spread", "26"])
    assert code == EXIT_NUMERIC
    assert "achievable range" in capsys.readouterr().err


def test_spacing_invalid_rho_exits_2(capsys):
    assert main(["spacing", "--rho", "1.5", "--dist", "iso"]) == EXIT_CONFIG


def test_xpd_from_pattern(pattern_file, capsys):
    assert main(["xpd-from-pattern", "--file", str(pattern_file), "--azimuth", "0"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "port1_xpd_db=20.0000" in out
    assert "port2_xpd_db=16.0000" in out


def test_xpd_from_pattern_missing_file(tmp_path, capsys):
    code = main(["xpd-from-pattern", "--file", str(tmp_path / "nope.csv"),
                 "--azimuth", "0"])
    assert code == EXIT_CONFIG


def test_xpd_from_pattern_malformed_file(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text(PATTERN_HEADER + "0, 6, -14, 6, -14\n")
    assert main(["xpd-from-pattern", "--file", str(bad), "--azimuth", "0"]) == EXIT_CONFIG
    assert "too few samples" in capsys.readouterr().err


def test_cdf_end_to_end(tmp_path, capsys):
    config = tmp_path / "scenario.ini"
    config.write_text(
        """
        [generator]
        count = 3
        distance_m = 5, 40

        [sweep]
        xpd_db = 10, 20
        models = ii
        trials_per_user = 25

        [seed]
        value = 7
        """
    )
    out_dir = tmp_path / "out"
    assert main(["cdf", "--config", str(config), "--out", str(out_dir)]) == EXIT_OK
    capsys.readouterr()
    names = sorted(p.name for p in out_dir.iterdir())
    assert names == ["cdf_ii_10.csv", "cdf_ii_20.csv", "run_metadata.txt", "table1.csv"]
    cdf_lines = (out_dir / "cdf_ii_10.csv").read_text().strip().splitlines()
    assert cdf_lines[0] == "throughput_bps,cum_prob"
    assert len(cdf_lines) == 1 + 3 * 25
    meta = (out_dir / "run_metadata.txt").read_text()
    assert "seed=7" in meta and "version=" in meta


def test_cdf_models_override(tmp_path, capsys):
    config = tmp_path / "scenario.ini"
    config.write_text(
        "[users]\nu = path_loss_db=78 mean_aod_deg=5\n"
        "[sweep]\nxpd_db = 10\nmodels = ii\ntrials_per_user = 10\n"
    )
    out_dir = tmp_path / "out"
    assert main(["cdf", "--config", str(config), "--models", "i,iv",
                 "--out", str(out_dir)]) == EXIT_OK
    capsys.readouterr()
    names = {p.name for p in out_dir.iterdir()}
    assert "cdf_i_10.csv" in names and "cdf_iv_10.csv" in names
    assert "cdf_ii_10.csv" not in names


def test_cdf_bad_config_exits_2(tmp_path, capsys):
    config = tmp_path / "scenario.ini"
    config.write_text("[users]\nu = path_loss_db=80 mean_aod_deg=0\n"
                      "[link]\noverhead = 2.0\n")
    assert main(["cdf", "--config", str(config), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "error:" in capsys.readouterr().err


def test_cdf_unknown_model_override_exits_2(tmp_path, capsys):
    config = tmp_path / "scenario.ini"
    config.write_text("[users]\nu = path_loss_db=80 mean_aod_deg=0\n")
    assert main(["cdf", "--config", str(config), "--models", "vii",
                 "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_cdf_missing_config_exits_2(tmp_path):
    assert main(["cdf", "--config", str(tmp_path / "none.ini"),
                 "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "dualpolsim" in capsys.readouterr().out
