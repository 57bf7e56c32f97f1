"""CLI, config parsing, CSV emission, and end-to-end determinism."""

import math

import pytest
import yaml

from v2vbounds.app import CSV_HEADER, emit_csv, load_config, main
from v2vbounds.errors import ConfigError
from v2vbounds.scenarios import SweepRow


def write_config(tmp_path, name="run.yaml", **kwargs):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(kwargs), encoding="utf-8")
    return str(path)


def fast_overtaking_config(tmp_path, out, **extra):
    return write_config(
        tmp_path,
        scenario="overtaking",
        preset="cfg_3p5GHz",
        q_y_min=-6.0,
        q_y_max=6.0,
        step=1.0,
        out=str(out),
        **extra,
    )


class TestConfigParsing:
    def test_defaults(self, tmp_path):
        cfg = load_config(write_config(tmp_path))
        assert cfg.scenario == "overtaking"
        assert cfg.preset == "cfg_3p5GHz"
        assert cfg.measurements == ("aoa_tdoa", "aoa")

    def test_unknown_key_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(write_config(tmp_path, scnario="overtaking"))

    def test_bad_scenario_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(write_config(tmp_path, scenario="drifting"))

    def test_bad_step_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(write_config(tmp_path, step=-1.0))

    def test_measurement_aliases(self, tmp_path):
        cfg = load_config(write_config(tmp_path, measurements="aoa+tdoa"))
        assert cfg.measurements == ("aoa_tdoa",)
        cfg = load_config(write_config(tmp_path, measurements="aoa"))
        assert cfg.measurements == ("aoa",)

    def test_custom_preset_requires_core_overrides(self, tmp_path):
        path = write_config(tmp_path, preset="custom", overrides={"n_fft": 1024})
        cfg = load_config(path)
        with pytest.raises(ConfigError):
            cfg.resolve_preset()

    def test_custom_preset_resolves(self, tmp_path):
        path = write_config(
            tmp_path,
            preset="custom",
            overrides={
                "carrier_frequency": 5.9e9,
                "subcarrier_spacing": 30e3,
                "n_rx_elements": 8,
                "target_snr_db": 20.0,
            },
        )
        preset = load_config(path).resolve_preset()
        assert preset.carrier_frequency == 5.9e9
        assert preset.n_rx_elements == 8

    def test_unknown_override_rejected(self, tmp_path):
        path = write_config(tmp_path, overrides={"carrier": 1e9})
        with pytest.raises(ConfigError):
            load_config(path).resolve_preset()

    def test_narrowband_warning(self, tmp_path):
        path = write_config(
            tmp_path,
            preset="custom",
            overrides={
                "carrier_frequency": 1.0e9,
                "subcarrier_spacing": 120e3,
                "n_rx_elements": 4,
                "target_snr_db": 20.0,
                "max_occupied_index": 600,
            },
        )
        with pytest.warns(UserWarning, match="narrowband"):
            load_config(path).resolve_preset()


class TestCsv:
    def _rows(self):
        return [
            SweepRow(
                q_x=-3.5, q_y=1.25, d_y=-3.25, n_links=9,
                peb_lat_both=0.00123456789, peb_lon_both=0.5,
                peb_lat_aoa=0.002, peb_lon_aoa=0.6,
                oeb_both=0.01, oeb_aoa=math.inf,
            )
        ]

    def test_header_and_roundtrip(self, tmp_path):
        path = tmp_path / "rows.csv"
        emit_csv(self._rows(), path)
        text = path.read_text(encoding="utf-8")
        lines = text.splitlines()
        assert lines[0] == CSV_HEADER
        assert text.endswith("\n")
        fields = lines[1].split(",")
        assert fields[3] == "9"
        assert fields[-1] == "inf"
        assert abs(float(fields[4]) - 0.00123456789) <= 1e-9 * 0.00123456789

    def test_empty_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            emit_csv([], tmp_path / "empty.csv")


class TestCli:
    def test_overtaking_run(self, tmp_path, capsys):
        out = tmp_path / "ov.csv"
        code = main(["--config", fast_overtaking_config(tmp_path, out)])
        assert code == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 1 + 13
        assert "requirement crossings" in capsys.readouterr().out

    def test_deterministic_output(self, tmp_path):
        out_a = tmp_path / "a.csv"
        out_b = tmp_path / "b.csv"
        assert main(["--config", fast_overtaking_config(tmp_path, out_a, name="a.yaml")]) == 0
        assert main(["--config", fast_overtaking_config(tmp_path, out_b, name="b.yaml")]) == 0
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_flag_overrides_config(self, tmp_path):
        out = tmp_path / "pl.csv"
        cfg = write_config(
            tmp_path, scenario="overtaking", q_y_min=-7.0, step=0.5, out=str(out)
        )
        code = main(["--config", cfg, "--scenario", "platooning", "--step", "0.5"])
        assert code == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        # platooning with q_y_min=-7, step 0.5: bumper gaps 0.5..2.5
        assert len(lines) == 1 + 5
        assert all(line.split(",")[0] == "0" for line in lines[1:])

    def test_measurement_restriction_emits_sentinels(self, tmp_path):
        out = tmp_path / "aoa.csv"
        cfg = fast_overtaking_config(tmp_path, out, measurements="aoa")
        assert main(["--config", cfg]) == 0
        for line in out.read_text(encoding="utf-8").splitlines()[1:]:
            fields = line.split(",")
            assert fields[4] == "inf" and fields[5] == "inf"  # *_both columns
            assert fields[6] != "inf"

    def test_custom_scenario_overlap_rows_are_inf(self, tmp_path):
        out = tmp_path / "custom.csv"
        cfg = write_config(
            tmp_path,
            scenario="custom",
            q_x=0.0,
            q_y_min=-1.0,
            q_y_max=1.0,
            step=1.0,
            out=str(out),
        )
        assert main(["--config", cfg]) == 0
        lines = out.read_text(encoding="utf-8").splitlines()[1:]
        assert len(lines) == 3
        overlap = lines[1].split(",")
        assert overlap[3] == "0"
        assert overlap[4] == "inf" and overlap[9] == "inf"

    def test_bad_config_exit_2(self, tmp_path):
        cfg = write_config(tmp_path, scenario="nope")
        assert main(["--config", cfg]) == 2

    def test_bad_override_exit_2(self, tmp_path):
        cfg = write_config(tmp_path, overrides={"noise_variance": -1.0})
        assert main(["--config", cfg]) == 2

    def test_uncalibratable_preset_exit_3(self, tmp_path):
        cfg = write_config(
            tmp_path,
            out=str(tmp_path / "x.csv"),
            q_y_min=-2.0,
            q_y_max=2.0,
            step=1.0,
            overrides={"fov_blocked_halfwidth": math.pi},
        )
        assert main(["--config", cfg]) == 3

    def test_no_config_defaults(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(["--scenario", "overtaking", "--step", "6.0"]) == 0
        assert (tmp_path / "overtaking_cfg_3p5GHz.csv").exists()

    def test_selfcheck(self, capsys):
        assert main(["--selfcheck"]) == 0
        out = capsys.readouterr().out
        assert "closed vs Schur" in out
        assert "selfcheck PASS" in out
