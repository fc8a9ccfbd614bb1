import json
from dataclasses import replace
from pathlib import Path

import pytest

from secbeam import cli
from secbeam.analog_opt import PowerAdaptConfig
from secbeam.montecarlo import CampaignError, SweepSpec, band_defaults


SMALL = "\n".join([
    "# small deterministic scenario for tests",
    "band = sub6",
    "n_t = 8",
    "n_r = 2",
    "n_e = 2",
    "n_j = 2",
    "users = 2",
    "trials = 2",
    "seed = 11",
    "ascent.max_iters = 300",
    "sweep.kind = snr",
    "sweep.start = 0.0",
    "sweep.stop = 2.0",
    "sweep.step = 2.0",
    "",
])


@pytest.fixture
def small_cfg_file(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL)
    return path


class TestParseConfig:
    def test_band_defaults_from_empty_config(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("band = mmwave\n")
        cfg = cli.parse_config(path)
        assert cfg.n_clusters == 4
        assert cfg.n_rays == 15
        assert cfg.trials == 1000

    def test_unknown_key_named(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("bogus_key = 3\n")
        with pytest.raises(cli.ConfigError, match="bogus_key"):
            cli.parse_config(path)

    def test_negative_trials_rejected(self):
        with pytest.raises(cli.ConfigError, match="trials"):
            cli.config_from_flat({"trials": "-3"})

    def test_bad_number_named(self):
        with pytest.raises(cli.ConfigError, match="power.p_b_db"):
            cli.config_from_flat({"power.p_b_db": "five"})

    def test_comments_and_blank_lines(self, small_cfg_file):
        cfg = cli.parse_config(small_cfg_file)
        assert cfg.n_t == 8
        assert cfg.sweep.kind == "snr"

    def test_missing_file(self):
        with pytest.raises(cli.ConfigError, match="not found"):
            cli.parse_config("does/not/exist.cfg")

    def test_overrides_beat_file(self, small_cfg_file):
        cfg = cli.parse_config(small_cfg_file, overrides={"trials": "7"})
        assert cfg.trials == 7

    def test_filter_choices(self):
        assert cli.config_from_flat({"filter": "all"}).filters == ("zf", "mmse", "mrt")
        assert cli.config_from_flat({"filter": "mmse"}).filters == ("mmse",)
        with pytest.raises(cli.ConfigError, match="filter"):
            cli.config_from_flat({"filter": "dirty"})

    def test_power_adapt_keys_enable_adaptation(self):
        cfg = cli.config_from_flat({"power_adapt.target_secrecy": "2.0"})
        assert cfg.power_adapt == PowerAdaptConfig(2.0, 20.0, 0.01)


class TestRoundTrip:
    @pytest.mark.parametrize("make", [
        lambda: band_defaults("mmwave"),
        lambda: band_defaults("sub6", users=7, trials=12, master_seed=5),
        lambda: band_defaults(
            "mmwave",
            power_adapt=PowerAdaptConfig(1.5, 18.0, 0.05),
            sweep=SweepSpec(kind="users", start=1, stop=10, step=1),
            filters=("mmse",),
            channel_gain="eq1",
        ),
    ])
    def test_flat_round_trip(self, make):
        cfg = make()
        assert cli.config_from_flat(cli.to_flat(cfg)) == cfg

    def test_resolved_file_round_trip(self, tmp_path):
        cfg = band_defaults("sub6", trials=4)
        cli.write_resolved(tmp_path, cfg)
        assert cli.parse_config(tmp_path / "resolved.cfg") == cfg


class TestFlags:
    def test_snr_range_gives_expected_axis(self):
        ns = cli.build_parser().parse_args(["sweep-snr", "--snr", "0:10:1"])
        cfg = cli.resolve_command_config("sweep-snr", ns)
        assert len(cfg.axis_values()) == 11

    def test_users_range_defaults_to_unit_step(self):
        ns = cli.build_parser().parse_args(["sweep-users", "--users", "1:10"])
        cfg = cli.resolve_command_config("sweep-users", ns)
        assert cfg.axis_values() == [float(u) for u in range(1, 11)]

    def test_bad_range_rejected(self):
        ns = cli.build_parser().parse_args(["sweep-snr", "--snr", "0:10:0"])
        with pytest.raises(cli.ConfigError, match="--snr"):
            cli.resolve_command_config("sweep-snr", ns)

    def test_presets_file_flags_precedence(self, small_cfg_file):
        # Preset jammer power (-20 dB) loses to the file; file trials lose
        # to the explicit flag.
        args = ["sweep-snr", "--config", str(small_cfg_file), "--trials", "9"]
        ns = cli.build_parser().parse_args(args)
        cfg = cli.resolve_command_config("sweep-snr", ns)
        assert cfg.trials == 9
        assert cfg.n_t == 8  # from file
        assert cfg.power.p_j_db == -20.0  # preset survives (file is silent)
        assert cfg.n_j == 2  # file overrides the preset's 16

    def test_power_adapt_flags(self):
        args = ["power-adapt", "--target-secrecy", "0.5", "--power-cap", "12"]
        ns = cli.build_parser().parse_args(args)
        cfg = cli.resolve_command_config("power-adapt", ns)
        assert cfg.power_adapt.target_secrecy == 0.5
        assert cfg.power_adapt.power_cap_db == 12.0
        assert cfg.filters == ("mmse",)


class TestOutputs:
    def test_single_point_csv(self, tmp_path):
        from secbeam.montecarlo import run_campaign

        cfg = cli.config_from_flat({
            "band": "sub6", "n_t": "8", "n_r": "2", "n_e": "2", "n_j": "2",
            "users": "2", "trials": "2", "seed": "3", "ascent.max_iters": "200",
            "filter": "zf",
        })
        paths = cli.emit_csv(run_campaign(cfg), tmp_path)
        assert [p.name for p in paths] == ["curve_zf.csv"]
        lines = paths[0].read_text().splitlines()
        assert len(lines) == 2
        assert lines[0] == "axis,mean_secrecy_bps_hz,mean_ee_bits_hz_mw,trials,failures"

    def test_formatting_nine_significant_digits(self):
        assert cli._format_row([0.12345678949, 2, 1.0]) == "0.123456789,2,1"

    def test_main_sweep_snr_writes_all_curves(self, tmp_path, small_cfg_file):
        out = tmp_path / "out"
        code = cli.main([
            "sweep-snr", "--config", str(small_cfg_file), "--out", str(out),
        ])
        assert code == 0
        names = sorted(p.name for p in out.iterdir())
        assert names == sorted([
            "curve_zf.csv", "curve_mmse.csv", "curve_mrt.csv",
            "curve_su_benchmark.csv", "plot.gp", "resolved.cfg", "run_manifest.json",
        ])
        plot = (out / "plot.gp").read_text()
        for name in ("curve_zf.csv", "curve_su_benchmark.csv"):
            assert name in plot

    def test_manifest_rerun_is_byte_identical(self, tmp_path, small_cfg_file):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert cli.main(["single", "--config", str(small_cfg_file), "--out", str(out1)]) == 0
        manifest = out1 / "run_manifest.json"
        assert json.loads(manifest.read_text())["master_seed"] == 11
        assert cli.main([
            "single", "--config", str(manifest), "--out", str(out2), "--workers", "2",
        ]) == 0
        for name in ("curve_zf.csv", "curve_mmse.csv", "curve_mrt.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_power_adapt_csv_columns(self, tmp_path, small_cfg_file):
        out = tmp_path / "pa"
        code = cli.main([
            "power-adapt", "--config", str(small_cfg_file),
            "--target-secrecy", "0.05", "--power-cap", "6",
            "--out", str(out),
        ])
        assert code == 0
        header = (out / "curve_mmse.csv").read_text().splitlines()[0]
        assert header.endswith(",cycles,final_pb_db")


class TestExitCodes:
    def test_validation_error_is_one(self, capsys):
        assert cli.main(["single", "--trials", "-4"]) == 1
        assert "trials" in capsys.readouterr().err

    def test_unknown_flag_is_one(self, capsys):
        assert cli.main(["single", "--frequency", "60GHz"]) == 1

    def test_campaign_failure_is_two(self, monkeypatch, capsys):
        def boom(cfg, workers=1):
            raise CampaignError("too many singular trials")

        monkeypatch.setattr(cli, "run_campaign", boom)
        assert cli.main(["single", "--trials", "2"]) == 2
        assert "campaign failed" in capsys.readouterr().err
