import json
import math
from dataclasses import replace

import numpy as np
import pytest

import fadelink as fl
from fadelink import cli
from fadelink.harness import CSV_SCHEMA_TAG, derive_seed, trial_seed


def small_cfg(tmp_path, **kwargs):
    base = dict(
        velocities=(15.0,),
        snr_list_db=(6.0,),
        trials=3,
        trajectory_s=0.5,
        out_dir=tmp_path / "out",
        seed=11,
    )
    base.update(kwargs)
    return fl.ExperimentConfig(**base)


# --- config handling ----------------------------------------------------------


def test_config_file_merging_and_cli_precedence(tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text(
        "# comment line\n"
        "trials = 7\n"
        "velocities = 2, 6\n"
        "scenario = withcp\n"
        "pilot-period-ms = 2.0\n"
        "snr = -3, inf\n"
        "svg = true\n"
    )
    args = cli.build_parser().parse_args(
        ["nmse-table", "--config", str(config), "--trials", "9"]
    )
    cfg = cli.build_config(args)
    assert cfg.trials == 9  # CLI flag wins over the file
    assert cfg.velocities == (2.0, 6.0)
    assert cfg.scenario is fl.Scenario.WITH_CP
    assert cfg.pilot_period_s == pytest.approx(2e-3)
    assert cfg.snr_list_db == (-3.0, math.inf)
    assert cfg.svg is True


def test_config_file_rejects_unknown_keys(tmp_path):
    config = tmp_path / "bad.cfg"
    config.write_text("velocity = 3\n")
    with pytest.raises(ValueError, match="unknown config key"):
        cli.load_config_file(config)


def test_experiment_config_validation(tmp_path):
    with pytest.raises(ValueError):
        fl.ExperimentConfig(trials=0)
    with pytest.raises(ValueError):
        fl.ExperimentConfig(velocities=())
    with pytest.raises(ValueError):
        fl.ExperimentConfig(snr_list_db=())


# --- nmse table ----------------------------------------------------------------


def test_nmse_zero_for_static_channel(tmp_path):
    cfg = small_cfg(tmp_path, velocities=(0.0,), trials=2)
    result = fl.run_nmse_table(cfg)
    assert result["rows"][0]["mean_nmse"] == 0.0


def test_nmse_zero_under_withcp(tmp_path):
    cfg = small_cfg(tmp_path, scenario=fl.Scenario.WITH_CP, trials=2)
    result = fl.run_nmse_table(cfg)
    assert all(row["mean_nmse"] == 0.0 for row in result["rows"])


def test_nmse_rows_regenerate_from_their_seed(tmp_path):
    cfg = small_cfg(tmp_path, velocities=(10.0,), trials=4)
    row = fl.run_nmse_table(cfg)["rows"][0]
    values = []
    for t in range(row["trials"]):
        seed = trial_seed(row["seed"], t)
        real = fl.harness.realization_for(cfg, row["velocity_mps"], seed)
        sched = fl.AgingSchedule(cfg.pilot_period_s, cfg.scenario, real)
        values.append(fl.csi_nmse(fl.csi_estimate(sched, real.times), real.samples))
    assert float(np.mean(values)) == pytest.approx(row["mean_nmse"], rel=1e-12)


def test_csv_layout_and_schema_tag(tmp_path):
    cfg = small_cfg(tmp_path, trials=2)
    fl.run_nmse_table(cfg)
    lines = (cfg.out_dir / "nmse_table.csv").read_text().splitlines()
    assert lines[0] == CSV_SCHEMA_TAG == "# fadelink-csv-v1"
    header = lines[1].split(",")
    assert "seed" in header and "velocity_mps" in header
    assert len(lines) == 2 + len(cfg.velocities)


def test_reruns_are_byte_identical(tmp_path):
    cfg_a = small_cfg(tmp_path / "a", trials=2)
    cfg_b = small_cfg(tmp_path / "b", trials=2)
    fl.run_nmse_table(cfg_a)
    fl.run_nmse_table(cfg_b)
    for name in ("nmse_table.csv", "nmse_table.json"):
        assert (cfg_a.out_dir / name).read_bytes() == (cfg_b.out_dir / name).read_bytes()


# --- permutation gain -------------------------------------------------------------


def test_perm_gain_zero_when_channel_is_transparent(tmp_path):
    # Noiseless + perfect prediction: both arms decode identical images, so
    # every paired gain is exactly zero even though the codec truncates.
    cfg = small_cfg(
        tmp_path,
        snr_list_db=(math.inf,),
        scenario=fl.Scenario.WITH_CP,
        trials=3,
    )
    row = fl.run_perm_gain(cfg)["rows"][0]
    assert row["mean_gain_db"] == 0.0
    assert row["mean_psnr_scored_db"] == row["mean_psnr_identity_db"]


def test_perm_gain_zero_on_fully_lossless_path(tmp_path):
    # Full coefficients and a transparent channel: both arms reconstruct
    # bit-exactly, PSNR is the +inf sentinel, and the gain convention is 0.
    cfg = small_cfg(
        tmp_path,
        snr_list_db=(math.inf,),
        scenario=fl.Scenario.WITH_CP,
        kept_coefficients=768,
        trials=2,
    )
    row = fl.run_perm_gain(cfg)["rows"][0]
    assert row["mean_gain_db"] == 0.0
    assert math.isinf(row["mean_psnr_scored_db"])
    assert math.isinf(row["mean_psnr_identity_db"])


def test_perm_gain_negligible_for_static_channel(tmp_path):
    cfg = small_cfg(tmp_path, velocities=(0.0,), trials=25)
    row = fl.run_perm_gain(cfg)["rows"][0]
    assert abs(row["mean_gain_db"]) < 0.15


# --- snr sweep ---------------------------------------------------------------------


def test_snr_inf_withcp_equals_codec_roundtrip(tmp_path, terrain_image):
    image_path = fl.bundled_image_paths()[0]
    cfg = small_cfg(
        tmp_path, snr_list_db=(math.inf,), trials=3, images=(str(image_path),)
    )
    block, meta = fl.encode(terrain_image, cfg.codec_config())
    codec_only = fl.psnr(terrain_image, fl.decode(block, meta))
    rows = fl.run_snr_sweep(cfg)["rows"]
    withcp = [r for r in rows if r["scenario"] == "withcp"][0]
    assert withcp["mean_psnr_db"] == pytest.approx(codec_only, abs=1e-12)
    assert withcp["std_psnr_db"] == 0.0


def test_snr_sweep_psnr_grows_with_snr(tmp_path):
    cfg = small_cfg(tmp_path, snr_list_db=(-6.0, 6.0, 18.0), trials=8)
    rows = fl.run_snr_sweep(cfg)["rows"]
    for scenario in ("withcp", "aging"):
        curve = [r["mean_psnr_db"] for r in rows if r["scenario"] == scenario]
        assert curve == sorted(curve)


# --- transmit -------------------------------------------------------------------------


def test_transmit_is_reproducible_and_robust(tmp_path):
    cfg_a = small_cfg(tmp_path / "a", velocities=(21.0,), snr_list_db=(-6.0,), trajectory_s=1.0)
    cfg_b = small_cfg(tmp_path / "b", velocities=(21.0,), snr_list_db=(-6.0,), trajectory_s=1.0)
    rec_a = fl.run_transmit(cfg_a)
    rec_b = fl.run_transmit(cfg_b)
    assert math.isfinite(rec_a.report.psnr_db)
    assert rec_a.report.nmse >= 0.0
    assert all(0.0 <= v <= 1.0 for v in rec_a.report.per_slot_impairment)
    for name in ("reconstructed.ppm", "transmit.json"):
        assert (cfg_a.out_dir / name).read_bytes() == (cfg_b.out_dir / name).read_bytes()
    assert rec_a == rec_b

    payload = json.loads((cfg_a.out_dir / "transmit.json").read_text())
    assert payload["record"]["seed"] == rec_a.seed
    assert payload["experiment"] == "transmit"


def test_transmit_lossless_configuration(tmp_path):
    cfg = small_cfg(
        tmp_path,
        snr_list_db=(math.inf,),
        scenario=fl.Scenario.WITH_CP,
        kept_coefficients=768,
    )
    record = fl.run_transmit(cfg)
    assert record.report.psnr_db >= 50.0
    assert record.report.nmse == 0.0


# --- svg ------------------------------------------------------------------------------


def test_svg_emission(tmp_path):
    cfg = small_cfg(tmp_path, trials=2, velocities=(2.0, 15.0), svg=True)
    fl.run_nmse_table(cfg)
    text = (cfg.out_dir / "nmse_table.svg").read_text()
    assert text.startswith("<svg") and "polyline" in text


# --- selftest and cli -----------------------------------------------------------------


def test_selftest_passes_quietly():
    messages = []
    assert fl.selftest(echo=messages.append) is True
    assert all(": ok" in m for m in messages)
    assert len(messages) == 5


def test_cli_usage_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["nmse-table", "--velocities", "abc"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["not-a-command"])
    assert exc.value.code == 1


def test_cli_bad_config_key_exits_1(tmp_path, capsys):
    config = tmp_path / "bad.cfg"
    config.write_text("unknown-knob = 3\n")
    assert cli.main(["nmse-table", "--config", str(config)]) == 1


def test_cli_runtime_error_exits_2(tmp_path, capsys):
    code = cli.main(
        ["transmit", str(tmp_path / "missing.ppm"), "--out", str(tmp_path / "o")]
    )
    assert code == 2


def test_cli_nmse_table_happy_path(tmp_path, capsys):
    code = cli.main(
        [
            "nmse-table",
            "--velocities",
            "2,15",
            "--trials",
            "2",
            "--trajectory-s",
            "0.5",
            "--out",
            str(tmp_path / "o"),
        ]
    )
    assert code == 0
    assert (tmp_path / "o" / "nmse_table.csv").exists()
    assert "nmse-table: 2 rows" in capsys.readouterr().out
