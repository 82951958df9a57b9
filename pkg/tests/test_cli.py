import json

import numpy as np
import pytest

from bnews import cli, rdsim
from bnews.config import RunConfig
from bnews.errors import ConfigError


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run_cli(*argv):
    return cli.main(list(argv))


# ---------------------------------------------------------------------------
# config files
# ---------------------------------------------------------------------------

def test_config_round_trip(tmp_path):
    path = write_cfg(tmp_path, "[scan]\nfamily = linear\nslope = 0.5\n")
    cfg = RunConfig.from_file(path)
    assert cfg.get_str("scan", "family") == "linear"
    assert cfg.get_float("scan", "slope") == 0.5
    assert cfg.get_int("scan", "steps", 7) == 7
    out = tmp_path / "copy.cfg"
    cfg.write(out)
    assert RunConfig.from_file(out).sections == cfg.sections


def test_config_override_and_headers(tmp_path):
    path = write_cfg(tmp_path, "[warn]\nsigma = 1.0\n")
    cfg = RunConfig.from_file(path).override("warn", seed=5, skipped=None)
    assert cfg.get_int("warn", "seed") == 5
    assert "skipped" not in cfg.section("warn")
    assert "# warn.seed=5" in cfg.header_lines()


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.from_file(tmp_path / "missing.cfg")
    path = write_cfg(tmp_path, "[scan]\nslope = not-a-number\n")
    cfg = RunConfig.from_file(path)
    with pytest.raises(ConfigError):
        cfg.get_float("scan", "slope")
    with pytest.raises(ConfigError):
        cfg.get_bool("scan", "slope")
    with pytest.raises(ConfigError):
        cfg.require_float("scan", "absent")


# ---------------------------------------------------------------------------
# exit codes
# ---------------------------------------------------------------------------

def test_missing_config_exits_2(tmp_path):
    assert run_cli("scan", "--config", str(tmp_path / "nope.cfg")) == 2


def test_bad_grid_exits_2(tmp_path):
    cfg = write_cfg(tmp_path, "[scan]\nfamily = linear\n"
                              "alpha_min = 1.0\nalpha_max = 0.0\n"
                              "alpha_steps = 5\n")
    assert run_cli("scan", "--config", cfg,
                   "--out", str(tmp_path / "o")) == 2


def test_unknown_family_exits_2(tmp_path):
    cfg = write_cfg(tmp_path, "[scan]\nfamily = cubic\n"
                              "alpha_min = 0.0\nalpha_max = 1.0\n")
    assert run_cli("scan", "--config", cfg,
                   "--out", str(tmp_path / "o")) == 2


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

SIM_CFG = """
[simulate]
family = linear
slope = 0.5
sigma = 1.0
alpha = 0.0
n_steps = 5000
seed = 4
"""


def test_simulate_writes_csv_and_plot(tmp_path):
    cfg = write_cfg(tmp_path, SIM_CFG)
    out = tmp_path / "sim"
    assert run_cli("simulate", "--config", cfg, "--out", str(out)) == 0
    series = rdsim.read_csv(out / "series.csv")
    assert len(series) == 5000
    assert np.all(np.abs(series.samples) <= 2.0)  # invariant interval
    assert series.meta["simulate.slope"] == "0.5"
    assert (out / "series.png").stat().st_size > 0


def test_simulate_bnts_format(tmp_path):
    cfg = write_cfg(tmp_path, SIM_CFG + "format = bnts\n")
    out = tmp_path / "sim"
    assert run_cli("simulate", "--config", cfg, "--out", str(out),
                   "--no-plot") == 0
    data = rdsim.read_bnts(out / "series.bnts")
    assert data.shape == (5000,)
    assert not (out / "series.png").exists()


def test_simulate_seed_flag_overrides_config(tmp_path):
    cfg = write_cfg(tmp_path, SIM_CFG)
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    run_cli("simulate", "--config", cfg, "--out", str(out_a),
            "--seed", "99", "--no-plot")
    run_cli("simulate", "--config", cfg, "--out", str(out_b), "--no-plot")
    a = rdsim.read_csv(out_a / "series.csv").samples
    b = rdsim.read_csv(out_b / "series.csv").samples
    assert not np.array_equal(a, b)


# ---------------------------------------------------------------------------
# scan
# ---------------------------------------------------------------------------

def test_scan_linear_family_reports_no_bifurcation(tmp_path):
    cfg = write_cfg(tmp_path, "[scan]\nfamily = linear\nslope = 0.5\n"
                              "alpha_min = -0.5\nalpha_max = 0.5\n"
                              "alpha_steps = 6\n")
    out = tmp_path / "scan"
    assert run_cli("scan", "--config", cfg, "--out", str(out),
                   "--no-plot") == 0
    report = json.loads((out / "scan_report.json").read_text())
    assert report["family"] == "linear"
    assert report["bifurcations"] == []
    lines = [l for l in (out / "scan_sets.csv").read_text().splitlines()
             if l and not l.startswith("#")]
    assert lines[0] == "alpha,comp_count,comp_index,lo,hi,error"
    assert len(lines) == 7  # header + one component per alpha


def test_scan_output_reproducible(tmp_path):
    cfg = write_cfg(tmp_path, "[scan]\nfamily = linear\nslope = 0.5\n"
                              "alpha_min = -0.5\nalpha_max = 0.5\n"
                              "alpha_steps = 6\n")
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    run_cli("scan", "--config", cfg, "--out", str(out_a), "--no-plot")
    run_cli("scan", "--config", cfg, "--out", str(out_b), "--no-plot")
    assert (out_a / "scan_sets.csv").read_bytes() == \
        (out_b / "scan_sets.csv").read_bytes()


# ---------------------------------------------------------------------------
# warn
# ---------------------------------------------------------------------------

WARN_CFG = """
[warn]
family = linear
slope = 0.5
sigma = 1.0
alpha_min = 0.0
alpha_max = 1.0
alpha_steps = 3
n_steps = 60000
delta = 0.3
gap = 0.1
seed = 12
"""


def test_warn_exit_10_when_flagged(tmp_path):
    cfg = write_cfg(tmp_path, WARN_CFG + "threshold = 0.05\n")
    out = tmp_path / "warn"
    assert run_cli("warn", "--config", cfg, "--out", str(out),
                   "--no-plot") == 10
    lines = [l for l in (out / "warn.csv").read_text().splitlines()
             if l and not l.startswith("#")]
    assert lines[0] == "alpha,D,k1,k2,slack,flag,error"
    assert any(l.split(",")[5] == "1" for l in lines[1:])


def test_warn_exit_0_below_threshold(tmp_path):
    cfg = write_cfg(tmp_path, WARN_CFG + "threshold = 0.99\n")
    out = tmp_path / "warn"
    assert run_cli("warn", "--config", cfg, "--out", str(out),
                   "--no-plot") == 0


def test_warn_bad_variant_exits_2(tmp_path):
    cfg = write_cfg(tmp_path, WARN_CFG + "variant = magic\n")
    assert run_cli("warn", "--config", cfg,
                   "--out", str(tmp_path / "o")) == 2


def test_warn_thread_count_does_not_change_output(tmp_path):
    cfg = write_cfg(tmp_path, WARN_CFG)
    out_a, out_b = tmp_path / "t1", tmp_path / "t4"
    run_cli("warn", "--config", cfg, "--out", str(out_a),
            "--threads", "1", "--no-plot")
    run_cli("warn", "--config", cfg, "--out", str(out_b),
            "--threads", "4", "--no-plot")
    assert (out_a / "warn.csv").read_bytes() == \
        (out_b / "warn.csv").read_bytes()


# ---------------------------------------------------------------------------
# koper
# ---------------------------------------------------------------------------

def test_koper_return_mode(tmp_path):
    cfg = write_cfg(tmp_path, "[koper]\nmode = return\nsigma = 0.0\n"
                              "lam = -6.88\nz_min = -8.1\nz_max = -7.9\n"
                              "z_steps = 3\nn_per_z = 1\n")
    out = tmp_path / "koper"
    assert run_cli("koper", "--config", cfg, "--out", str(out),
                   "--no-plot") == 0
    lines = [l for l in (out / "koper_return.csv").read_text().splitlines()
             if l and not l.startswith("#")]
    assert lines[0] == "lambda,z_in,z_out,steps,early_flag"
    assert len(lines) == 4
    for line in lines[1:]:
        z_out = float(line.split(",")[2])
        assert -8.2 < z_out < -7.8
