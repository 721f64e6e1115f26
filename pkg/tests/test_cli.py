"""CLI surface: run, validate-config, preset subcommands."""

import json
import os

import pytest

from cogradar.cli import main

TINY_TOML = """\
[array]
n_tx = 16
n_rx = 16

[grid]
n_bins = 12

[disturbance]
kind = "complex-t"
shape = 2.0
power = 1.0
burn_in = 200
pole_magnitudes = [0.5, 0.6, 0.7, 0.4, 0.5, 0.6]
pole_frequencies = [0.4, 0.2, 0.0, 0.1, 0.3, 0.35]

[motion]
dt = 1.0
sigma_s = 0.01

[scenario]
initial_state = [60.0, 0.05, -60.0, 0.05]
initial_snr_db = -5.0
p_fa = 1e-4
t_max = 4
init_mode = "assisted"
v_max = 0.2
pool_scans = 2

[pomcp]
n_sim = 80
n_particles = 100

[experiment]
policies = ["oracle"]
n_trials = 1
base_seed = 3
out_dir = "cli_out"
"""


@pytest.fixture
def tiny_toml(tmp_path):
    p = tmp_path / "exp.toml"
    p.write_text(TINY_TOML)
    return str(p)


def test_validate_config_ok(tiny_toml, capsys):
    assert main(["validate-config", "--config", tiny_toml]) == 0
    out = capsys.readouterr().out
    assert "config OK" in out
    assert '"n_bins": 12' in out


def test_validate_config_rejects_unknown_keys(tmp_path, capsys):
    p = tmp_path / "bad.toml"
    p.write_text(TINY_TOML + "\n[exotic]\nfoo = 1\n")
    assert main(["validate-config", "--config", str(p)]) == 2
    assert "unknown config sections" in capsys.readouterr().err


def test_validate_config_rejects_unknown_key_in_section(tmp_path, capsys):
    p = tmp_path / "bad2.toml"
    p.write_text(TINY_TOML.replace("sigma_s = 0.01", "sigma_s = 0.01\nwarp = 9"))
    assert main(["validate-config", "--config", str(p)]) == 2
    assert "unknown keys" in capsys.readouterr().err


def test_validate_config_missing_file(capsys):
    assert main(["validate-config", "--config", "/nonexistent/x.toml"]) == 2


def test_run_writes_outputs(tiny_toml, tmp_path, capsys):
    out = str(tmp_path / "results")
    code = main(["run", "--config", tiny_toml, "--out", out])
    assert code == 0
    for name in ("records.csv", "metrics.csv", "run_meta.json"):
        assert os.path.exists(os.path.join(out, name))
    meta = json.loads(open(os.path.join(out, "run_meta.json")).read())
    assert meta["config"]["experiment"]["policies"] == ["oracle"]


def test_run_policy_and_trial_overrides(tiny_toml, tmp_path):
    out = str(tmp_path / "results2")
    code = main(["run", "--config", tiny_toml, "--policy", "particle_filter",
                 "--trials", "2", "--seed", "5", "--t-max", "3", "--out", out])
    assert code == 0
    meta = json.loads(open(os.path.join(out, "run_meta.json")).read())
    assert meta["config"]["experiment"]["policies"] == ["particle_filter"]
    assert meta["config"]["experiment"]["n_trials"] == 2
    assert meta["config"]["experiment"]["base_seed"] == 5
    assert meta["config"]["scenario"]["t_max"] == 3
    rows = open(os.path.join(out, "records.csv")).read().splitlines()
    assert len(rows) == 1 + 2 * 3  # header + trials * t_max


def test_case1_preset_smoke(tmp_path):
    out = str(tmp_path / "case1_out")
    code = main(["case1", "--policy", "oracle", "--trials", "1", "--t-max", "2",
                 "--n-sim", "50", "--n-particles", "80", "--out", out])
    assert code == 0
    meta = json.loads(open(os.path.join(out, "run_meta.json")).read())
    assert meta["config"]["scenario"]["initial_state"] == [60.0, 0.2, -60.0, 0.2]
    assert meta["config"]["motion"]["sigma_s"] == 0.03
    assert meta["config"]["scenario"]["initial_snr_db"] == -17.0


def test_case2_preset_config():
    from cogradar.config import preset_case2

    data = preset_case2()
    assert data["scenario"]["initial_state"] == [60.0, 0.35, -60.0, 0.35]
    assert data["motion"]["sigma_s"] == 0.005
    assert "orthogonal" in data["experiment"]["policies"]
