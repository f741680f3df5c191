import csv

import numpy as np
import pytest

from tissueflow.harness import (PRESETS, ConfigError, Rect, config_hash,
                                initial_densities, initial_partition,
                                parse_config, run_cli, serialize_config)
from tissueflow.grid import GridSpec


def test_preset_catalog():
    assert set(PRESETS) == {"fig3-esvm", "fig3-vm", "fig3-lesvm",
                            "fig3-gradient-form"}
    esvm = PRESETS["fig3-esvm"]
    assert esvm.params.beta1 == 0.5 and esvm.params.beta2 == 0.1
    assert esvm.params.p1_star == 5.0 and esvm.params.p2_star == 10.0
    assert esvm.params.eps == 0.1 and esvm.params.m == 30.0
    assert PRESETS["fig3-vm"].params.alpha == 0.0
    assert PRESETS["fig3-gradient-form"].velocity_law == "gradient"
    assert PRESETS["fig3-lesvm"].model == "L-ESVM"


def test_band_initial_data_covers_lower_half():
    cfg = PRESETS["fig3-esvm"]
    n1, n2 = initial_densities(cfg)
    assert n1.values.max() == 0.9 and n2.values.max() == 0.9
    assert (n1.values * n2.values).sum() == 0.0
    # total initial mass: 0.9 over the whole strip [-1,1] x [-1,0]
    assert (n1.integral() + n2.integral()) == pytest.approx(1.8, rel=1e-2)


def test_serialize_parse_round_trip_fixed_point():
    for name, cfg in PRESETS.items():
        text = serialize_config(cfg)
        again = parse_config(text)
        assert serialize_config(again) == text, name
        assert config_hash(again) == config_hash(cfg)


def test_empty_config_lists_every_required_key():
    with pytest.raises(ConfigError) as err:
        parse_config("")
    msgs = "\n".join(err.value.violations)
    assert "model" in msgs and "n1" in msgs and "n2" in msgs


def test_unknown_keys_and_sections_are_collected():
    text = """
[run]
model = VM
typo_key = 3
[grud]
nx = 4
[initial]
n1 = 0.9 -0.5 0.5 -0.5 0.5
n2 = 0.9 0.5 0.9 -0.5 0.5
"""
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    msgs = "\n".join(err.value.violations)
    assert "typo_key" in msgs and "grud" in msgs


def test_limit_model_rejects_relaxation_parameters():
    text = """
[run]
preset = fig3-lesvm
[params]
eps = 0.1
"""
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert any("eps" in v and "L-ESVM" in v for v in err.value.violations)


def test_bad_values_are_all_reported():
    text = """
[run]
model = VM
[grid]
nx = lots
[control]
scheme = fancy
velocity_law = psychic
[initial]
n1 = 0.9 -0.5 0.5 -0.5 0.5
n2 = 0.9 0.5 0.9 -0.5
"""
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    msgs = "\n".join(err.value.violations)
    assert "nx" in msgs and "fancy" in msgs and "psychic" in msgs
    assert "5 numbers" in msgs


def test_preset_overlay_overrides_fields():
    text = """
[run]
preset = fig3-vm
[grid]
nx = 32
ny = 32
[control]
t_end = 0.01
"""
    cfg = parse_config(text)
    assert cfg.model == "VM"
    assert cfg.grid.nx == 32
    assert cfg.t_end == 0.01
    assert cfg.params.beta2 == 0.1  # inherited from the preset


def test_rect_painting_uses_open_intervals():
    spec = GridSpec(nx=8, ny=8)
    into = np.zeros((8, 8))
    Rect(0.5, -1.0, 0.0, -1.0, 1.0).paint(spec, into)
    assert into[:4, :].min() == 0.5
    assert into[4:, :].max() == 0.0


def test_initial_partition_is_disjoint():
    cfg = PRESETS["fig3-lesvm"]
    part = initial_partition(cfg)
    assert (part.chi1.values * part.chi2.values).sum() == 0.0
    assert part.cell_counts()[0] > 0 and part.cell_counts()[1] > 0


def test_cli_check_passes():
    assert run_cli(["check"]) == 0


def test_cli_rejects_bad_config(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[run]\nmodel = WARP\n")
    assert run_cli(["run", str(bad)]) == 1
    assert "config error" in capsys.readouterr().err
    assert run_cli(["run", str(tmp_path / "missing.ini")]) == 1
    assert run_cli(["run", "fig3-vm", "--grid", "banana"]) == 1


def test_cli_dynamic_run_writes_artifacts(tmp_path):
    out = tmp_path / "run"
    code = run_cli(["run", "fig3-vm", "--grid", "16x16", "--out", str(out)])
    assert code == 0
    for name in ("config.ini", "manifest.csv", "records.csv",
                 "n1.csv", "n2.csv", "p1.vtk", "v2.vtk"):
        assert (out / name).exists(), name
    with open(out / "manifest.csv") as fh:
        rows = list(csv.reader(fh))
    manifest = dict(zip(rows[0], rows[1]))
    assert manifest["model"] == "VM" and manifest["nx"] == "16"
    assert len(manifest["config_hash"]) == 16


def test_cli_runs_are_bitwise_reproducible(tmp_path):
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        assert run_cli(["run", "fig3-esvm", "--grid", "16x16",
                        "--out", str(out)]) == 0
        outs.append((out / "n1.csv").read_text())
    assert outs[0] == outs[1]


def test_cli_stationary_reports_coercivity(tmp_path, capsys):
    cfgfile = tmp_path / "stat.ini"
    cfgfile.write_text("""
[run]
model = STATIONARY
[grid]
nx = 24
ny = 24
[params]
beta1 = 1.0
beta2 = 1.0
[initial]
n1 = 1.0 -0.4 0.4 -0.4 0.4
n2 = 1.0 0.45 0.8 -0.4 0.4
""")
    out = tmp_path / "stat"
    assert run_cli(["stationary", str(cfgfile), "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "coercivity" in text
    for name in ("p.csv", "v1_u.csv", "v2_v.csv", "jumps.csv", "p.vtk"):
        assert (out / name).exists(), name


def test_cli_sweep_writes_rows(tmp_path):
    cfgfile = tmp_path / "sweep.ini"
    cfgfile.write_text("""
[run]
preset = fig3-esvm
[grid]
nx = 16
ny = 16
[control]
t_end = 0.004
[sweep]
eps = 0.1, 0.05
m = 30, 60
alpha = 1e-3, 5e-4
""")
    out = tmp_path / "sweep"
    assert run_cli(["sweep", str(cfgfile), "--out", str(out),
                    "--jobs", "2"]) == 0
    with open(out / "sweep.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "eps" and len(rows) == 3
    assert all(r[-1] == "" for r in rows[1:])  # no error column entries


def test_cli_limit_model_run(tmp_path):
    out = tmp_path / "lim"
    cfgfile = tmp_path / "lim.ini"
    cfgfile.write_text("""
[run]
preset = fig3-lesvm
[grid]
nx = 24
ny = 24
[control]
t_end = 0.01
""")
    assert run_cli(["run", str(cfgfile), "--out", str(out)]) == 0
    with open(out / "records.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "area1", "area2", "overlap_cells"]
    assert all(r[3] == "0" for r in rows[1:])
    assert (out / "partition.csv").exists()
