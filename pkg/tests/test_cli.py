"""Config parsing, dispatch, output formats, reproducibility."""

import json

import numpy as np
import pytest

from wehrlsim.cli import (
    TRAJECTORY_COLUMNS,
    fmt,
    list_scenarios,
    main,
    parse_config,
    read_config_file,
)
from wehrlsim.errors import ParseError, ValidationError

TINY_SPIN = ["simulate", "--set", "scenario=SpinStudy",
             "--set", "t_end=0.5", "--set", "sample_every=50"]


def test_read_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# a comment\n"
        "scenario = SpinStudy\n"
        "gamma = 0.25   # trailing comment\n"
        "n_levels = 6\n"
        "renormalize_trace = true\n"
        "\n"
    )
    values = read_config_file(path)
    assert values == {"scenario": "SpinStudy", "gamma": 0.25,
                      "n_levels": 6, "renormalize_trace": True}


def test_read_config_file_errors(tmp_path):
    bad_syntax = tmp_path / "a.cfg"
    bad_syntax.write_text("gamma 0.5\n")
    with pytest.raises(ParseError, match="a.cfg:1"):
        read_config_file(bad_syntax)
    unknown = tmp_path / "b.cfg"
    unknown.write_text("flux_capacitance = 1.21\n")
    with pytest.raises(ParseError, match="flux_capacitance"):
        read_config_file(unknown)
    bad_value = tmp_path / "c.cfg"
    bad_value.write_text("n_levels = many\n")
    with pytest.raises(ParseError, match="n_levels"):
        read_config_file(bad_value)


def test_empty_file_resolves_full_defaults(tmp_path):
    path = tmp_path / "empty.cfg"
    path.write_text("")
    cfg = parse_config(path=path,
                       set_pairs=["scenario=DoubleWellIsolated"],
                       environ={})
    assert cfg.n_levels == 25
    assert cfg.kappa == 15
    assert cfg.tau == 10.0
    assert cfg.calE == 10.0
    assert cfg.W == 1.0
    assert cfg.dt == 1e-3
    assert cfg.beta_init == 2.0
    assert cfg.beta_bath == 1.0
    assert (cfg.n_theta, cfg.n_phi) == (64, 64)


def test_validation_error_names_keys():
    with pytest.raises(ValidationError, match="gamma"):
        parse_config(set_pairs=["scenario=SpinStudy", "gamma=-1"], environ={})
    with pytest.raises(ValidationError, match="calE"):
        parse_config(set_pairs=["scenario=SpinStudy", "calE=1e6"], environ={})


def test_env_and_flag_precedence(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("scenario = SpinStudy\ngamma = 0.1\nlambda = 0.3\n")
    env = {"WEHRLSIM_GAMMA": "0.2"}
    cfg = parse_config(path=path, environ=env)
    assert cfg.gamma == 0.2      # env beats file
    assert cfg.Lambda == 0.3
    cfg2 = parse_config(path=path, set_pairs=["gamma=0.4"], environ=env)
    assert cfg2.gamma == 0.4     # flags beat env


def test_fmt_round_trip():
    rng = np.random.default_rng(17)
    for value in rng.normal(size=20) * 10.0 ** rng.integers(-8, 8, size=20):
        assert float(fmt(value)) == value
    assert fmt(True) == "1"
    assert fmt(3) == "3"


def test_list_scenarios_table():
    text = list_scenarios()
    lines = text.splitlines()
    assert len(lines) == 9
    assert "SpinStudy → Fig. 2" in text
    assert "LambdaSweep → Fig. 3" in text


def test_list_via_main(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert len(out.strip().splitlines()) == 9


def test_exit_code_config_error(tmp_path, capsys):
    rc = main(["simulate", "--set", "scenario=SpinStudy",
               "--set", "gamma=-2", "--out", str(tmp_path)])
    assert rc == 2
    assert "error[config]" in capsys.readouterr().err


def test_exit_code_wrong_verb(tmp_path):
    rc = main(["sweep", "--set", "scenario=SpinStudy",
               "--out", str(tmp_path)])
    assert rc == 2


def test_exit_code_numerical_failure(tmp_path, capsys):
    rc = main(["simulate", "--set", "scenario=DoubleWellCombined",
               "--set", "dt=0.05", "--set", "lambda=5.0",
               "--set", "t_end=2.0", "--out", str(tmp_path)])
    assert rc == 3
    assert "error[numerical]" in capsys.readouterr().err


def test_spin_study_file_contract(tmp_path):
    out = tmp_path / "run"
    assert main(TINY_SPIN + ["--out", str(out)]) == 0
    trajectories = sorted(p.name for p in out.glob("*_trajectory.csv"))
    assert trajectories == [
        "spin_study_combined_trajectory.csv",
        "spin_study_localization_trajectory.csv",
        "spin_study_thermal_trajectory.csv",
    ]
    assert (out / "manifest.json").exists()
    header = (out / trajectories[0]).read_text().splitlines()[0]
    assert header == ",".join(TRAJECTORY_COLUMNS)
    pops = (out / "spin_study_thermal_populations.csv").read_text()
    assert pops.splitlines()[0] == "time,level_index,probability"
    manifest = json.loads((out / "manifest.json").read_text())
    for name in manifest["outputs"]:
        assert (out / name).exists()


def test_byte_identical_reruns(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(TINY_SPIN + ["--out", str(out_a)]) == 0
    assert main(TINY_SPIN + ["--out", str(out_b)]) == 0
    for path in sorted(out_a.glob("*.csv")):
        assert path.read_bytes() == (out_b / path.name).read_bytes()


def test_manifest_round_trip(tmp_path):
    out_a = tmp_path / "a"
    assert main(TINY_SPIN + ["--out", str(out_a)]) == 0
    manifest = json.loads((out_a / "manifest.json").read_text())
    config_file = tmp_path / "replay.cfg"
    lines = [f"{key} = {fmt(value)}"
             for key, value in manifest["config"].items()
             if value is not None]
    config_file.write_text("\n".join(lines) + "\n")
    out_b = tmp_path / "b"
    assert main(["simulate", "--config", str(config_file),
                 "--out", str(out_b)]) == 0
    for path in sorted(out_a.glob("*.csv")):
        assert path.read_bytes() == (out_b / path.name).read_bytes()


def test_eigs_default_scenario(tmp_path):
    out = tmp_path / "eigs"
    assert main(["eigs", "--out", str(out)]) == 0
    names = {p.name for p in out.iterdir()}
    assert {"eigen_compare.csv", "potential.csv", "potential_discrete.csv",
            "manifest.json"} <= names


def test_expparams_json(tmp_path):
    out = tmp_path / "exp"
    assert main(["expparams", "--out", str(out)]) == 0
    payload = json.loads((out / "expparams.json").read_text())
    assert payload["Lambda_over_omega"] == pytest.approx(2.4e-4, rel=0.10)
    assert payload["gamma_exp"] == pytest.approx(5.9e-5, rel=0.10)
    assert "inputs" in payload


def test_doublewell_outputs_initial_distributions(tmp_path):
    out = tmp_path / "dw"
    rc = main(["simulate", "--set", "scenario=DoubleWellIsolated",
               "--set", "t_end=0.2", "--set", "n_levels=9",
               "--set", "kappa=6", "--set", "sample_every=100",
               "--out", str(out)])
    assert rc == 0
    text = (out / "doublewell_isolated_initial_distributions.csv").read_text()
    assert text.splitlines()[0] == "basis,level_index,eigenvalue,probability"
    assert "momentum" in text
