"""Scenario configuration, drivers and the experimental-rate calculator."""

import numpy as np
import pytest

from wehrlsim import ScenarioConfig, resolve_config
from wehrlsim.dynamics import TrajectoryRecord
from wehrlsim.errors import ValidationError, WindowTooLargeError
from wehrlsim.scenarios import (
    SCENARIOS,
    _map_points,
    _squeeze_point,
    compute_exp_params,
    detect_ness,
    run_doublewell,
    run_eigen_compare,
    run_lambda_sweep,
    run_spin_study,
    squeeze_grid,
)


def test_defaults_double_well():
    cfg = resolve_config(ScenarioConfig(scenario="DoubleWellIsolated"))
    assert cfg.n_levels == 25
    assert cfg.kappa == 15
    assert cfg.tau == 10.0
    assert cfg.calE == 10.0
    assert cfg.W == 1.0
    assert cfg.dt == 1e-3
    assert (cfg.n_theta, cfg.n_phi) == (64, 64)
    assert cfg.beta_init == 2.0
    assert cfg.beta_bath == 1.0
    assert cfg.t_end == 10.0
    assert (cfg.gamma, cfg.Lambda) == (0.0, 0.0)


def test_defaults_spin_study():
    cfg = resolve_config(ScenarioConfig(scenario="SpinStudy"))
    assert cfg.n_levels == 4
    assert (cfg.gamma, cfg.Lambda) == (0.5, 0.5)
    assert cfg.t_end == 40.0


def test_defaults_low_coupling_ties_lambda_to_gamma():
    cfg = resolve_config(ScenarioConfig(scenario="LowCoupling"))
    assert cfg.gamma == pytest.approx(1e-3)
    assert cfg.Lambda == pytest.approx(1e-2)
    cfg2 = resolve_config(ScenarioConfig(scenario="LowCoupling", gamma=1e-2))
    assert cfg2.Lambda == pytest.approx(1e-1)
    cfg3 = resolve_config(ScenarioConfig(scenario="LowCoupling", gamma=1e-2,
                                         Lambda=0.5))
    assert cfg3.Lambda == 0.5


def test_validation_collects_all_problems():
    with pytest.raises(ValidationError) as err:
        resolve_config(ScenarioConfig(scenario="SpinStudy", gamma=-1.0,
                                      calE=1e6))
    message = str(err.value)
    assert "gamma" in message
    assert "calE" in message
    assert len(err.value.problems) >= 2


def test_validation_unknown_scenario():
    with pytest.raises(ValidationError):
        resolve_config(ScenarioConfig(scenario="Nope"))


def make_record(n_samples, rhs_norm, pi_th, pi_lc, phi_th):
    states = [np.eye(2) / 2] * n_samples
    return TrajectoryRecord(
        times=np.arange(n_samples, dtype=float),
        states=states,
        states_before=[None] * n_samples,
        states_after=[None] * n_samples,
        dt=1.0,
        observables={
            "rhs_norm": np.full(n_samples, rhs_norm),
            "Pi_th": np.full(n_samples, pi_th),
            "Pi_lc": np.full(n_samples, pi_lc),
            "Phi_th": np.full(n_samples, phi_th),
        },
    )


def test_detect_ness_constant_trajectory():
    record = make_record(10, rhs_norm=0.0, pi_th=0.1, pi_lc=0.2, phi_th=0.3)
    report = detect_ness(record, window=5, tol=1e-3)
    assert report.is_ness
    assert report.residual == pytest.approx(0.0, abs=1e-15)


def test_detect_ness_transient():
    record = make_record(10, rhs_norm=0.5, pi_th=0.3, pi_lc=0.2, phi_th=0.1)
    report = detect_ness(record, window=5, tol=1e-3)
    assert not report.is_ness


def test_detect_ness_window_guard():
    record = make_record(4, 0.0, 0.0, 0.0, 0.0)
    with pytest.raises(WindowTooLargeError):
        detect_ness(record, window=5, tol=1e-3)


def test_exp_params_reference_values():
    cfg = resolve_config(ScenarioConfig(scenario="ExpParams"))
    out = compute_exp_params(cfg)
    assert out["Lambda_over_omega"] == pytest.approx(2.4e-4, rel=0.10)
    assert out["gamma_exp"] == pytest.approx(5.9e-5, rel=0.10)
    assert out["thermalization_rate_over_omega"] == pytest.approx(2e-3,
                                                                  rel=0.20)


def test_squeeze_grid_step():
    cfg = resolve_config(ScenarioConfig(scenario="SqueezeSweep"))
    grid = squeeze_grid(cfg)
    assert grid[0] == -1.0 and grid[-1] == 1.0
    assert np.allclose(np.diff(grid), 0.05)
    assert 0.0 in grid


def test_eigen_compare_tables():
    cfg = resolve_config(ScenarioConfig(scenario="EigenCompare"))
    tables = run_eigen_compare(cfg)
    eig = tables["eigenenergies"]
    assert eig.columns == ("time", "level_index", "energy_continuous",
                           "energy_spin")
    assert len(eig.rows) == 5 * cfg.k_levels
    times = sorted({row["time"] for row in eig.rows})
    assert times == [0.0, 2.5, 5.0, 7.5, 10.0]
    assert {row["time"] for row in tables["potential"].rows} == set(times)
    n_disc = len(tables["potential_discrete"].rows)
    assert n_disc == 5 * cfg.n_levels


def tiny_spin_cfg(**overrides):
    return resolve_config(ScenarioConfig(scenario="SpinStudy", t_end=1.0,
                                         sample_every=100, **overrides))


def test_spin_study_smoke():
    runs = run_spin_study(tiny_spin_cfg())
    assert set(runs) == {"thermal", "localization", "combined"}
    for record in runs.values():
        assert np.all(np.diff(record.times) > 0)
        assert record.populations.shape == (len(record), 4)
        np.testing.assert_allclose(record.populations.sum(axis=1), 1.0,
                                   atol=1e-8)
        for key in ("energy", "S_Q", "dS_U", "Pi_th", "coherence_l1",
                    "fidelity_ref"):
            assert len(record.observables[key]) == len(record)
    # the isolated-of-dissipator branches differ
    assert not np.allclose(runs["thermal"].observables["S_Q"],
                           runs["localization"].observables["S_Q"])


def test_spin_study_deterministic():
    a = run_spin_study(tiny_spin_cfg())
    b = run_spin_study(tiny_spin_cfg())
    for branch in a:
        np.testing.assert_array_equal(a[branch].observables["S_Q"],
                                      b[branch].observables["S_Q"])
        np.testing.assert_array_equal(a[branch].final_state,
                                      b[branch].final_state)


def test_doublewell_smoke_records_initial_distributions():
    cfg = resolve_config(ScenarioConfig(scenario="DoubleWellIsolated",
                                        n_levels=9, kappa=6, t_end=0.5,
                                        sample_every=100))
    record = run_doublewell(cfg, isolated=True)
    assert set(record.initial_distributions) == {"position", "momentum"}
    x, px = record.initial_distributions["position"]
    assert x.shape == px.shape == (9,)
    assert px.sum() == pytest.approx(1.0, abs=1e-8)


def _tiny_lambda_cfg(workers):
    # tau shrinks the steady-state cap so the smoke run stays short
    return resolve_config(ScenarioConfig(scenario="LambdaSweep", tau=0.2,
                                         t_end=2.0, sample_every=100,
                                         sweep_points=3, workers=workers))


def test_lambda_sweep_smoke_and_worker_order():
    serial = run_lambda_sweep(_tiny_lambda_cfg(workers=1))
    parallel = run_lambda_sweep(_tiny_lambda_cfg(workers=2))
    assert [row["sweep_param"] for row in serial.rows] \
        == [row["sweep_param"] for row in parallel.rows]
    for row_a, row_b in zip(serial.rows, parallel.rows):
        assert row_a == row_b


def _square(x):
    return x * x


def test_map_points_preserves_order():
    out = _map_points(_square, [3, 1, 2], workers=2)
    assert out == [9, 1, 4]


def test_squeeze_point_zeta_zero_matches_plain_run():
    cfg = resolve_config(ScenarioConfig(scenario="SqueezeSweep", t_end=1.0,
                                        n_levels=9, kappa=6))
    row_zero = _squeeze_point((cfg, 0.0))
    row_again = _squeeze_point((cfg, 0.0))
    assert row_zero == row_again
    assert row_zero["sweep_param"] == 0.0


def test_scenarios_enum_size():
    assert len(SCENARIOS) == 9
