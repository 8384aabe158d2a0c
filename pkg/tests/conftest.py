"""Shared fixtures.

The heavy scenario runs (full spin study, sweeps, double-well ramps) are
session-scoped and timed, so the physics tests and the acceptance module
share one run of each scenario and the acceptance module can still check
the wall-clock budgets.
"""

import time

import numpy as np
import pytest
from hypothesis import settings

from wehrlsim import ScenarioConfig, SphereGrid, resolve_config
from wehrlsim.scenarios import (
    run_coupling_sweep,
    run_doublewell,
    run_lambda_sweep,
    run_low_coupling,
    run_spin_study,
    run_squeeze_sweep,
)

settings.register_profile("suite", deadline=None, max_examples=25)
settings.load_profile("suite")


def timed(fn, *args, **kwargs):
    start = time.monotonic()
    result = fn(*args, **kwargs)
    return result, time.monotonic() - start


@pytest.fixture(scope="session")
def grid64():
    return SphereGrid.build(64, 64)


@pytest.fixture(scope="session")
def grid128():
    return SphereGrid.build(128, 128)


def random_density_matrix(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


@pytest.fixture(scope="session")
def spin_study():
    cfg = resolve_config(ScenarioConfig(scenario="SpinStudy"))
    runs, elapsed = timed(run_spin_study, cfg)
    return {"cfg": cfg, "runs": runs, "seconds": elapsed}


@pytest.fixture(scope="session")
def lambda_sweep():
    cfg = resolve_config(ScenarioConfig(scenario="LambdaSweep", workers=2))
    table, elapsed = timed(run_lambda_sweep, cfg)
    return {"cfg": cfg, "table": table, "seconds": elapsed}


@pytest.fixture(scope="session")
def doublewell_isolated():
    cfg = resolve_config(ScenarioConfig(scenario="DoubleWellIsolated"))
    record, elapsed = timed(run_doublewell, cfg, isolated=True)
    return {"cfg": cfg, "record": record, "seconds": elapsed}


@pytest.fixture(scope="session")
def doublewell_combined():
    cfg = resolve_config(ScenarioConfig(scenario="DoubleWellCombined"))
    record, elapsed = timed(run_doublewell, cfg, isolated=False)
    return {"cfg": cfg, "record": record, "seconds": elapsed}


@pytest.fixture(scope="session")
def coupling_sweep():
    # geomspace over [1e-4, 1e-1] lands exactly on the two coupling
    # values the threshold criteria quote
    cfg = resolve_config(ScenarioConfig(scenario="CouplingSweep",
                                        sweep_min=1e-4, sweep_max=1e-1,
                                        sweep_points=4, workers=2))
    table, elapsed = timed(run_coupling_sweep, cfg)
    return {"cfg": cfg, "table": table, "seconds": elapsed}


@pytest.fixture(scope="session")
def low_coupling_weak():
    cfg = resolve_config(ScenarioConfig(scenario="LowCoupling", gamma=1e-3))
    record, elapsed = timed(run_low_coupling, cfg)
    return {"cfg": cfg, "record": record, "seconds": elapsed}


@pytest.fixture(scope="session")
def low_coupling_strong():
    cfg = resolve_config(ScenarioConfig(scenario="LowCoupling", gamma=1e-2))
    record, elapsed = timed(run_low_coupling, cfg)
    return {"cfg": cfg, "record": record, "seconds": elapsed}


@pytest.fixture(scope="session")
def squeeze_sweep():
    cfg = resolve_config(ScenarioConfig(scenario="SqueezeSweep", workers=2))
    table, elapsed = timed(run_squeeze_sweep, cfg)
    return {"cfg": cfg, "table": table, "seconds": elapsed}
