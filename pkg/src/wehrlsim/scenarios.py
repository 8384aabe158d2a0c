"""Scenario drivers: study-case runs, sweeps, references, the rate calculator.

Each driver assembles operators, wiring and initial state from a
ScenarioConfig, propagates, and attaches the full observable record that
the command line layer serializes.  Sweep points are independent and can
be dispatched to worker processes; aggregation always preserves the
input ordering.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import (
    IntegratorConfig,
    LindbladTerms,
    TrajectoryRecord,
    oscillator_ladder_terms,
    propagate,
    spin_ladder_terms,
    squeeze_state,
    thermal_state,
)
from .errors import ValidationError, WindowTooLargeError
from .observables import (
    ContinuousGrid,
    continuous_eigs,
    fidelity,
    l1_coherence,
    mean_energy,
    populations,
    purity,
    sorted_eigenbasis,
    von_neumann_entropy,
)
from .operators import (
    LOCALIZATION_OPERATORS,
    DissipatorParams,
    DoubleWellHamiltonian,
    PotentialParams,
    SpinBasis,
    build_spin_operators,
    quadrature_operators,
    scalar_potential,
)
from .phasespace import (
    SphereGrid,
    rate_decomposition,
    stationarity_residual,
    wehrl_entropy_of_state,
)

SCENARIOS = (
    "SpinStudy",
    "LambdaSweep",
    "DoubleWellIsolated",
    "DoubleWellCombined",
    "CouplingSweep",
    "LowCoupling",
    "SqueezeSweep",
    "EigenCompare",
    "ExpParams",
)

CAL_E_CAP = 200.0
BOLTZMANN = 1.380649e-23
HBAR = 1.054571817e-34
ATOMIC_MASS = 1.66053906660e-27


@dataclass(frozen=True)
class ScenarioConfig:
    """Flat, fully explicit run configuration.

    Fields left as None are filled with scenario-dependent defaults by
    resolve_config.
    """

    scenario: str = "DoubleWellIsolated"
    n_levels: int | None = None
    kappa: int = 15
    calE: float = 10.0
    W: float = 1.0
    tau: float = 10.0
    mass: float = 1.0
    omega: float = 1.0
    gamma: float | None = None
    Lambda: float | None = None
    beta_bath: float = 1.0
    beta_init: float = 2.0
    zeta: float = 0.0
    localization_operator: str = "bare_jx"
    dt: float = 1e-3
    t_end: float | None = None
    sample_every: int | None = None
    renormalize_trace: bool = False
    n_theta: int = 64
    n_phi: int = 64
    sweep_min: float | None = None
    sweep_max: float | None = None
    sweep_points: int | None = None
    zeta_step: float = 0.05
    ness_window: int = 8
    ness_tol: float = 1e-3
    ness_cap_factor: float = 16.0
    workers: int | None = None
    half_width: float = 8.0
    n_points: int = 1024
    k_levels: int = 8
    radius: float = 50e-9
    wavelength: float = 1550e-9
    numerical_aperture: float = 0.75
    epsilon: float = 2.1
    pressure: float = 3e-7
    gas_temperature: float = 60.0
    gas_molecular_mass: float = 28.97 * ATOMIC_MASS
    particle_mass: float = 2650.0 * (4 / 3) * math.pi * (50e-9) ** 3
    trap_frequency: float = 2 * math.pi * 77.6e3


_SCENARIO_DEFAULTS = {
    "SpinStudy": dict(n_levels=4, gamma=0.5, Lambda=0.5, t_end="4tau",
                      sample_every=10),
    "LambdaSweep": dict(n_levels=4, gamma=0.5, Lambda=0.5, t_end="4tau",
                        sample_every=250, sweep_min=0.05, sweep_max=50.0,
                        sweep_points=12),
    "DoubleWellIsolated": dict(n_levels=25, gamma=0.0, Lambda=0.0,
                               t_end="tau", sample_every=25),
    "DoubleWellCombined": dict(n_levels=25, gamma=0.5, Lambda=0.5,
                               t_end="tau", sample_every=25),
    "CouplingSweep": dict(n_levels=25, gamma=1e-4, Lambda=1e-3, t_end="tau",
                          sample_every=500, sweep_min=1e-5, sweep_max=1.0,
                          sweep_points=11),
    "LowCoupling": dict(n_levels=25, gamma=1e-3, Lambda="10gamma",
                        t_end="4tau", sample_every=25),
    "SqueezeSweep": dict(n_levels=25, gamma=1e-3, Lambda="10gamma",
                         t_end="tau", sample_every=1000),
    "EigenCompare": dict(n_levels=25, gamma=0.0, Lambda=0.0, t_end="tau",
                         sample_every=1000),
    "ExpParams": dict(n_levels=25, gamma=0.0, Lambda=0.0, t_end="tau",
                      sample_every=1000),
}


def resolve_config(cfg: ScenarioConfig) -> ScenarioConfig:
    """Fill scenario defaults and validate; raises ValidationError."""
    problems = []
    if cfg.scenario not in SCENARIOS:
        raise ValidationError(
            [f"scenario must be one of {', '.join(SCENARIOS)}, "
             f"got {cfg.scenario!r}"]
        )
    defaults = _SCENARIO_DEFAULTS[cfg.scenario]
    updates = {}
    for name in ("n_levels", "gamma", "Lambda", "t_end", "sample_every",
                 "sweep_min", "sweep_max", "sweep_points"):
        if getattr(cfg, name) is None and name in defaults:
            value = defaults[name]
            if value == "tau":
                value = cfg.tau
            elif value == "4tau":
                value = 4 * cfg.tau
            elif value == "10gamma":
                value = 10 * (cfg.gamma if cfg.gamma is not None
                              else defaults["gamma"])
            updates[name] = value
    if cfg.workers is None:
        updates["workers"] = os.cpu_count() or 1
    cfg = replace(cfg, **updates)

    def check(cond, message):
        if not cond:
            problems.append(message)

    check(cfg.n_levels is not None and cfg.n_levels >= 2,
          "n_levels must be at least 2")
    check(cfg.kappa >= 1, "kappa must be at least 1")
    check(cfg.calE > 0, "calE must be positive")
    check(cfg.calE <= CAL_E_CAP,
          f"calE is capped at {CAL_E_CAP:g} (larger wells need far more "
          "levels than this solver supports)")
    check(cfg.W > 0, "W must be positive")
    check(cfg.tau > 0, "tau must be positive")
    check(cfg.mass > 0, "mass must be positive")
    check(cfg.omega > 0, "omega must be positive")
    check(cfg.gamma >= 0, "gamma must be nonnegative")
    check(cfg.Lambda >= 0, "Lambda must be nonnegative")
    check(cfg.beta_bath > 0, "beta_bath must be positive")
    check(cfg.beta_init >= 0, "beta_init must be nonnegative")
    check(abs(cfg.zeta) <= 1, "zeta must lie in [-1, 1]")
    check(cfg.localization_operator in LOCALIZATION_OPERATORS,
          f"localization_operator must be one of {LOCALIZATION_OPERATORS}")
    check(cfg.dt > 0, "dt must be positive")
    check(cfg.t_end >= 0, "t_end must be nonnegative")
    check(cfg.sample_every >= 1, "sample_every must be a positive integer")
    check(cfg.n_theta >= 8, "n_theta must be at least 8")
    check(cfg.n_phi >= 8 and cfg.n_phi % 2 == 0,
          "n_phi must be an even number of at least 8")
    if cfg.sweep_min is not None or cfg.sweep_max is not None:
        check(cfg.sweep_min is not None and cfg.sweep_min > 0,
              "sweep_min must be positive")
        check(cfg.sweep_max is not None and cfg.sweep_max > cfg.sweep_min,
              "sweep_max must exceed sweep_min")
        check(cfg.sweep_points is not None and cfg.sweep_points >= 2,
              "sweep_points must be at least 2")
    check(0 < cfg.zeta_step <= 0.1, "zeta_step must lie in (0, 0.1]")
    check(cfg.ness_window >= 2, "ness_window must be at least 2")
    check(cfg.ness_tol > 0, "ness_tol must be positive")
    check(cfg.ness_cap_factor >= 1, "ness_cap_factor must be at least 1")
    check(cfg.workers >= 1, "workers must be at least 1")
    check(cfg.k_levels <= 12, "k_levels is limited to 12")
    check(cfg.n_points >= 128, "n_points must be at least 128")
    check(cfg.half_width > 0, "half_width must be positive")
    for name in ("radius", "wavelength", "numerical_aperture", "pressure",
                 "gas_temperature", "gas_molecular_mass", "particle_mass",
                 "trap_frequency"):
        check(getattr(cfg, name) > 0, f"{name} must be positive")
    check(cfg.epsilon > 1, "epsilon must exceed 1")
    if problems:
        raise ValidationError(problems)
    return cfg


@dataclass(frozen=True)
class StaticHamiltonian:
    """Time-independent Hamiltonian as a picklable callable."""

    matrix: np.ndarray

    def __call__(self, t: float) -> np.ndarray:
        return self.matrix


@dataclass
class System:
    """Operators, wiring and quadrature grid shared by one scenario run."""

    basis: SpinBasis
    spin_ops: object
    quad: object
    hamiltonian: object
    terms: LindbladTerms
    grid: SphereGrid
    potential: PotentialParams | None = None


def _loc_op(cfg, spin_ops, quad):
    if cfg.localization_operator == "bare_jx":
        return spin_ops.jx
    return quad.jx_prime


def build_spin_system(cfg: ScenarioConfig, gamma: float, lam: float) -> System:
    """H = omega * Jz with the spin-convention thermal wiring."""
    basis = SpinBasis(cfg.n_levels)
    spin_ops = build_spin_operators(basis)
    quad = quadrature_operators(basis, cfg.kappa)
    diss = DissipatorParams(gamma=gamma, Lambda=lam, beta_bath=cfg.beta_bath,
                            localization_operator=cfg.localization_operator)
    terms = spin_ladder_terms(diss, spin_ops, _loc_op(cfg, spin_ops, quad))
    ham = StaticHamiltonian(cfg.omega * spin_ops.jz)
    grid = SphereGrid.build(cfg.n_theta, cfg.n_phi)
    return System(basis, spin_ops, quad, ham, terms, grid)


def build_oscillator_system(cfg: ScenarioConfig, gamma: float,
                            lam: float) -> System:
    """Ramped double-well Hamiltonian with occupation-damping wiring."""
    basis = SpinBasis(cfg.n_levels)
    spin_ops = build_spin_operators(basis)
    quad = quadrature_operators(basis, cfg.kappa)
    potential = PotentialParams(calE=cfg.calE, W=cfg.W, tau=cfg.tau,
                                mass=cfg.mass, omega=cfg.omega)
    ham = DoubleWellHamiltonian(basis, cfg.kappa, potential)
    diss = DissipatorParams(gamma=gamma, Lambda=lam, beta_bath=cfg.beta_bath,
                            localization_operator=cfg.localization_operator)
    terms = oscillator_ladder_terms(diss, spin_ops,
                                    _loc_op(cfg, spin_ops, quad))
    grid = SphereGrid.build(cfg.n_theta, cfg.n_phi)
    return System(basis, spin_ops, quad, ham, terms, grid,
                  potential=potential)


def _integrator(cfg: ScenarioConfig, t_end=None, sample_every=None, dt=None):
    return IntegratorConfig(
        dt=cfg.dt if dt is None else dt,
        t_end=cfg.t_end if t_end is None else t_end,
        sample_every=cfg.sample_every if sample_every is None else sample_every,
        renormalize_trace=cfg.renormalize_trace,
    )


def _stable_dt(cfg: ScenarioConfig, system: System) -> float:
    """Step size capped by the stiffest mode of the generator.

    The fastest decay is the localization rate between the extreme
    eigenvalues of the localization operator plus the strongest thermal
    ladder rate; sweep points can push these far beyond what the
    configured step handles, so the step is reduced to keep the product
    rate * dt at 1 (the RK4 stability edge sits at 2.79).  Pure
    functions of the config, so runs stay reproducible.
    """
    diss = system.terms.diss
    loc_eigs = np.linalg.eigvalsh(system.terms.loc_op)
    rate = diss.Lambda * (loc_eigs[-1] - loc_eigs[0]) ** 2
    j = system.basis.j
    rate += diss.gamma * (2 * diss.nbar + 1) * (j * (j + 1) + j)
    h_eigs = np.linalg.eigvalsh(system.hamiltonian(0.0))
    rate += h_eigs[-1] - h_eigs[0]
    if rate * cfg.dt <= 1.0:
        return cfg.dt
    return 1.0 / rate


def _stiff_integrator(cfg: ScenarioConfig, system: System) -> IntegratorConfig:
    dt = _stable_dt(cfg, system)
    scale = cfg.dt / dt
    sample_every = max(1, int(round(cfg.sample_every * scale)))
    return _integrator(cfg, dt=dt, sample_every=sample_every)


def analyze_trajectory(record: TrajectoryRecord, system: System,
                       ref_state: np.ndarray, basis_op: np.ndarray) -> None:
    """Attach the full per-sample observable set to a propagated record.

    basis_op fixes the eigenbasis used for both populations and the l1
    coherence.  The centered entropy-rate difference ds_fd uses the
    one-step neighbour states and is NaN at the trajectory endpoints.
    """
    ham, terms, grid = system.hamiltonian, system.terms, system.grid
    n_samples = len(record)
    cols = {name: np.empty(n_samples) for name in (
        "energy", "S_Q", "S_vN", "dS_U", "dS_th", "dS_lc",
        "Pi_th", "Phi_th", "Pi_lc", "coherence_l1", "fidelity_ref",
        "purity", "ds_fd", "residual",
    )}
    pops = np.empty((n_samples, system.basis.n_levels))
    for i in range(n_samples):
        rho, t = record.states[i], record.times[i]
        rates = rate_decomposition(rho, t, ham, terms, grid)
        cols["energy"][i] = mean_energy(rho, ham(t))
        cols["S_Q"][i] = wehrl_entropy_of_state(rho, grid)
        cols["S_vN"][i] = von_neumann_entropy(rho)
        cols["dS_U"][i] = rates.ds_u
        cols["dS_th"][i] = rates.ds_th
        cols["dS_lc"][i] = rates.ds_lc
        cols["Pi_th"][i] = rates.pi_th
        cols["Phi_th"][i] = rates.phi_th
        cols["Pi_lc"][i] = rates.pi_lc
        cols["residual"][i] = stationarity_residual(rates)
        cols["coherence_l1"][i] = l1_coherence(rho, basis_op)
        cols["fidelity_ref"][i] = fidelity(rho, ref_state)
        cols["purity"][i] = purity(rho)
        before = record.states_before[i]
        after = record.states_after[i]
        if before is None or after is None:
            cols["ds_fd"][i] = np.nan
        else:
            s_minus = wehrl_entropy_of_state(before, grid)
            s_plus = wehrl_entropy_of_state(after, grid)
            cols["ds_fd"][i] = (s_plus - s_minus) / (2 * record.dt)
        pops[i] = populations(rho, basis_op)
    record.observables.update(cols)
    record.populations = pops


@dataclass(frozen=True)
class NessReport:
    is_ness: bool
    residual: float
    max_rate: float
    rhs_norm: float


def detect_ness(record: TrajectoryRecord, window: int,
                tol: float) -> NessReport:
    """Steady-state test over the trailing ``window`` samples.

    Declares a NESS when the equation-of-motion norm stays below tol and
    the rate balance Pi_th + Pi_lc - Phi_th stays below tol relative to
    the magnitude of the rates themselves.
    """
    if window > len(record):
        raise WindowTooLargeError(
            f"window {window} exceeds the {len(record)} recorded samples"
        )
    obs = record.observables
    tail = slice(len(record) - window, None)
    rhs_tail = obs["rhs_norm"][tail]
    residual = obs["Pi_th"][tail] + obs["Pi_lc"][tail] - obs["Phi_th"][tail]
    max_rate = float(np.nanmax(np.abs(
        np.stack([obs["Pi_th"][tail], obs["Pi_lc"][tail],
                  obs["Phi_th"][tail]])
    )))
    quiet = bool(np.nanmax(rhs_tail) < tol)
    balanced = bool(np.nanmax(np.abs(residual)) <= tol * max_rate)
    return NessReport(
        is_ness=quiet and balanced,
        residual=float(residual[-1]),
        max_rate=max_rate,
        rhs_norm=float(rhs_tail[-1]),
    )


def _tail_rates(record: TrajectoryRecord, system: System, window: int) -> None:
    """Fill Pi/Phi arrays (NaN outside the trailing window) for NESS tests."""
    n = len(record)
    for key in ("Pi_th", "Phi_th", "Pi_lc"):
        if key not in record.observables:
            record.observables[key] = np.full(n, np.nan)
    start = max(0, n - window)
    for i in range(start, n):
        rates = rate_decomposition(record.states[i], record.times[i],
                                   system.hamiltonian, system.terms,
                                   system.grid)
        record.observables["Pi_th"][i] = rates.pi_th
        record.observables["Phi_th"][i] = rates.phi_th
        record.observables["Pi_lc"][i] = rates.pi_lc


def _propagate_to_ness(rho0, cfg: ScenarioConfig, system: System):
    """Propagate, then keep extending (doubling) until a NESS or the cap.

    Returns (record, NessReport).  The record's rate arrays are filled on
    the trailing window only.
    """
    record = propagate(rho0, _integrator(cfg), system.hamiltonian,
                       system.terms)
    cap = cfg.ness_cap_factor * cfg.tau
    while True:
        _tail_rates(record, system, cfg.ness_window)
        report = detect_ness(record, cfg.ness_window, cfg.ness_tol)
        total = record.times[-1]
        if report.is_ness or total + cfg.dt > cap:
            return record, report
        # rate arrays are only filled on the old tail; drop them so the
        # extended record can be re-filled consistently
        for key in ("Pi_th", "Phi_th", "Pi_lc"):
            record.observables.pop(key, None)
        extension = min(total, cap - total)
        segment = propagate(record.final_state,
                            _integrator(cfg, t_end=extension),
                            system.hamiltonian, system.terms,
                            t0=float(total))
        record.extend(segment)


# ----------------------------------------------------------------- scenarios

def run_spin_study(cfg: ScenarioConfig) -> dict[str, TrajectoryRecord]:
    """Four-level study case: thermal-only, localization-only, combined."""
    couplings = {
        "thermal": (cfg.gamma, 0.0),
        "localization": (0.0, cfg.Lambda),
        "combined": (cfg.gamma, cfg.Lambda),
    }
    runs = {}
    for name, (g, lam) in couplings.items():
        system = build_spin_system(cfg, g, lam)
        h0 = system.hamiltonian.matrix
        rho0 = thermal_state(h0, cfg.beta_init)
        if name == "localization":
            ref = np.eye(cfg.n_levels) / cfg.n_levels
        else:
            ref = thermal_state(h0, cfg.beta_bath)
        record = propagate(rho0, _integrator(cfg), system.hamiltonian,
                           system.terms)
        analyze_trajectory(record, system, ref, system.spin_ops.jz.real)
        runs[name] = record
    return runs


@dataclass(frozen=True)
class SweepTable:
    columns: tuple
    rows: list


def _lambda_point(args) -> dict:
    cfg, lam = args
    system = build_spin_system(cfg, cfg.gamma, lam)
    h0 = system.hamiltonian.matrix
    rho0 = thermal_state(h0, cfg.beta_init)
    record, report = _propagate_to_ness(rho0, cfg, system)
    rho_f = record.final_state
    gibbs = thermal_state(h0, cfg.beta_bath)
    rates = rate_decomposition(rho_f, float(record.times[-1]),
                               system.hamiltonian, system.terms, system.grid)
    return {
        "sweep_param": lam,
        "coherence_l1": l1_coherence(rho_f, system.spin_ops.jz.real),
        "fidelity_thermal": fidelity(rho_f, gibbs),
        "S_Q": wehrl_entropy_of_state(rho_f, system.grid),
        "Pi_th": rates.pi_th,
        "Phi_th": rates.phi_th,
        "Pi_lc": rates.pi_lc,
        "residual": stationarity_residual(rates),
        "is_ness": int(report.is_ness),
        "t_end": float(record.times[-1]),
        "S_Q_thermal_ref": wehrl_entropy_of_state(gibbs, system.grid),
        "S_Q_localized_ref": wehrl_entropy_of_state(
            np.eye(cfg.n_levels) / cfg.n_levels, system.grid),
    }


LAMBDA_SWEEP_COLUMNS = (
    "sweep_param", "coherence_l1", "fidelity_thermal", "S_Q", "Pi_th",
    "Phi_th", "Pi_lc", "residual", "is_ness", "t_end", "S_Q_thermal_ref",
    "S_Q_localized_ref",
)


def _map_points(fn, arglist, workers: int):
    if workers > 1 and len(arglist) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, arglist))
    return [fn(args) for args in arglist]


def run_lambda_sweep(cfg: ScenarioConfig) -> SweepTable:
    """Localization-strength scan of the combined spin study steady state."""
    lams = np.geomspace(cfg.sweep_min, cfg.sweep_max, cfg.sweep_points)
    rows = _map_points(_lambda_point, [(cfg, float(lam)) for lam in lams],
                       cfg.workers)
    return SweepTable(LAMBDA_SWEEP_COLUMNS, rows)


def run_doublewell(cfg: ScenarioConfig, isolated: bool) -> TrajectoryRecord:
    """Ramp through the double-well, either isolated or with both baths."""
    gamma, lam = (0.0, 0.0) if isolated else (cfg.gamma, cfg.Lambda)
    system = build_oscillator_system(cfg, gamma, lam)
    rho0 = thermal_state(system.hamiltonian(0.0), cfg.beta_init)
    if cfg.zeta:
        rho0 = squeeze_state(rho0, cfg.zeta, system.basis, cfg.kappa)
    ref = rho0 if isolated else thermal_state(system.hamiltonian(0.0),
                                              cfg.beta_bath)
    record = propagate(rho0, _integrator(cfg), system.hamiltonian,
                       system.terms)
    analyze_trajectory(record, system, ref, system.quad.jx_prime)
    record.initial_distributions = {
        "position": (np.linalg.eigvalsh(system.quad.jx_prime),
                     populations(rho0, system.quad.jx_prime)),
        "momentum": (np.linalg.eigvalsh(system.quad.jy_prime),
                     populations(rho0, system.quad.jy_prime)),
    }
    return record


def run_low_coupling(cfg: ScenarioConfig) -> TrajectoryRecord:
    """Weak-coupling double-well run, extended past the ramp."""
    return run_doublewell(cfg, isolated=False)


def _isolated_final_state(cfg: ScenarioConfig) -> np.ndarray:
    system = build_oscillator_system(cfg, 0.0, 0.0)
    rho0 = thermal_state(system.hamiltonian(0.0), cfg.beta_init)
    if cfg.zeta:
        rho0 = squeeze_state(rho0, cfg.zeta, system.basis, cfg.kappa)
    record = propagate(rho0, _integrator(cfg, sample_every=10 ** 9),
                       system.hamiltonian, system.terms)
    return record.final_state


def _coupling_point(args) -> dict:
    cfg, branch, coupling, rho_ref = args
    gamma, lam = {
        "thermal": (coupling, 0.0),
        "localization": (0.0, coupling),
        "combined": (coupling, 10 * coupling),
    }[branch]
    system = build_oscillator_system(cfg, gamma, lam)
    rho0 = thermal_state(system.hamiltonian(0.0), cfg.beta_init)
    record = propagate(rho0, _integrator(cfg), system.hamiltonian,
                       system.terms)
    _tail_rates(record, system, cfg.ness_window)
    report = detect_ness(record, min(cfg.ness_window, len(record)),
                         cfg.ness_tol)
    rho_f = record.final_state
    return {
        "sweep_param": coupling,
        "branch": branch,
        "fidelity_isolated": fidelity(rho_f, rho_ref),
        "coherence_l1": l1_coherence(rho_f, system.quad.jx_prime),
        "S_Q": wehrl_entropy_of_state(rho_f, system.grid),
        "is_ness": int(report.is_ness),
    }


COUPLING_SWEEP_COLUMNS = (
    "sweep_param", "branch", "fidelity_isolated", "coherence_l1", "S_Q",
    "is_ness",
)

COUPLING_BRANCHES = ("thermal", "localization", "combined")


def run_coupling_sweep(cfg: ScenarioConfig) -> SweepTable:
    """Final-state comparison against the isolated ramp, per coupling.

    Rows report the state at the end of the ramp (the isolated reference
    is only defined there); steady-state extension is deliberately not
    applied.
    """
    couplings = np.geomspace(cfg.sweep_min, cfg.sweep_max, cfg.sweep_points)
    rho_ref = _isolated_final_state(cfg)
    arglist = [(cfg, branch, float(c), rho_ref)
               for branch in COUPLING_BRANCHES for c in couplings]
    rows = _map_points(_coupling_point, arglist, cfg.workers)
    return SweepTable(COUPLING_SWEEP_COLUMNS, rows)


def _squeeze_point(args) -> dict:
    cfg, zeta = args
    system = build_oscillator_system(cfg, cfg.gamma, cfg.Lambda)
    rho0 = thermal_state(system.hamiltonian(0.0), cfg.beta_init)
    rho0 = squeeze_state(rho0, zeta, system.basis, cfg.kappa)
    record = propagate(rho0, _integrator(cfg, sample_every=10 ** 9),
                       system.hamiltonian, system.terms)
    rho_f = record.final_state
    t_f = float(record.times[-1])
    return {
        "sweep_param": zeta,
        "energy": mean_energy(rho_f, system.hamiltonian(t_f)),
        "coherence_l1": l1_coherence(rho_f, system.quad.jx_prime),
        "S_Q": wehrl_entropy_of_state(rho_f, system.grid),
    }


SQUEEZE_SWEEP_COLUMNS = ("sweep_param", "energy", "coherence_l1", "S_Q")


def squeeze_grid(cfg: ScenarioConfig) -> np.ndarray:
    n_half = int(round(1.0 / cfg.zeta_step))
    return np.linspace(-1.0, 1.0, 2 * n_half + 1)


def run_squeeze_sweep(cfg: ScenarioConfig) -> SweepTable:
    """Initial-squeezing scan of the weak-coupling ramp outcome."""
    zetas = squeeze_grid(cfg)
    rows = _map_points(_squeeze_point, [(cfg, float(z)) for z in zetas],
                       cfg.workers)
    return SweepTable(SQUEEZE_SWEEP_COLUMNS, rows)


EIGEN_COLUMNS = ("time", "level_index", "energy_continuous", "energy_spin")
POTENTIAL_COLUMNS = ("time", "x", "v")


def run_eigen_compare(cfg: ScenarioConfig) -> dict[str, SweepTable]:
    """Instantaneous spectra of the spin and continuous pictures.

    Returns three tables: the eigenvalue comparison, the potential on a
    uniform position grid, and the potential at the Jx' eigenvalues.
    """
    system = build_oscillator_system(cfg, 0.0, 0.0)
    params = system.potential
    grid = ContinuousGrid(cfg.half_width, cfg.n_points)
    times = [0.0, cfg.tau / 4, cfg.tau / 2, 3 * cfg.tau / 4, cfg.tau]
    eig_rows, pot_rows, disc_rows = [], [], []
    x_plot = np.linspace(-cfg.half_width, cfg.half_width, 161)
    x_disc = system.hamiltonian.jx_prime_eigenvalues
    for t in times:
        e_cont = continuous_eigs(params, t, grid, cfg.k_levels)
        e_spin = np.linalg.eigvalsh(system.hamiltonian(t))[:cfg.k_levels]
        for k in range(cfg.k_levels):
            eig_rows.append({"time": t, "level_index": k,
                             "energy_continuous": float(e_cont[k]),
                             "energy_spin": float(e_spin[k])})
        v_plot = scalar_potential(x_plot, params, t)
        pot_rows += [{"time": t, "x": float(x), "v": float(v)}
                     for x, v in zip(x_plot, v_plot)]
        v_disc = scalar_potential(x_disc, params, t)
        disc_rows += [{"time": t, "x": float(x), "v": float(v)}
                      for x, v in zip(x_disc, v_disc)]
    return {
        "eigenenergies": SweepTable(EIGEN_COLUMNS, eig_rows),
        "potential": SweepTable(POTENTIAL_COLUMNS, pot_rows),
        "potential_discrete": SweepTable(POTENTIAL_COLUMNS, disc_rows),
    }


def compute_exp_params(cfg: ScenarioConfig) -> dict[str, float]:
    """Photon-recoil localization rate and gas-damping thermalization rate.

    The localization rate follows the maximum-intensity recoil formula
    for a dielectric sphere in a focused beam; gas damping comes from
    kinetic theory with the mean thermal gas speed.  The thermalization
    rate is the damping rate multiplied by the high-temperature bath
    occupation k_B T / (hbar omega).
    """
    eps_c = (cfg.epsilon - 1) / (3 * (cfg.epsilon + 2))
    lambda_over_omega = (64 / 45) * math.pi**3 \
        * eps_c / cfg.numerical_aperture**2 \
        * cfg.radius**3 / cfg.wavelength**3
    v_gas = math.sqrt(8 * BOLTZMANN * cfg.gas_temperature
                      / (math.pi * cfg.gas_molecular_mass))
    gamma_exp = (64 / 3) * cfg.radius**2 * cfg.pressure \
        / (cfg.particle_mass * v_gas)
    n_th = BOLTZMANN * cfg.gas_temperature / (HBAR * cfg.trap_frequency)
    return {
        "Lambda_over_omega": lambda_over_omega,
        "gamma_exp": gamma_exp,
        "thermal_occupation": n_th,
        "thermalization_rate_over_omega":
            n_th * gamma_exp / cfg.trap_frequency,
    }
