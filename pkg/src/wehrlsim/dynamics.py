"""Propagation of the master equation and preparation of initial states.

The integrator is a fixed-step classical RK4 on the matrix-valued
equation of motion.  Fixed stepping keeps runs bit-reproducible, and the
coupling rates used here never push the stiffness anywhere near the RK4
stability edge at the default step of 1e-3.  Positivity is monitored at
sample points rather than silently repaired, so a too-large step fails
loudly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    PositivityViolationError,
    StepSizeInvalidError,
)
from .operators import (
    DissipatorParams,
    SpinBasis,
    apply_localization_dissipator,
    apply_thermal_dissipator,
    build_spin_operators,
    hp_taylor,
)

LADDER_CONVENTIONS = ("spin", "oscillator")


@dataclass(frozen=True)
class LindbladTerms:
    """Dissipator couplings resolved to concrete matrices.

    ``ladder`` records which convention the thermal wiring follows:
    "spin" puts the emission weight on the Jz-lowering operator (thermal
    attractor is the Gibbs state of omega*Jz), "oscillator" puts it on
    the occupation-lowering operator (attractor is thermal in n).
    """

    diss: DissipatorParams
    emission_op: np.ndarray
    absorption_op: np.ndarray
    loc_op: np.ndarray
    ladder: str = "spin"

    def __post_init__(self):
        if self.ladder not in LADDER_CONVENTIONS:
            raise ValueError(f"ladder must be one of {LADDER_CONVENTIONS}")


def spin_ladder_terms(diss: DissipatorParams, spin_ops, loc_op) -> LindbladTerms:
    """Thermal wiring for a spin governed by H ~ omega*Jz."""
    return LindbladTerms(
        diss=diss,
        emission_op=spin_ops.jminus,
        absorption_op=spin_ops.jplus,
        loc_op=loc_op,
        ladder="spin",
    )


def oscillator_ladder_terms(diss: DissipatorParams, spin_ops, loc_op) -> LindbladTerms:
    """Thermal wiring for the trapped-mode picture.

    The bosonic vacuum sits at the top of the Jz ladder (n = j - m), so
    energy emission into the bath is carried by the spin raising
    operator.
    """
    return LindbladTerms(
        diss=diss,
        emission_op=spin_ops.jplus,
        absorption_op=spin_ops.jminus,
        loc_op=loc_op,
        ladder="oscillator",
    )


def lindblad_rhs(rho, t, hamiltonian, terms: LindbladTerms):
    """Full right-hand side: -i[H(t), rho] + thermal + localization terms."""
    h = hamiltonian(t)
    out = -1j * (h @ rho - rho @ h)
    if terms.diss.gamma != 0:
        out = out + apply_thermal_dissipator(
            rho, terms.diss, jplus=terms.absorption_op, jminus=terms.emission_op
        )
    if terms.diss.Lambda != 0:
        out = out + apply_localization_dissipator(rho, terms.diss, terms.loc_op)
    return out


class _CompiledRhs:
    """Equation of motion in the form G rho + rho G+ + sum_k L_k rho L_k+.

    G collects -iH(t) and the anticommutator halves of every dissipator;
    the localization double commutator contributes the jump operator
    sqrt(2 Lambda) A together with -Lambda A^2 inside G.  This evaluates
    the same superoperator as lindblad_rhs with fewer matrix products.
    """

    def __init__(self, hamiltonian, terms: LindbladTerms):
        self.hamiltonian = hamiltonian
        diss = terms.diss
        n = terms.loc_op.shape[0]
        jumps = []
        if diss.gamma != 0:
            for rate, op in ((diss.gamma * (diss.nbar + 1), terms.emission_op),
                             (diss.gamma * diss.nbar, terms.absorption_op)):
                if rate != 0:
                    jumps.append(np.sqrt(rate) * op)
        if diss.Lambda != 0:
            jumps.append(np.sqrt(2 * diss.Lambda) * terms.loc_op)
        g_diss = np.zeros((n, n), dtype=complex)
        for op in jumps:
            g_diss -= 0.5 * (op.conj().T @ op)
        self.jumps = jumps
        self.jump_dags = [op.conj().T for op in jumps]
        self.g_diss = g_diss

    def __call__(self, rho, t):
        h = self.hamiltonian(t)
        # rho G+ is applied explicitly rather than as (G rho)+ so that the
        # map damps the (roundoff-level) non-Hermitian part of rho instead
        # of amplifying it
        out = (-1j * h + self.g_diss) @ rho
        out += rho @ (1j * h + self.g_diss)
        for op, op_dag in zip(self.jumps, self.jump_dags):
            out += op @ rho @ op_dag
        return out


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    t_end: float = 10.0
    sample_every: int = 10
    renormalize_trace: bool = False
    positivity_tol: float = 1e-6

    def __post_init__(self):
        if self.dt <= 0:
            raise StepSizeInvalidError(f"dt must be positive, got {self.dt}")
        if self.t_end < 0:
            raise StepSizeInvalidError(f"t_end must be nonnegative, got {self.t_end}")
        if self.sample_every < 1:
            raise StepSizeInvalidError(
                f"sample_every must be a positive integer, got {self.sample_every}"
            )


@dataclass
class TrajectoryRecord:
    """Sampled states plus whatever per-sample scalars have been attached.

    ``states_before``/``states_after`` hold the one-step neighbours of
    each sampled state, which is what centered finite differences of
    sampled functionals are computed from (None at the endpoints).
    """

    times: np.ndarray
    states: list
    states_before: list
    states_after: list
    dt: float
    observables: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    @property
    def final_state(self):
        return self.states[-1]

    def extend(self, other: "TrajectoryRecord"):
        """Append a continuation run (its first sample repeats our last)."""
        self.times = np.concatenate([self.times, other.times[1:]])
        self.states_after[-1] = other.states_after[0]
        self.states += other.states[1:]
        self.states_before += other.states_before[1:]
        self.states_after += other.states_after[1:]
        for key in self.observables:
            self.observables[key] = np.concatenate(
                [self.observables[key], other.observables[key][1:]]
            )


def propagate(rho0, cfg: IntegratorConfig, hamiltonian, terms: LindbladTerms,
              t0: float = 0.0) -> TrajectoryRecord:
    """Fixed-step RK4 propagation with sampling every ``sample_every`` steps.

    The final step is always sampled.  Raises PositivityViolationError if
    a sampled state develops an eigenvalue below -positivity_tol.
    """
    n_steps = int(round(cfg.t_end / cfg.dt))
    dt = cfg.dt
    rho = np.array(rho0, dtype=complex)

    times = []
    states, before, after = [], [], []
    trace_err, min_eig, rhs_norm = [], [], []

    def record(step, rho_now, rho_prev, k1):
        t = t0 + step * dt
        times.append(t)
        states.append(rho_now.copy())
        before.append(None if rho_prev is None else rho_prev.copy())
        after.append(None)
        tr = np.trace(rho_now).real
        trace_err.append(tr - 1.0)
        eig_min = float(np.linalg.eigvalsh((rho_now + rho_now.conj().T) / 2)[0])
        min_eig.append(eig_min)
        rhs_norm.append(float(np.linalg.norm(k1)))
        if eig_min < -cfg.positivity_tol:
            raise PositivityViolationError(t, eig_min)

    rhs = _CompiledRhs(hamiltonian, terms)
    rho_prev = None
    awaiting_after = None  # (sample index, step it was recorded at)
    for step in range(n_steps + 1):
        t = t0 + step * dt
        k1 = rhs(rho, t)
        if awaiting_after is not None and step == awaiting_after[1] + 1:
            after[awaiting_after[0]] = rho.copy()
            awaiting_after = None
        if step % cfg.sample_every == 0 or step == n_steps:
            record(step, rho, rho_prev, k1)
            awaiting_after = (len(states) - 1, step)
        if step == n_steps:
            break
        k2 = rhs(rho + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = rhs(rho + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = rhs(rho + dt * k3, t + dt)
        rho_prev = rho
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if cfg.renormalize_trace:
            rho = rho / np.trace(rho).real

    record_arrays = {
        "trace_err": np.array(trace_err),
        "min_eig": np.array(min_eig),
        "rhs_norm": np.array(rhs_norm),
    }
    return TrajectoryRecord(
        times=np.array(times),
        states=states,
        states_before=before,
        states_after=after,
        dt=dt,
        observables=record_arrays,
    )


def thermal_state(hamiltonian: np.ndarray, beta: float) -> np.ndarray:
    """exp(-beta H) / Z through the eigendecomposition of H.

    beta = 0 gives the maximally mixed state; very large beta gives the
    ground-state projector (weights are shifted by the ground energy
    before exponentiating, so there is no overflow).
    """
    if beta < 0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    evals, vecs = np.linalg.eigh(hamiltonian)
    weights = np.exp(-beta * (evals - evals.min()))
    weights /= weights.sum()
    return (vecs * weights) @ vecs.conj().T


def squeeze_state(rho, zeta: float, basis: SpinBasis, kappa: int) -> np.ndarray:
    """S(zeta) rho S(zeta)+ with S = exp((zeta b+^2 - zeta* b^2) / 2).

    The mode operators are the Taylor-inverted ladder combinations, so S
    is exactly unitary on the truncated space and the transformation
    preserves trace and purity.  Real zeta < 0 narrows the position-like
    quadrature and widens the momentum-like one; the sign is anchored so
    that the ramp protocol's coherence maximum sits at negative zeta.
    """
    if zeta == 0:
        return np.array(rho, dtype=complex)
    ops = build_spin_operators(basis)
    inv = hp_taylor(basis, kappa).m_kappa_inv
    b = inv @ ops.jplus
    b_dag = ops.jminus @ inv
    gen = 0.5 * (zeta * (b_dag @ b_dag) - np.conj(zeta) * (b @ b))
    squeezer = scipy.linalg.expm(gen)
    return squeezer @ rho @ squeezer.conj().T
