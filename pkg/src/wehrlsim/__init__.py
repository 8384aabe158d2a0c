"""Open-system spin simulation of a harmonic-to-double-well trap protocol.

The package discretizes a trapped particle on a spin-j space through the
Holstein-Primakoff correspondence, propagates the master equation with
thermalization and localization dissipators, and analyzes the dynamics
through the Husimi distribution: Wehrl entropy, entropy production and
entropy flux rates, steady-state detection.
"""

__version__ = "0.1.0"

from .dynamics import (
    IntegratorConfig,
    LindbladTerms,
    TrajectoryRecord,
    lindblad_rhs,
    oscillator_ladder_terms,
    propagate,
    spin_ladder_terms,
    squeeze_state,
    thermal_state,
)
from .observables import (
    ContinuousGrid,
    continuous_eigs,
    count_local_maxima,
    fidelity,
    l1_coherence,
    mean_energy,
    populations,
    purity,
    von_neumann_entropy,
)
from .operators import (
    DissipatorParams,
    DoubleWellHamiltonian,
    PotentialParams,
    SpinBasis,
    apply_localization_dissipator,
    apply_thermal_dissipator,
    build_hamiltonian,
    build_spin_operators,
    gaussian_well,
    hp_taylor,
    protocol_alpha,
    quadrature_operators,
    scalar_potential,
)
from .phasespace import (
    EntropyRates,
    HusimiField,
    SphereGrid,
    coherent_state,
    flux_thermal,
    husimi,
    phase_space_commutator,
    production_localization,
    production_thermal,
    rate_decomposition,
    stationarity_residual,
    wehrl_entropy,
    wehrl_entropy_of_state,
)
from .scenarios import (
    SCENARIOS,
    ScenarioConfig,
    compute_exp_params,
    detect_ness,
    resolve_config,
    run_coupling_sweep,
    run_doublewell,
    run_eigen_compare,
    run_lambda_sweep,
    run_low_coupling,
    run_spin_study,
    run_squeeze_sweep,
)
