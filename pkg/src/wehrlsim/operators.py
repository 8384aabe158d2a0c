"""Spin algebra, the truncated-oscillator correspondence, and the model.

Everything lives in an N-dimensional spin space (j = (N-1)/2) whose basis
states |j, m> are ordered from m = j down to m = -j, so that the index
n = j - m doubles as the occupation number of a truncated bosonic mode.
The Holstein-Primakoff square root hbar*sqrt(2j - n) is replaced by its
Taylor polynomial of order kappa, which is what makes the mode operators
expressible through the spin ladder operators.

Natural units hbar = 1 throughout.  Mass and frequency enter explicitly
through PotentialParams so the defaults m = omega = 1 can be overridden,
but the quadrature operators approximate position and momentum only for
m = omega = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    DimensionMismatchError,
    NegativeTimeError,
    NonInvertibleError,
)

LOCALIZATION_OPERATORS = ("bare_jx", "jx_prime")


@dataclass(frozen=True)
class SpinBasis:
    """Dimension of the spin space; fixes j = (n_levels - 1) / 2."""

    n_levels: int

    def __post_init__(self):
        if self.n_levels < 2:
            raise ValueError(f"need at least 2 levels, got {self.n_levels}")

    @property
    def j(self) -> float:
        return (self.n_levels - 1) / 2

    @property
    def jz_values(self) -> np.ndarray:
        """m quantum numbers in basis order, from +j down to -j."""
        return self.j - np.arange(self.n_levels)


@dataclass(frozen=True)
class PotentialParams:
    """Trap parameters: depth calE (units hbar*omega), waist W, ramp time tau."""

    calE: float = 10.0
    W: float = 1.0
    tau: float = 10.0
    mass: float = 1.0
    omega: float = 1.0

    def __post_init__(self):
        for name in ("calE", "W", "tau", "mass", "omega"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class DissipatorParams:
    """Coupling rates (units omega) and bath temperature (units 1/(hbar*omega))."""

    gamma: float = 0.5
    Lambda: float = 0.5
    beta_bath: float = 1.0
    localization_operator: str = "bare_jx"

    def __post_init__(self):
        problems = []
        if self.gamma < 0:
            problems.append("gamma must be nonnegative")
        if self.Lambda < 0:
            problems.append("Lambda must be nonnegative")
        if self.beta_bath <= 0:
            problems.append("beta_bath must be positive")
        if self.localization_operator not in LOCALIZATION_OPERATORS:
            problems.append(
                f"localization_operator must be one of {LOCALIZATION_OPERATORS}"
            )
        if problems:
            raise ValueError("; ".join(problems))

    @property
    def nbar(self) -> float:
        """Mean bath occupation 1 / (exp(beta_bath) - 1)."""
        return 1.0 / math.expm1(self.beta_bath)


@dataclass(frozen=True)
class SpinOperators:
    jz: np.ndarray
    jplus: np.ndarray
    jminus: np.ndarray
    jx: np.ndarray
    jy: np.ndarray


@dataclass(frozen=True)
class TaylorFactors:
    """Diagonal polynomial stand-in for hbar*sqrt(2j - n) and its inverse."""

    m_kappa: np.ndarray
    m_kappa_inv: np.ndarray


@dataclass(frozen=True)
class QuadratureOperators:
    """Position-like and momentum-like combinations of the ladder operators."""

    jx_prime: np.ndarray
    jy_prime: np.ndarray


def build_spin_operators(basis: SpinBasis) -> SpinOperators:
    """Dense Jz, J+, J-, Jx, Jy in the |j, m> basis (m descending)."""
    n = basis.n_levels
    m = basis.jz_values
    jz = np.diag(m).astype(complex)
    # J+|j,m> = sqrt((j-m)(j+m+1)) |j,m+1>: index i -> i-1
    raise_amp = np.sqrt((basis.j - m[1:]) * (basis.j + m[1:] + 1))
    jplus = np.zeros((n, n), dtype=complex)
    jplus[np.arange(n - 1), np.arange(1, n)] = raise_amp
    jminus = jplus.conj().T.copy()
    jx = (jplus + jminus) / 2
    jy = (jplus - jminus) / 2j
    return SpinOperators(jz=jz, jplus=jplus, jminus=jminus, jx=jx, jy=jy)


def _sqrt_taylor_coefficients(two_j: float, kappa: int) -> np.ndarray:
    """Coefficients of the order-kappa Taylor polynomial of sqrt(2j - n) in n."""
    coeffs = np.empty(kappa + 1)
    coeffs[0] = math.sqrt(two_j)
    # binomial series sqrt(1 - x) = sum_k C(1/2, k) (-x)^k with x = n / 2j
    c = 1.0
    for k in range(1, kappa + 1):
        c *= (0.5 - (k - 1)) / k
        coeffs[k] = math.sqrt(two_j) * c * (-1.0 / two_j) ** k
    return coeffs


def hp_taylor(basis: SpinBasis, kappa: int) -> TaylorFactors:
    """Order-kappa Taylor polynomial of sqrt(2j - n), evaluated on the diagonal.

    Raises NonInvertibleError if any diagonal entry is not positive.
    """
    if kappa < 1:
        raise ValueError(f"kappa must be at least 1, got {kappa}")
    coeffs = _sqrt_taylor_coefficients(2 * basis.j, kappa)
    n_vals = np.arange(basis.n_levels, dtype=float)
    diag = np.polynomial.polynomial.polyval(n_vals, coeffs)
    bad = np.nonzero(diag <= 0)[0]
    if bad.size:
        raise NonInvertibleError(int(bad[0]), float(diag[bad[0]]))
    return TaylorFactors(
        m_kappa=np.diag(diag).astype(complex),
        m_kappa_inv=np.diag(1.0 / diag).astype(complex),
    )


@lru_cache(maxsize=32)
def _cached_quadratures(n_levels: int, kappa: int) -> QuadratureOperators:
    basis = SpinBasis(n_levels)
    ops = build_spin_operators(basis)
    inv = hp_taylor(basis, kappa).m_kappa_inv
    lowering = inv @ ops.jplus          # ~ b
    raising = ops.jminus @ inv          # ~ b+, exact adjoint of the above
    jx_prime = (raising + lowering) / math.sqrt(2)
    jy_prime = 1j * (raising - lowering) / math.sqrt(2)
    jx_prime = (jx_prime + jx_prime.conj().T) / 2
    jy_prime = (jy_prime + jy_prime.conj().T) / 2
    jx_prime.flags.writeable = False
    jy_prime.flags.writeable = False
    return QuadratureOperators(jx_prime=jx_prime, jy_prime=jy_prime)


def quadrature_operators(basis: SpinBasis, kappa: int) -> QuadratureOperators:
    """Hermitian position-like Jx' and momentum-like Jy'."""
    return _cached_quadratures(basis.n_levels, kappa)


def protocol_alpha(t: float, tau: float) -> tuple[float, float]:
    """Linear ramp alpha(t) = 1 - t/tau, clamped at 0 after the ramp.

    Returns (alpha, alphabar) with alphabar = 1 - alpha.
    """
    if t < 0:
        raise NegativeTimeError(f"t must be nonnegative, got {t}")
    alpha = max(0.0, 1.0 - t / tau)
    return alpha, 1.0 - alpha


def gaussian_well(x, params: PotentialParams, t: float):
    """Ramped non-harmonic part of the potential, evaluated at position(s) x."""
    alpha, alphabar = protocol_alpha(t, params.tau)
    x2 = np.square(x) / (2 * params.W**2)
    return -params.calE * (alpha + alphabar * x2) * np.exp(-x2)


def scalar_potential(x, params: PotentialParams, t: float):
    """Full scalar potential m*omega^2*x^2/2 plus the ramped well."""
    harmonic = 0.5 * params.mass * params.omega**2 * np.square(x)
    return harmonic + gaussian_well(x, params, t)


class DoubleWellHamiltonian:
    """Callable t -> H(t) for the ramped single-well-to-double-well trap.

    The potential is a scalar function of Jx', so it is applied on the
    Jx' eigenbasis and rotated back.  Only the ramp factor alpha depends
    on time, which leaves H(t) an affine combination of two fixed
    Hermitian matrices plus the kinetic term.
    """

    def __init__(self, basis: SpinBasis, kappa: int, params: PotentialParams):
        self.basis = basis
        self.kappa = kappa
        self.params = params
        quad = quadrature_operators(basis, kappa)
        kinetic = quad.jy_prime @ quad.jy_prime / (2 * params.mass)
        x, vecs = np.linalg.eigh(quad.jx_prime)
        x2 = np.square(x) / (2 * params.W**2)
        harmonic = 0.5 * params.mass * params.omega**2 * np.square(x)
        # well(alpha) = base + alpha * swing on the Jx' eigenvalues
        base = harmonic - params.calE * x2 * np.exp(-x2)
        swing = -params.calE * (1.0 - x2) * np.exp(-x2)
        self._static = _hermitize(kinetic + (vecs * base) @ vecs.conj().T)
        self._swing = _hermitize((vecs * swing) @ vecs.conj().T)
        self.jx_prime_eigenvalues = x

    def __call__(self, t: float) -> np.ndarray:
        alpha, _ = protocol_alpha(t, self.params.tau)
        return self._static + alpha * self._swing


def build_hamiltonian(
    basis: SpinBasis, kappa: int, params: PotentialParams, t: float
) -> np.ndarray:
    """H(t) = Jy'^2/(2m) + potential(Jx', t) as a dense Hermitian matrix."""
    return DoubleWellHamiltonian(basis, kappa, params)(t)


def _hermitize(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().T) / 2


def _check_square(rho: np.ndarray, *others: np.ndarray):
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got {rho.shape}")
    for other in others:
        if other.shape != rho.shape:
            raise DimensionMismatchError(
                f"operator shape {other.shape} does not match state {rho.shape}"
            )


def lindblad_term(op: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """L_O(rho) = O rho O+ - {O+ O, rho}/2."""
    op_dag = op.conj().T
    opdop = op_dag @ op
    return op @ rho @ op_dag - 0.5 * (opdop @ rho + rho @ opdop)


def apply_thermal_dissipator(
    rho: np.ndarray,
    params: DissipatorParams,
    jplus: np.ndarray,
    jminus: np.ndarray,
) -> np.ndarray:
    """gamma * [(nbar + 1) L_{jminus}(rho) + nbar L_{jplus}(rho)].

    The jminus slot carries the emission weight nbar + 1.  Callers decide
    which physical operator plays that role: the spin lowering operator
    when the bath damps the Jz ladder, the spin raising operator when it
    damps the bosonic occupation (whose vacuum is the top spin state).
    """
    _check_square(rho, jplus, jminus)
    if params.gamma == 0:
        return np.zeros_like(rho)
    nbar = params.nbar
    out = (nbar + 1) * lindblad_term(jminus, rho) + nbar * lindblad_term(jplus, rho)
    return params.gamma * out


def apply_localization_dissipator(
    rho: np.ndarray, params: DissipatorParams, loc_op: np.ndarray
) -> np.ndarray:
    """-Lambda [A, [A, rho]] for the Hermitian localization operator A."""
    _check_square(rho, loc_op)
    if params.Lambda == 0:
        return np.zeros_like(rho)
    inner = loc_op @ rho - rho @ loc_op
    return -params.Lambda * (loc_op @ inner - inner @ loc_op)


def pick_localization_operator(
    params: DissipatorParams, spin_ops: SpinOperators, quad: QuadratureOperators | None
) -> np.ndarray:
    """Resolve the configured localization operator to a matrix."""
    if params.localization_operator == "bare_jx":
        return spin_ops.jx
    if quad is None:
        raise ValueError("jx_prime localization needs quadrature operators")
    return quad.jx_prime
