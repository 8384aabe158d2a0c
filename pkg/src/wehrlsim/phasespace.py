"""Spin-coherent phase space: Husimi fields, Wehrl entropy, entropy rates.

All sphere integrals use a Gauss-Legendre rule in cos(theta) crossed with
a uniform (trapezoidal) rule in phi.  Husimi functions of an N-level
state are band-limited: polynomials of degree 2j in cos(theta) along any
meridian and trigonometric polynomials of degree 2j in phi, so both
rules are exact at the default 64 x 64 resolution for every j handled
here.  The theta derivative needed by the thermal flux and production
integrals is likewise evaluated through a band-limited interpolant along
full great circles (each meridian continued through the poles into its
antipodal partner), which keeps those integrands free of finite
difference noise.

Node weights never touch the poles, and the integrands that divide by
the Husimi function are floored at 1e-12; their numerators vanish faster
than Q wherever Q collapses, so floored nodes contribute negligibly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .dynamics import LindbladTerms, lindblad_rhs
from .errors import (
    AngleOutOfRangeError,
    NegativeQError,
    UnsupportedOperatorError,
)
from .operators import (
    DissipatorParams,
    SpinBasis,
    apply_localization_dissipator,
    apply_thermal_dissipator,
    build_spin_operators,
)

Q_FLOOR = 1e-12      # used inside 1/Q in the production integrands
LOG_FLOOR = 1e-300   # used inside ln Q (0 ln 0 := 0)


@dataclass(frozen=True)
class SphereGrid:
    """Quadrature nodes and weights for integrals over the unit sphere."""

    theta: np.ndarray
    w_theta: np.ndarray   # Gauss-Legendre weights in u = cos(theta)
    phi: np.ndarray
    w_phi: float
    fingerprint: int

    @staticmethod
    def build(n_theta: int = 64, n_phi: int = 64) -> "SphereGrid":
        if n_theta < 8 or n_phi < 8:
            raise ValueError("need at least 8 nodes per direction")
        if n_phi % 2:
            raise ValueError("n_phi must be even (meridians are paired "
                             "with their antipodes)")
        u, w = np.polynomial.legendre.leggauss(n_theta)
        order = np.argsort(-u)           # theta ascending
        theta = np.arccos(u[order])
        w_theta = w[order]
        phi = 2 * np.pi * np.arange(n_phi) / n_phi
        fingerprint = hash((theta.tobytes(), phi.tobytes()))
        return SphereGrid(theta=theta, w_theta=w_theta, phi=phi,
                          w_phi=2 * np.pi / n_phi, fingerprint=fingerprint)

    @property
    def n_theta(self) -> int:
        return self.theta.size

    @property
    def n_phi(self) -> int:
        return self.phi.size

    @property
    def key(self):
        return (self.n_theta, self.n_phi, self.fingerprint)

    def integrate(self, field: np.ndarray) -> float | complex:
        """Integral over the sphere of a field sampled on the grid."""
        return np.dot(self.w_theta, field.sum(axis=1)) * self.w_phi


@dataclass(frozen=True)
class HusimiField:
    """Husimi values on a SphereGrid, tagged with the state dimension."""

    values: np.ndarray
    n_levels: int


def _coherent_theta_amplitudes(n_levels: int, theta: np.ndarray) -> np.ndarray:
    """Real amplitude factors sqrt(C(2j, n)) cos^(2j-n) sin^n of theta/2."""
    two_j = n_levels - 1
    n = np.arange(n_levels)
    log_binom = np.array([
        math.lgamma(two_j + 1) - math.lgamma(k + 1) - math.lgamma(two_j - k + 1)
        for k in n
    ])
    c = np.cos(theta / 2)[:, None]
    s = np.sin(theta / 2)[:, None]

    def power_log(base, exponent):
        # exponent * log(base) with the conventions 0^0 = 1, 0^k = 0
        with np.errstate(divide="ignore", invalid="ignore"):
            logs = np.where(base > 0, np.log(np.where(base > 0, base, 1.0)),
                            -np.inf)
            out = exponent[None, :] * logs
        return np.where(exponent[None, :] == 0, 0.0, out)

    log_amp = 0.5 * log_binom[None, :] + power_log(c, two_j - n) \
        + power_log(s, n)
    amp = np.exp(log_amp)
    amp[np.isneginf(log_amp)] = 0.0
    return amp


def coherent_state(basis: SpinBasis, theta: float, phi: float) -> np.ndarray:
    """Unit vector of the coherent state pointing along (theta, phi).

    Amplitudes follow the rotation exp(-i phi Jz) exp(-i theta Jy)
    applied to the top state |j, j>.
    """
    if not 0 <= theta <= np.pi:
        raise AngleOutOfRangeError(f"theta must lie in [0, pi], got {theta}")
    if not 0 <= phi < 2 * np.pi:
        raise AngleOutOfRangeError(f"phi must lie in [0, 2*pi), got {phi}")
    amp = _coherent_theta_amplitudes(basis.n_levels, np.array([theta]))[0]
    m = basis.jz_values
    return amp * np.exp(-1j * m * phi)


@lru_cache(maxsize=16)
def _amplitude_matrix(n_levels: int, n_theta: int, n_phi: int,
                      fingerprint: int) -> np.ndarray:
    """(n_theta*n_phi, N) matrix of coherent amplitudes <j,m|Omega_a>."""
    grid = SphereGrid.build(n_theta, n_phi)
    amp = _coherent_theta_amplitudes(n_levels, grid.theta)
    m = (n_levels - 1) / 2 - np.arange(n_levels)
    phases = np.exp(-1j * np.outer(grid.phi, m))
    psi = amp[:, None, :] * phases[None, :, :]
    psi = psi.reshape(n_theta * n_phi, n_levels)
    psi.flags.writeable = False
    return psi


def _node_field(matrix: np.ndarray, grid: SphereGrid) -> np.ndarray:
    """<Omega| M |Omega> on every grid node, as an (n_theta, n_phi) array."""
    n = matrix.shape[0]
    psi = _amplitude_matrix(n, *grid.key)
    tmp = psi @ matrix.T
    vals = np.einsum("ai,ai->a", psi.conj(), tmp)
    return vals.reshape(grid.n_theta, grid.n_phi)


def husimi(rho: np.ndarray, grid: SphereGrid) -> HusimiField:
    """Q(Omega) = <Omega| rho |Omega>, clamped of tiny negative roundoff."""
    q = _node_field(rho, grid).real
    q_min = q.min()
    if q_min < -1e-9:
        raise NegativeQError(
            f"Husimi function reached {q_min:.3e}; the state is not positive"
        )
    if q_min < 0:
        q = np.maximum(q, 0.0)
    return HusimiField(values=q, n_levels=rho.shape[0])


def wehrl_entropy(field: HusimiField, grid: SphereGrid) -> float:
    """S_Q = -(N / 4 pi) integral of Q ln Q over the sphere."""
    q = field.values
    integrand = q * np.log(np.maximum(q, LOG_FLOOR))
    return -field.n_levels / (4 * np.pi) * float(grid.integrate(integrand))


def wehrl_entropy_of_state(rho: np.ndarray, grid: SphereGrid) -> float:
    return wehrl_entropy(husimi(rho, grid), grid)


def phase_space_commutator(rho: np.ndarray, op: np.ndarray,
                           grid: SphereGrid) -> np.ndarray:
    """<Omega| [op, rho] |Omega> on the grid (the matrix route)."""
    return _node_field(op @ rho - rho @ op, grid)


def differential_commutator_field(q: np.ndarray, grid: SphereGrid,
                                  which: str) -> np.ndarray:
    """Differential-operator image of [J, rho] acting on Q.

    Phase-space counterparts of the ladder commutators, evaluated with
    4th-order centered finite differences.  Rows too close to the poles
    for the centered stencil are returned as NaN; this routine exists to
    cross-check the matrix route on interior nodes.
    """
    if which not in ("jplus", "jminus", "jz", "jx"):
        raise UnsupportedOperatorError(f"no differential form for {which!r}")
    dq_phi = _fd_phi_derivative(q)
    if which == "jz":
        return -1j * dq_phi
    dq_theta = _fd_theta_derivative(q, grid.theta)
    cot = 1.0 / np.tan(grid.theta)[:, None]
    phase = np.exp(1j * grid.phi)[None, :]
    jplus = phase * (dq_theta + 1j * cot * dq_phi)
    jminus = -phase.conj() * (dq_theta - 1j * cot * dq_phi)
    if which == "jplus":
        return jplus
    if which == "jminus":
        return jminus
    return (jplus + jminus) / 2


def _fd_phi_derivative(q: np.ndarray) -> np.ndarray:
    """4th-order centered derivative on the periodic phi axis."""
    h = 2 * np.pi / q.shape[1]
    return (-np.roll(q, -2, axis=1) + 8 * np.roll(q, -1, axis=1)
            - 8 * np.roll(q, 1, axis=1) + np.roll(q, 2, axis=1)) / (12 * h)


def fornberg_weights(x0: float, xs: np.ndarray, order: int) -> np.ndarray:
    """Finite difference weights for the given derivative order at x0."""
    n = len(xs)
    w = np.zeros((order + 1, n))
    w[0, 0] = 1.0
    c1 = 1.0
    for i in range(1, n):
        c2 = 1.0
        prev = w[:, i - 1].copy()
        for j in range(i):
            c3 = xs[i] - xs[j]
            c2 *= c3
            for k in range(min(i, order), -1, -1):
                back = w[k - 1, j] if k > 0 else 0.0
                w[k, j] = ((xs[i] - x0) * w[k, j] - k * back) / c3
        for k in range(min(i, order), 0, -1):
            w[k, i] = c1 * (k * prev[k - 1] - (xs[i - 1] - x0) * prev[k]) / c2
        w[0, i] = -c1 * (xs[i - 1] - x0) * prev[0] / c2
        c1 = c2
    return w[order]


def _fd_theta_derivative(q: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """5-point centered derivative on the nonuniform theta nodes.

    The two rows nearest each pole have no centered stencil and come
    back as NaN.
    """
    n = theta.size
    out = np.full_like(q, np.nan, dtype=complex if np.iscomplexobj(q) else float)
    for i in range(2, n - 2):
        sl = slice(i - 2, i + 3)
        w = fornberg_weights(theta[i], theta[sl], 1)
        out[i] = w @ q[sl]
    return out


@lru_cache(maxsize=16)
def _great_circle_derivative(two_j: int, n_theta: int, n_phi: int,
                             fingerprint: int) -> np.ndarray:
    """Exact d/dtheta for band-limited fields, via antipodal continuation.

    Along a full great circle the Husimi function of an N-level state is
    a trigonometric polynomial of degree 2j in the arc angle.  Fitting
    that polynomial on the 2*n_theta circle samples and differentiating
    it is exact whenever 2*n_theta >= 4j + 1; for coarser grids the fit
    degrades gracefully into least squares.
    """
    grid = SphereGrid.build(n_theta, n_phi)
    s = np.concatenate([grid.theta, 2 * np.pi - grid.theta[::-1]])
    degree = min(two_j, (s.size - 1) // 2)
    k = np.arange(1, degree + 1)
    vand = np.empty((s.size, 2 * degree + 1))
    vand[:, 0] = 1.0
    vand[:, 1::2] = np.cos(np.outer(s, k))
    vand[:, 2::2] = np.sin(np.outer(s, k))
    dvand = np.zeros((n_theta, 2 * degree + 1))
    dvand[:, 1::2] = -k[None, :] * np.sin(np.outer(grid.theta, k))
    dvand[:, 2::2] = k[None, :] * np.cos(np.outer(grid.theta, k))
    deriv = dvand @ np.linalg.pinv(vand)
    deriv.flags.writeable = False
    return deriv


def theta_derivative(q: np.ndarray, grid: SphereGrid, n_levels: int) -> np.ndarray:
    """d/dtheta of a Husimi-type field, exact for band-limited data."""
    deriv = _great_circle_derivative(n_levels - 1, *grid.key)
    half = grid.n_phi // 2
    mirrored = q[::-1, :]
    mirrored = np.roll(mirrored, -half, axis=1)
    q_ext = np.vstack([q, mirrored])
    return deriv @ q_ext


def phi_derivative(q: np.ndarray, grid: SphereGrid) -> np.ndarray:
    """Spectral d/dphi on the periodic phi axis."""
    k = np.fft.fftfreq(grid.n_phi, d=1.0 / grid.n_phi)
    k = k.copy()
    if grid.n_phi % 2 == 0:
        k[grid.n_phi // 2] = 0.0
    dq = np.fft.ifft(1j * k[None, :] * np.fft.fft(q, axis=1), axis=1)
    return dq.real if not np.iscomplexobj(q) else dq


@lru_cache(maxsize=8)
def _mirror_rotation(n_levels: int) -> np.ndarray:
    """exp(-i pi Jx): swaps the roles of the raising and lowering operators."""
    ops = build_spin_operators(SpinBasis(n_levels))
    r = scipy.linalg.expm(-1j * np.pi * ops.jx)
    r.flags.writeable = False
    return r


def _oriented_state(rho: np.ndarray, ladder: str) -> np.ndarray:
    """Rotate the state so the thermal integrands see the spin convention."""
    if ladder == "spin":
        return rho
    r = _mirror_rotation(rho.shape[0])
    return r.conj().T @ rho @ r


def _thermal_rates(rho_oriented: np.ndarray, diss: DissipatorParams,
                   grid: SphereGrid) -> tuple[float, float]:
    """(flux, production) of the thermal dissipator, spin-convention state."""
    n = rho_oriented.shape[0]
    j = (n - 1) / 2
    q = husimi(rho_oriented, grid).values
    dq = theta_derivative(q, grid, n)
    jz_field = -1j * phi_derivative(q.astype(complex), grid)
    sin = np.sin(grid.theta)[:, None]
    cos = np.cos(grid.theta)[:, None]
    two_nbar_1 = 2 * diss.nbar + 1
    flux_integrand = sin * (2 * j * q * sin / (two_nbar_1 - cos) - dq)
    flux = diss.gamma * j * n / (4 * np.pi) * float(grid.integrate(flux_integrand))
    q_safe = np.maximum(q, Q_FLOOR)
    term_z = np.abs(jz_field) ** 2 * (two_nbar_1 * cos - 1) * cos / sin**2
    current = 2 * j * q * sin + (cos - two_nbar_1) * dq
    term_theta = current**2 / (two_nbar_1 - cos)
    prod_integrand = (term_z + term_theta) / q_safe
    production = diss.gamma * n / (8 * np.pi) * float(grid.integrate(prod_integrand))
    return flux, production


def flux_thermal(rho: np.ndarray, diss: DissipatorParams, grid: SphereGrid,
                 ladder: str = "spin") -> float:
    """Entropy flux rate of the thermal dissipator.

    Written for the spin-convention wiring (emission lowers Jz); the
    oscillator wiring is handled by rotating the state into that frame,
    which leaves the rate unchanged.
    """
    if diss.gamma == 0:
        return 0.0
    return _thermal_rates(_oriented_state(rho, ladder), diss, grid)[0]


def production_thermal(rho: np.ndarray, diss: DissipatorParams, grid: SphereGrid,
                       ladder: str = "spin") -> float:
    """Irreversible entropy production rate of the thermal dissipator."""
    if diss.gamma == 0:
        return 0.0
    return _thermal_rates(_oriented_state(rho, ladder), diss, grid)[1]


def production_localization(rho: np.ndarray, diss: DissipatorParams,
                            grid: SphereGrid, loc_op: np.ndarray) -> float:
    """Irreversible entropy production rate of the localization dissipator."""
    if diss.Lambda == 0:
        return 0.0
    n = rho.shape[0]
    q = husimi(rho, grid).values
    f = phase_space_commutator(rho, loc_op, grid)
    integrand = np.abs(f) ** 2 / np.maximum(q, Q_FLOOR)
    return diss.Lambda * n / (4 * np.pi) * float(grid.integrate(integrand))


@dataclass(frozen=True)
class EntropyRates:
    """Wehrl entropy rate split by generator, plus the flux/production split."""

    ds_u: float
    ds_th: float
    ds_lc: float
    pi_th: float
    phi_th: float
    pi_lc: float

    @property
    def ds_total(self) -> float:
        return self.ds_u + self.ds_th + self.ds_lc


def rate_decomposition(rho: np.ndarray, t: float, hamiltonian,
                       terms: LindbladTerms, grid: SphereGrid) -> EntropyRates:
    """All six entropy rates of the current state.

    The three dS contributions integrate the exact phase-space image of
    each generator against ln Q; the flux and production terms come from
    their dedicated integrals so that ds_th = pi_th - phi_th and
    ds_lc = pi_lc hold up to quadrature error.
    """
    n = rho.shape[0]
    q = husimi(rho, grid).values
    log_q = np.log(np.maximum(q, LOG_FLOOR))
    prefactor = -n / (4 * np.pi)

    def ds_of(term_matrix):
        field = _node_field(term_matrix, grid).real
        return prefactor * float(grid.integrate(field * log_q))

    h = hamiltonian(t)
    ds_u = ds_of(-1j * (h @ rho - rho @ h))
    diss = terms.diss
    if diss.gamma != 0:
        ds_th = ds_of(apply_thermal_dissipator(
            rho, diss, jplus=terms.absorption_op, jminus=terms.emission_op))
        phi_th, pi_th = _thermal_rates(
            _oriented_state(rho, terms.ladder), diss, grid)
    else:
        ds_th = pi_th = phi_th = 0.0
    if diss.Lambda != 0:
        ds_lc = ds_of(apply_localization_dissipator(rho, diss, terms.loc_op))
        f = phase_space_commutator(rho, terms.loc_op, grid)
        pi_lc = diss.Lambda * n / (4 * np.pi) * float(
            grid.integrate(np.abs(f) ** 2 / np.maximum(q, Q_FLOOR)))
    else:
        ds_lc = pi_lc = 0.0
    return EntropyRates(ds_u=ds_u, ds_th=ds_th, ds_lc=ds_lc,
                        pi_th=pi_th, phi_th=phi_th, pi_lc=pi_lc)


def stationarity_residual(rates: EntropyRates) -> float:
    """pi_th + pi_lc - phi_th; approaches zero at a steady state."""
    return rates.pi_th + rates.pi_lc - rates.phi_th
