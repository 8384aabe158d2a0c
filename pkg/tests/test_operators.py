"""Spin algebra, the Taylor-inverted mode operators, and the model terms."""

import math

import mpmath
import numpy as np
import pytest
import scipy.optimize
from hypothesis import given
from hypothesis import strategies as st

from wehrlsim import (
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
    thermal_state,
)
from wehrlsim.errors import (
    DimensionMismatchError,
    NegativeTimeError,
    NonInvertibleError,
)
import wehrlsim.operators as operators_module

ALL_J = [2, 3, 4, 7, 12, 25]


def test_two_level_jz():
    ops = build_spin_operators(SpinBasis(2))
    assert np.allclose(ops.jz, np.diag([0.5, -0.5]))


def test_top_rung_annihilation():
    ops = build_spin_operators(SpinBasis(2))
    top = np.array([1.0, 0.0])
    assert np.all(ops.jplus @ top == 0)


def test_raising_element_spin_one():
    # <1,1| J+ |1,0> = sqrt((j - jz)(j + jz + 1)) at j=1, jz=0
    ops = build_spin_operators(SpinBasis(3))
    assert ops.jplus[0, 1] == pytest.approx(math.sqrt(2), abs=1e-15)


@pytest.mark.parametrize("n", ALL_J)
def test_commutation_relations(n):
    ops = build_spin_operators(SpinBasis(n))
    for a, b, c in ((ops.jx, ops.jy, ops.jz), (ops.jy, ops.jz, ops.jx),
                    (ops.jz, ops.jx, ops.jy)):
        comm = a @ b - b @ a
        assert np.abs(comm - 1j * c).max() < 1e-12


@pytest.mark.parametrize("n", ALL_J)
def test_casimir(n):
    basis = SpinBasis(n)
    ops = build_spin_operators(basis)
    casimir = ops.jx @ ops.jx + ops.jy @ ops.jy + ops.jz @ ops.jz
    expected = basis.j * (basis.j + 1) * np.eye(n)
    assert np.abs(casimir - expected).max() < 1e-10


def test_basis_validation():
    with pytest.raises(ValueError):
        SpinBasis(1)


def test_taylor_zeroth_entry():
    basis = SpinBasis(25)
    m = hp_taylor(basis, 15).m_kappa
    assert m[0, 0].real == pytest.approx(math.sqrt(24), abs=1e-14)


@pytest.mark.parametrize("n", [4, 25])
def test_taylor_second_order_closed_form(n):
    basis = SpinBasis(n)
    two_j = 2 * basis.j
    m2 = np.diag(hp_taylor(basis, 2).m_kappa).real
    levels = np.arange(n)
    expected = (math.sqrt(two_j) - levels / (2 * math.sqrt(two_j))
                - levels**2 / (8 * math.sqrt(two_j**3)))
    assert np.abs(m2 - expected).max() < 1e-13


def test_taylor_against_arbitrary_precision_oracle():
    # oracle: the same Taylor polynomial evaluated with 50-digit mpmath
    basis = SpinBasis(25)
    kappa, level = 15, 4
    mpmath.mp.dps = 50
    coeffs = mpmath.taylor(lambda x: mpmath.sqrt(24 - x), 0, kappa)
    oracle = float(mpmath.polyval(coeffs[::-1], level))
    ours = hp_taylor(basis, kappa).m_kappa[level, level].real
    assert ours == pytest.approx(oracle, rel=1e-13)
    exact = math.sqrt(24 - level)
    assert abs(ours - exact) / exact < 1e-6


def test_taylor_inverse_is_elementwise():
    basis = SpinBasis(9)
    factors = hp_taylor(basis, 7)
    product = factors.m_kappa @ factors.m_kappa_inv
    assert np.abs(product - np.eye(9)).max() < 1e-14


def test_taylor_rejects_nonpositive_diagonal(monkeypatch):
    # a synthetic coefficient set whose polynomial hits zero at level 1
    monkeypatch.setattr(operators_module, "_sqrt_taylor_coefficients",
                        lambda two_j, kappa: np.array([1.0, -1.0]))
    with pytest.raises(NonInvertibleError) as err:
        hp_taylor(SpinBasis(4), 1)
    assert err.value.level == 1


def test_taylor_kappa_validation():
    with pytest.raises(ValueError):
        hp_taylor(SpinBasis(4), 0)


def test_quadrature_position_element():
    quad = quadrature_operators(SpinBasis(25), 15)
    assert quad.jx_prime[0, 1] == pytest.approx(1 / math.sqrt(2), abs=1e-6)


def test_quadrature_hermitian():
    quad = quadrature_operators(SpinBasis(25), 15)
    assert np.abs(quad.jx_prime - quad.jx_prime.conj().T).max() < 1e-12
    assert np.abs(quad.jy_prime - quad.jy_prime.conj().T).max() < 1e-12


def test_quadrature_low_sector_commutator():
    quad = quadrature_operators(SpinBasis(25), 15)
    comm = quad.jx_prime @ quad.jy_prime - quad.jy_prime @ quad.jx_prime
    assert comm[0, 0] == pytest.approx(1j, abs=1e-4)


def test_low_energy_oscillator_spectrum():
    # the quadratic combination must reproduce the first 8 mode energies
    quad = quadrature_operators(SpinBasis(25), 15)
    h = quad.jy_prime @ quad.jy_prime / 2 + quad.jx_prime @ quad.jx_prime / 2
    evals = np.linalg.eigvalsh(h)[:8]
    expected = np.arange(8) + 0.5
    assert np.abs(evals - expected).max() / expected.min() < 0.01
    assert np.all(np.abs(evals / expected - 1) < 0.01)


def test_protocol_endpoints():
    assert protocol_alpha(0.0, 10.0) == (1.0, 0.0)
    assert protocol_alpha(10.0, 10.0) == (0.0, 1.0)
    assert protocol_alpha(20.0, 10.0) == (0.0, 1.0)
    alpha, alphabar = protocol_alpha(2.5, 10.0)
    assert alpha == pytest.approx(0.75)
    assert alpha + alphabar == 1.0


def test_protocol_negative_time():
    with pytest.raises(NegativeTimeError):
        protocol_alpha(-0.1, 10.0)


def test_well_term_endpoints():
    params = PotentialParams()
    assert gaussian_well(0.0, params, 0.0) == pytest.approx(-10.0)
    assert gaussian_well(0.0, params, params.tau) == pytest.approx(0.0)


def test_double_well_minima_against_root_oracle():
    # oracle: stationary points of v(x) = x^2/2 - 10 (x^2/2) e^{-x^2/2}
    # solve 1 - 10 e^{-x^2/2} (1 - x^2/2) = 0 for the positive root
    params = PotentialParams()
    t = params.tau
    x_star = scipy.optimize.brentq(
        lambda x: 1 - 10 * np.exp(-x**2 / 2) * (1 - x**2 / 2), 1.0, 2.0,
        xtol=1e-12)
    v_star = x_star**2 / 2 * (1 - 10 * math.exp(-x_star**2 / 2))
    assert scalar_potential(x_star, params, t) == pytest.approx(v_star,
                                                                abs=1e-12)
    h = 1e-6
    slope = (scalar_potential(x_star + h, params, t)
             - scalar_potential(x_star - h, params, t)) / (2 * h)
    assert abs(slope) < 1e-6
    # the two minima sit below the central barrier v(0) = 0
    assert v_star < scalar_potential(0.0, params, t)


def test_hamiltonian_hermitian_and_continuous():
    basis = SpinBasis(25)
    params = PotentialParams()
    ham = DoubleWellHamiltonian(basis, 15, params)
    for t in (0.0, 3.7, 10.0):
        h = ham(t)
        assert np.abs(h - h.conj().T).max() < 1e-12
    h0 = ham(5.0)
    step_small = np.linalg.norm(ham(5.0 + 1e-4) - h0)
    step_large = np.linalg.norm(ham(5.0 + 1e-3) - h0)
    assert step_large / step_small == pytest.approx(10.0, rel=0.05)


def test_build_hamiltonian_matches_provider():
    basis = SpinBasis(9)
    params = PotentialParams()
    direct = build_hamiltonian(basis, 5, params, 2.0)
    provider = DoubleWellHamiltonian(basis, 5, params)
    assert np.abs(direct - provider(2.0)).max() < 1e-14


def test_thermal_dissipator_off():
    ops = build_spin_operators(SpinBasis(4))
    diss = DissipatorParams(gamma=0.0, Lambda=0.5)
    rho = np.eye(4) / 4
    out = apply_thermal_dissipator(rho, diss, ops.jplus, ops.jminus)
    assert np.all(out == 0)


def test_thermal_dissipator_detailed_balance():
    # the Gibbs state of omega*Jz at the bath temperature is stationary
    ops = build_spin_operators(SpinBasis(4))
    diss = DissipatorParams(gamma=0.5, Lambda=0.0, beta_bath=1.0)
    rho = thermal_state(ops.jz.real, 1.0)
    out = apply_thermal_dissipator(rho, diss, ops.jplus, ops.jminus)
    assert np.linalg.norm(out) < 1e-10


def test_localization_eigenprojector_stationary():
    ops = build_spin_operators(SpinBasis(4))
    diss = DissipatorParams(gamma=0.0, Lambda=0.5)
    _, vecs = np.linalg.eigh(ops.jx)
    proj = np.outer(vecs[:, 1], vecs[:, 1].conj())
    out = apply_localization_dissipator(proj, diss, ops.jx)
    assert np.abs(out).max() < 1e-14
    out_mixed = apply_localization_dissipator(np.eye(4) / 4, diss, ops.jx)
    assert np.abs(out_mixed).max() < 1e-14


def test_localization_top_state_matches_expansion():
    # direct double-commutator evaluation, fully expanded
    ops = build_spin_operators(SpinBasis(4))
    diss = DissipatorParams(gamma=0.0, Lambda=0.5)
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1.0
    out = apply_localization_dissipator(rho, diss, ops.jx)
    jx = ops.jx
    oracle = -0.5 * (jx @ jx @ rho - 2 * jx @ rho @ jx + rho @ jx @ jx)
    assert np.abs(out - oracle).max() < 1e-14
    assert np.abs(out).max() > 1e-3
    assert abs(np.trace(out)) < 1e-12


def test_dissipator_dimension_mismatch():
    ops = build_spin_operators(SpinBasis(4))
    diss = DissipatorParams()
    with pytest.raises(DimensionMismatchError):
        apply_thermal_dissipator(np.eye(3) / 3, diss, ops.jplus, ops.jminus)
    with pytest.raises(DimensionMismatchError):
        apply_localization_dissipator(np.eye(3) / 3, diss, ops.jx)


@st.composite
def hermitian_states(draw, n=4):
    entries = draw(st.lists(
        st.floats(min_value=-1, max_value=1, allow_nan=False),
        min_size=2 * n * n, max_size=2 * n * n))
    g = np.array(entries[:n * n]).reshape(n, n) \
        + 1j * np.array(entries[n * n:]).reshape(n, n)
    rho = g @ g.conj().T + 1e-3 * np.eye(n)
    return rho / np.trace(rho).real


@given(hermitian_states())
def test_dissipators_hermitian_traceless(rho):
    ops = build_spin_operators(SpinBasis(4))
    diss = DissipatorParams(gamma=0.7, Lambda=0.3, beta_bath=1.2)
    for out in (
        apply_thermal_dissipator(rho, diss, ops.jplus, ops.jminus),
        apply_localization_dissipator(rho, diss, ops.jx),
    ):
        assert abs(np.trace(out)) < 1e-12
        assert np.abs(out - out.conj().T).max() < 1e-12


def test_dissipator_params_validation():
    with pytest.raises(ValueError):
        DissipatorParams(gamma=-0.1)
    with pytest.raises(ValueError):
        DissipatorParams(beta_bath=0.0)
    with pytest.raises(ValueError):
        DissipatorParams(localization_operator="jy")


def test_nbar_consistency():
    diss = DissipatorParams(beta_bath=1.0)
    assert diss.nbar == pytest.approx(1 / (math.e - 1), rel=1e-12)
