"""Scalar diagnostics and the continuous-grid reference eigensolver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatchError,
    NonPositiveInputError,
    NotConvergedError,
)
from .operators import PotentialParams, scalar_potential


def mean_energy(rho: np.ndarray, hamiltonian: np.ndarray) -> float:
    """Re tr(rho H)."""
    if rho.shape != hamiltonian.shape:
        raise DimensionMismatchError(
            f"state {rho.shape} vs operator {hamiltonian.shape}"
        )
    value = np.trace(rho @ hamiltonian)
    return float(value.real)


def sorted_eigenbasis(basis_op: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors sorted ascending (stable tie-break)."""
    evals, vecs = np.linalg.eigh(basis_op)
    order = np.argsort(evals, kind="stable")
    return evals[order], vecs[:, order]


def l1_coherence(rho: np.ndarray, basis_op: np.ndarray) -> float:
    """Sum of |rho_jk|, j != k, in the sorted eigenbasis of basis_op."""
    _, vecs = sorted_eigenbasis(basis_op)
    rho_b = vecs.conj().T @ rho @ vecs
    mags = np.abs(rho_b)
    return float(mags.sum() - np.trace(mags))


def populations(rho: np.ndarray, basis_op: np.ndarray) -> np.ndarray:
    """Diagonal of rho in the sorted eigenbasis of basis_op."""
    _, vecs = sorted_eigenbasis(basis_op)
    return np.einsum("ij,jk,ki->i", vecs.conj().T, rho, vecs).real


def _psd_sqrt(rho: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    evals, vecs = np.linalg.eigh((rho + rho.conj().T) / 2)
    if evals[0] < -tol:
        raise NonPositiveInputError(
            f"matrix has eigenvalue {evals[0]:.3e}; not a valid state"
        )
    return (vecs * np.sqrt(np.clip(evals, 0, None))) @ vecs.conj().T


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, in [0, 1]."""
    if rho.shape != sigma.shape:
        raise DimensionMismatchError(f"{rho.shape} vs {sigma.shape}")
    root = _psd_sqrt(rho)
    inner = root @ sigma @ root
    evals = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    value = float(np.sqrt(np.clip(evals, 0, None)).sum() ** 2)
    return min(max(value, 0.0), 1.0)


def von_neumann_entropy(rho: np.ndarray) -> float:
    """-sum lambda ln lambda over the eigenvalues of rho (0 ln 0 := 0)."""
    evals = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    evals = np.clip(evals.real, 0.0, None)
    positive = evals[evals > 0]
    return float(-(positive * np.log(positive)).sum())


def purity(rho: np.ndarray) -> float:
    return float(np.trace(rho @ rho).real)


@dataclass(frozen=True)
class ContinuousGrid:
    """Uniform position grid for the reference eigensolver."""

    half_width: float = 8.0
    n_points: int = 1024

    def __post_init__(self):
        if self.n_points < 128:
            raise ValueError("n_points must be at least 128")
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")

    @property
    def spacing(self) -> float:
        return 2 * self.half_width / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.n_points)


def _grid_eigenvalues(params, t, grid: ContinuousGrid, k: int) -> np.ndarray:
    x = grid.x[1:-1]          # Dirichlet walls at +-half_width
    h = grid.spacing
    diag = 1.0 / (params.mass * h * h) + scalar_potential(x, params, t)
    off = np.full(x.size - 1, -0.5 / (params.mass * h * h))
    return scipy.linalg.eigh_tridiagonal(
        diag, off, select="i", select_range=(0, k - 1), eigvals_only=True
    )


def continuous_eigs(params: PotentialParams, t: float,
                    grid: ContinuousGrid | None = None, k: int = 8,
                    converge_tol: float = 1e-3) -> np.ndarray:
    """Lowest k eigenvalues of -(1/2m) d2/dx2 + V(x, t) on a dense grid.

    A second-order finite difference solve is performed on the grid and
    once more at doubled resolution; the Richardson combination of the
    two removes the leading h^2 error.  Raises NotConvergedError when the
    two solves disagree too much for the extrapolation to be trusted.
    """
    if k > 12:
        raise ValueError("k is limited to 12")
    grid = grid or ContinuousGrid()
    coarse = _grid_eigenvalues(params, t, grid, k)
    fine = _grid_eigenvalues(
        params, t, ContinuousGrid(grid.half_width, 2 * grid.n_points), k
    )
    gap = np.abs(fine - coarse)
    scale = np.maximum(1.0, np.abs(fine))
    if np.any(gap > converge_tol * scale):
        worst = int(np.argmax(gap / scale))
        raise NotConvergedError(
            f"level {worst} moved by {gap[worst]:.3e} under grid doubling; "
            "enlarge n_points"
        )
    return (4 * fine - coarse) / 3


def count_local_maxima(values: np.ndarray, floor: float = 0.0) -> int:
    """Strict interior local maxima; used to classify population profiles.

    ``floor`` discards peaks below that fraction of the global maximum,
    so that roundoff-level wiggles in far tails are not counted.
    """
    v = np.asarray(values)
    left = v[1:-1] > v[:-2]
    right = v[1:-1] > v[2:]
    prominent = v[1:-1] > floor * v.max()
    return int(np.count_nonzero(left & right & prominent))
