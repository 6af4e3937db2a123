"""Von Neumann entropy and Gaussian measurement conditioning."""
from __future__ import annotations

import numpy as np

from .symplectic import partial_trace, symplectic_eigenvalues

X_QUAD = 0
P_QUAD = 1


def g_function(nu):
    """Bosonic entropy function g(nu) in bits, g(1) = 0 by continuity."""
    nu = np.maximum(np.asarray(nu, dtype=float), 1.0 + 1e-15)
    a = (nu + 1.0) / 2.0
    b = (nu - 1.0) / 2.0
    return a * np.log2(a) - b * np.log2(b)


def von_neumann_entropy(cov: np.ndarray) -> float:
    """Entropy of a Gaussian state in bits: sum of g over symplectic eigenvalues."""
    return float(np.sum(g_function(symplectic_eigenvalues(cov))))


def condition_on_homodyne(cov: np.ndarray, measured_mode: int, quadrature: int,
                          extra_variance: float = 0.0) -> np.ndarray:
    """Covariance of the remaining modes after homodyning one quadrature.

    Schur complement gamma_A - sigma_AB (X gamma_B X)^+ sigma_AB^T with
    X = diag(1,0) (X quadrature) or diag(0,1); the Moore-Penrose
    pseudo-inverse handles the singular projected block.  `extra_variance`
    is added to the measured quadrature before conditioning, modeling
    trusted noise (e.g. detector electronics) on the recorded outcome.
    """
    cov = np.asarray(cov, dtype=float)
    n = cov.shape[0] // 2
    if not 0 <= measured_mode < n:
        raise ValueError(f"mode index {measured_mode} out of range for {n} modes")
    if quadrature not in (X_QUAD, P_QUAD):
        raise ValueError("quadrature must be 0 (X) or 1 (P)")
    meas = [2 * measured_mode, 2 * measured_mode + 1]
    rest = [k for k in range(2 * n) if k not in meas]
    gamma_a = cov[np.ix_(rest, rest)]
    sigma = cov[np.ix_(rest, meas)]
    gamma_b = cov[np.ix_(meas, meas)].copy()
    gamma_b[quadrature, quadrature] += extra_variance
    proj = np.zeros((2, 2))
    proj[quadrature, quadrature] = 1.0
    pinv = np.linalg.pinv(proj @ gamma_b @ proj, rcond=1e-12)
    return gamma_a - sigma @ pinv @ sigma.T


def entropy_of_modes(cov: np.ndarray, modes: list[int]) -> float:
    """Entropy of the reduced state over the listed modes."""
    return von_neumann_entropy(partial_trace(cov, modes))
