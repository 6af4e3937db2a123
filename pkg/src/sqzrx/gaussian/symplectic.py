"""Symplectic linear algebra for Gaussian states.

Conventions: quadrature ordering (x1, p1, x2, p2, ...), vacuum variance 1
(shot-noise units), symplectic form Omega = direct sum of [[0, 1], [-1, 0]].
"""
from __future__ import annotations

import numpy as np

from ..errors import NonPhysical

_OMEGA_1 = np.array([[0.0, 1.0], [-1.0, 0.0]])
_SZ = np.diag([1.0, -1.0])


def omega(n_modes: int) -> np.ndarray:
    """Symplectic form on n modes."""
    return direct_sum(*([_OMEGA_1] * n_modes))


def direct_sum(*blocks: np.ndarray) -> np.ndarray:
    """Block-diagonal stack of square matrices."""
    size = sum(b.shape[0] for b in blocks)
    out = np.zeros((size, size))
    k = 0
    for b in blocks:
        out[k:k + b.shape[0], k:k + b.shape[0]] = b
        k += b.shape[0]
    return out


def beamsplitter(n_modes: int, mode_a: int, mode_b: int, transmissivity: float) -> np.ndarray:
    """Symplectic matrix of a beamsplitter acting on (mode_a, mode_b).

    The transmitted output appears on mode_a.
    """
    if not 0.0 <= transmissivity <= 1.0:
        raise ValueError(f"transmissivity {transmissivity} outside [0, 1]")
    S = np.eye(2 * n_modes)
    t = np.sqrt(transmissivity)
    r = np.sqrt(1.0 - transmissivity)
    for q in range(2):
        a, b = 2 * mode_a + q, 2 * mode_b + q
        S[a, a] = t
        S[a, b] = r
        S[b, a] = -r
        S[b, b] = t
    return S


def vacuum(n_modes: int = 1) -> np.ndarray:
    return np.eye(2 * n_modes)


def thermal(variance: float) -> np.ndarray:
    """Single-mode thermal state with quadrature variance >= 1."""
    if variance < 1.0:
        raise NonPhysical(f"thermal variance {variance} < 1")
    return variance * np.eye(2)


def two_mode_squeezed(variance: float) -> np.ndarray:
    """Two-mode squeezed vacuum with local variance `variance` >= 1.

    Correlations sqrt(variance^2 - 1) * sigma_z; this is the standard
    purification of a thermal state.
    """
    if variance < 1.0:
        raise NonPhysical(f"TMSV variance {variance} < 1")
    c = np.sqrt(variance * variance - 1.0)
    cov = np.zeros((4, 4))
    cov[:2, :2] = variance * np.eye(2)
    cov[2:, 2:] = variance * np.eye(2)
    cov[:2, 2:] = c * _SZ
    cov[2:, :2] = c * _SZ
    return cov


def purified_source(var_x: float, var_p: float) -> np.ndarray:
    """Two-mode purification of an impure squeezed state diag(var_x, var_p).

    The first mode carries the requested (generally mixed) squeezed state;
    the second is an ancilla of variance nu = sqrt(var_x * var_p) such that
    the joint state is pure.  Used to attribute all source impurity to a
    characterized, trusted mode.
    """
    nu = np.sqrt(var_x * var_p)
    if nu < 1.0 - 1e-12:
        raise NonPhysical(f"var_x*var_p = {var_x * var_p} violates uncertainty")
    s = np.sqrt(var_x / nu)
    S_a = np.diag([s, 1.0 / s])
    c = np.sqrt(max(nu * nu - 1.0, 0.0))
    cov = np.zeros((4, 4))
    cov[:2, :2] = np.diag([var_x, var_p])
    cov[2:, 2:] = nu * np.eye(2)
    cov[:2, 2:] = c * (S_a @ _SZ)
    cov[2:, :2] = c * (_SZ @ S_a)
    return cov


def symplectic_eigenvalues(cov: np.ndarray, check: bool = True) -> np.ndarray:
    """Symplectic spectrum of a 2n x 2n covariance matrix, ascending.

    Computed as the absolute eigenvalues of i * Omega * cov, which come in
    n degenerate pairs for symmetric positive-definite input.
    """
    cov = np.asarray(cov, dtype=float)
    n = cov.shape[0] // 2
    if cov.shape != (2 * n, 2 * n):
        raise ValueError("covariance must be 2n x 2n")
    ev = np.linalg.eigvals(1j * omega(n) @ cov)
    nu = np.sort(np.abs(ev))[::2]  # keep one of each pair
    if check and np.any(nu < 1.0 - 1e-6):
        raise NonPhysical(f"symplectic eigenvalue {nu.min():.3e} < 1")
    return nu


def partial_trace(cov: np.ndarray, keep: list[int]) -> np.ndarray:
    """Reduced covariance over the listed modes (in the given order)."""
    idx = [q for m in keep for q in (2 * m, 2 * m + 1)]
    return cov[np.ix_(idx, idx)]
