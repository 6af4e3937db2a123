"""Unscented Kalman filter phase tracking on the pilot phase record.

State model: 2-state [phase, phase rate] random walk,

    phase_{k+1} = phase_k + rate_k + w_phase,   rate_{k+1} = rate_k + w_rate,

observed through the unwrapped pilot phase.  Sigma-point parameters are
the conventional defaults: spread alpha = 1e-3, prior-knowledge
beta = 2, secondary scaling kappa = 0.
"""
from __future__ import annotations

import numpy as np

from ..errors import DataError, DivergenceDetected

ALPHA = 1e-3
BETA = 2.0
KAPPA = 0.0
DIVERGENCE_FACTOR = 100.0
DIVERGENCE_RUN = 1000


def estimate_noise_vars(obs: np.ndarray) -> tuple[float, float]:
    """(process_noise_var, obs_noise_var) from lag covariances of the
    phase increments: var(d) = q + 2R and cov(d_k, d_{k+1}) = -R."""
    d = np.diff(obs)
    d = d - d.mean()
    var = float(np.mean(d * d))
    cov1 = float(np.mean(d[:-1] * d[1:]))
    r = max(-cov1, 1e-15)
    q = max(var - 2.0 * r, 1e-15)
    return q, r


def ukf_phase_track(pilot_phase_obs: np.ndarray, process_noise_var: float,
                    obs_noise_var: float) -> np.ndarray:
    """Per-sample MMSE phase estimates; apply as exp(-i phase[k]) downstream."""
    if process_noise_var <= 0.0 or obs_noise_var <= 0.0:
        raise DataError("noise variances must be positive")
    obs = np.asarray(pilot_phase_obs, dtype=float)
    n = len(obs)
    dim = 2
    lam = ALPHA * ALPHA * (dim + KAPPA) - dim
    gamma = np.sqrt(dim + lam)
    wm = np.full(2 * dim + 1, 1.0 / (2.0 * (dim + lam)))
    wc = wm.copy()
    wm[0] = lam / (dim + lam)
    wc[0] = wm[0] + (1.0 - ALPHA * ALPHA + BETA)

    q00 = process_noise_var
    q11 = process_noise_var * 1e-4       # slow drift of the rate state
    r = obs_noise_var
    w0m, w0c, wi = float(wm[0]), float(wc[0]), float(wm[1])

    x0, x1 = float(obs[0]), 0.0
    p00, p01, p11 = obs_noise_var, 0.0, process_noise_var
    # the inner loop runs in scalar arithmetic (closed-form 2x2 Cholesky);
    # an array formulation is far too slow at trace length
    s_steady = None
    runaway = 0
    est = np.empty(n)
    obs_list = obs.tolist()
    sqrt_ = np.sqrt
    for k in range(n):
        # predict
        x0p = x0 + x1
        a = p00 + 2.0 * p01 + p11 + q00        # predicted P[0,0]
        b = p01 + p11                          # predicted P[0,1]
        c = p11 + q11                          # predicted P[1,1]
        # sigma points: columns of the Cholesky factor L, L[0,:] = (sa, 0)
        sa = sqrt_(a)
        l10 = b / sa
        # observation = phase component; only the first column perturbs it
        dz = gamma * sa
        s = 2.0 * wi * dz * dz + r
        # cross covariance between state and observation
        cx0 = 2.0 * wi * gamma * gamma * sa * sa
        cx1 = 2.0 * wi * gamma * gamma * sa * l10
        g0 = cx0 / s
        g1 = cx1 / s
        innov = obs_list[k] - x0p
        x0 = x0p + g0 * innov
        x1 = x1 + g1 * innov
        p00 = a - g0 * g0 * s
        p01 = b - g0 * g1 * s
        p11 = c - g1 * g1 * s
        est[k] = x0

        if k == 256:
            s_steady = s
        if s_steady is not None and s > DIVERGENCE_FACTOR * s_steady:
            runaway += 1
            if runaway > DIVERGENCE_RUN:
                raise DivergenceDetected(
                    f"innovation variance {s:.3e} stuck above "
                    f"{DIVERGENCE_FACTOR:.0f}x steady state {s_steady:.3e}")
        else:
            runaway = 0
    return est


def apply_phase_correction(bb: np.ndarray, phase: np.ndarray) -> np.ndarray:
    if bb.dtype == np.complex64:
        # single-precision phasor after double-precision mod-2pi reduction
        ph = np.remainder(phase, 2.0 * np.pi).astype(np.float32)
        return bb * np.exp(-1j * ph)
    return bb * np.exp(-1j * phase)
