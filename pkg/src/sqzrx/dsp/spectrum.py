"""Vacuum-normalized Welch PSDs and the squeezing-spectrum model fit."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.signal
from scipy.optimize import least_squares

from ..errors import DataError, FitDiverged
from ..simkit.models import SqueezerModel


@dataclass
class PsdRatio:
    freqs: np.ndarray
    ratio_db: np.ndarray            # signal PSD over vacuum PSD, dB


def welch_psd(seq: np.ndarray, nfft: int, sample_rate: float,
              vacuum: np.ndarray | None = None,
              electronic: np.ndarray | None = None):
    """Welch PSD; with a vacuum reference, returns the shot-noise ratio
    in dB with the electronic-noise PSD subtracted from both sides."""
    if nfft > len(seq):
        raise DataError(f"nfft {nfft} exceeds sequence length {len(seq)}")
    f, pxx = scipy.signal.welch(seq, fs=sample_rate, nperseg=nfft,
                                return_onesided=not np.iscomplexobj(seq))
    if vacuum is None:
        return f, pxx
    _, pvac = scipy.signal.welch(vacuum, fs=sample_rate, nperseg=nfft,
                                 return_onesided=not np.iscomplexobj(vacuum))
    if electronic is not None:
        _, pel = scipy.signal.welch(electronic, fs=sample_rate, nperseg=nfft,
                                    return_onesided=not np.iscomplexobj(electronic))
        pxx = pxx - pel
        pvac = pvac - pel
    if np.any(pvac <= 0.0):
        raise DataError("vacuum PSD non-positive after electronic subtraction")
    return PsdRatio(freqs=f, ratio_db=10.0 * np.log10(
        np.maximum(pxx, 1e-12) / pvac))


def squeezing_spectra_with_jitter(model: SqueezerModel, f: np.ndarray
                                  ) -> tuple[np.ndarray, np.ndarray]:
    """Observed (S-, S+) including phase-noise mixing: a Gaussian phase
    jitter of std sigma mixes the quadratures with weight
    w = (1 - exp(-2 sigma^2)) / 2."""
    s_minus, s_plus = model.spectra(f)
    w = 0.5 * (1.0 - np.exp(-2.0 * model.rms_phase_noise ** 2))
    return ((1.0 - w) * s_minus + w * s_plus,
            (1.0 - w) * s_plus + w * s_minus)


def fit_squeezing_model(freqs: np.ndarray, psd_sq: np.ndarray,
                        psd_asq: np.ndarray) -> tuple[SqueezerModel, float]:
    """Joint least-squares fit of {pump_ratio, gamma, escape efficiency,
    rms phase noise} to squeezed and anti-squeezed PSDs (shot-noise
    units, linear scale).  Returns (fitted model, residual norm)."""
    freqs = np.asarray(freqs, dtype=float)
    meas = np.concatenate([psd_sq, psd_asq])

    def residual(params, sigma_fixed=None):
        x, gamma, eta = params[:3]
        sigma = params[3] if sigma_fixed is None else sigma_fixed
        m = SqueezerModel(pump_ratio=min(x, 0.999), bandwidth_gamma=gamma,
                          escape_efficiency=min(eta, 1.0),
                          rms_phase_noise=sigma)
        sm, sp = squeezing_spectra_with_jitter(m, freqs)
        return np.concatenate([sm, sp]) - meas

    fmax = freqs.max()
    x0 = [0.5, 0.3 * fmax, 0.9, 0.05]
    lb = [1e-6, 1e-3 * fmax, 1e-3, 0.0]
    ub = [0.999, 10.0 * fmax, 1.0, 1.0]
    sol = least_squares(residual, x0=x0, bounds=(lb, ub))
    baseline = least_squares(lambda p: residual(p, sigma_fixed=0.0),
                             x0=x0, bounds=(lb, ub))
    norm = float(np.linalg.norm(sol.fun))
    if norm > 3.0 * max(float(np.linalg.norm(baseline.fun)), 1e-9):
        raise FitDiverged(
            f"fit residual {norm:.3e} exceeds 3x the no-phase-noise "
            f"baseline {float(np.linalg.norm(baseline.fun)):.3e}")
    x, gamma, eta, sigma = sol.x
    return SqueezerModel(pump_ratio=float(x), bandwidth_gamma=float(gamma),
                         escape_efficiency=float(eta),
                         rms_phase_noise=float(sigma)), norm
