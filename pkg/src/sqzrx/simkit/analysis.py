"""Analytic expectations for detection and reconstruction outcomes.

These closed-form predictions are what property tests and the detuning
sweep compare DSP results against: the heterodyne measurement mixes the
signal band with the image band mirrored about the LO, and the
temporal-mode boxcar filter band-averages the result.
"""
from __future__ import annotations

import numpy as np

from .models import SqueezerModel


def _symmetrized(model: SqueezerModel, f: np.ndarray) -> np.ndarray:
    """Phase-averaged single-sideband PSD (x/p average) at |f|."""
    s_minus, s_plus = model.spectra(np.abs(f))
    return 0.5 * (s_minus + s_plus)


def measured_quadrature_ratio(f, detuning: float, model: SqueezerModel,
                              transmissivity: float = 1.0,
                              quadrature: str = "x") -> np.ndarray:
    """Demodulated quadrature PSD (shot-noise ratio) at baseband f > 0.

    Below the beat frequency the selected quadrature band survives at
    half weight while the image band (offsets 2*detuning -/+ f from the
    carrier) contributes phase-averaged noise; above the beat only
    phase-averaged terms remain.  Loss pulls every ratio toward 1.
    """
    f = np.asarray(f, dtype=float)
    out = np.empty_like(f)
    lo = f < detuning
    s_minus, s_plus = model.spectra(f[lo])
    direct = s_minus if quadrature == "x" else s_plus
    img = 0.25 * (_symmetrized(model, 2 * detuning - f[lo])
                  + _symmetrized(model, 2 * detuning + f[lo]))
    out[lo] = 0.5 * direct + img
    hi = ~lo
    out[hi] = 0.5 * (_symmetrized(model, f[hi])
                     + _symmetrized(model, f[hi] + 2 * detuning))
    return 1.0 + transmissivity * (out - 1.0)


def measured_x_ratio(f, detuning: float, model: SqueezerModel,
                     transmissivity: float = 1.0) -> np.ndarray:
    """Squeezed-quadrature specialization of measured_quadrature_ratio."""
    return measured_quadrature_ratio(f, detuning, model, transmissivity, "x")


def _boxcar_h2(f: np.ndarray, samples_per_state: int,
               adc_rate: float) -> np.ndarray:
    arg = np.pi * f * samples_per_state / adc_rate
    with np.errstate(invalid="ignore", divide="ignore"):
        h2 = (np.sin(arg)
              / (samples_per_state * np.sin(np.pi * f / adc_rate))) ** 2
    return np.where(np.abs(f) < adc_rate * 1e-12, 1.0, h2)


def _notch_keep_mask(f: np.ndarray, pilot_freqs,
                     samples_per_state: int, adc_rate: float,
                     min_halfwidth: float = 2e6) -> np.ndarray:
    """Mask of retained frequencies mirroring the reconstruction notch:
    each pilot is removed with a band reaching down to the analysis-band
    edge, symmetrically at positive and negative offsets."""
    keep = np.ones_like(f, dtype=bool)
    if pilot_freqs is None:
        return keep
    half_band = adc_rate / (2.0 * samples_per_state)
    for f0 in pilot_freqs:
        hw = max(min_halfwidth, abs(f0) - half_band)
        keep &= np.abs(np.abs(f) - abs(f0)) > hw
    return keep


def boxcar_band_average_db(detuning: float, model: SqueezerModel,
                           samples_per_state: int, adc_rate: float = 1e9,
                           transmissivity: float = 1.0,
                           pilot_freqs=None,
                           quadrature: str = "x") -> float:
    """Predicted mode-filtered quadrature variance in dB.

    Weights the measured quadrature ratio by the boxcar mode filter's
    |H|^2 across the Nyquist band, excluding the notched pilot bands when
    `pilot_freqs` is given.
    """
    f = np.linspace(1e5, adc_rate / 2.0, 20000)
    h2 = _boxcar_h2(f, samples_per_state, adc_rate)
    h2 = h2 * _notch_keep_mask(f, pilot_freqs, samples_per_state, adc_rate)
    r = measured_quadrature_ratio(f, detuning, model, transmissivity,
                                  quadrature)
    return float(10.0 * np.log10(np.sum(r * h2) / np.sum(h2)))


def pilot_leakage_snu(pilot_freqs, pilot_powers, linewidth: float,
                      adc_rate: float = 1e9, samples_per_state: int = 40,
                      track_bandwidth: float = 2e6) -> float:
    """Per-quadrature shot-noise-unit leakage of pilot phase-noise
    sidebands into the mode-filtered ensemble.

    The carrier-phase estimate is band-limited (track_bandwidth), so the
    corrected pilot keeps Wiener sidebands S(nu) = linewidth/(pi nu^2)
    beyond it.  Sidebands inside the notch bands are removed; those whose
    offset lands them inside the analysis band survive the mode filter
    and are amplified relative to vacuum by the boxcar's noise-bandwidth
    reduction.
    """
    if linewidth <= 0.0 or pilot_freqs is None or len(pilot_freqs) == 0:
        return 0.0
    f = np.linspace(-adc_rate / 2.0, adc_rate / 2.0, 1 << 19)
    h2 = _boxcar_h2(f, samples_per_state, adc_rate)
    keep = _notch_keep_mask(f, pilot_freqs, samples_per_state, adc_rate)
    spectral = np.zeros_like(f)
    for f0, power in zip(pilot_freqs, pilot_powers):
        nu = np.abs(f - f0)
        s_theta = np.where(nu > track_bandwidth,
                           linewidth / (np.pi * np.maximum(nu, 1.0) ** 2),
                           0.0)
        spectral += power * s_theta
    num = np.sum(spectral * keep * h2)
    # demodulated vacuum: the analytic signal's one-sided spectrum puts
    # the full complex variance of 2 into half the Nyquist band, so its
    # baseband density is 4/adc_rate
    den = np.sum((4.0 / adc_rate) * keep * h2)
    return float(num / den)


def expected_recovery_db(model: SqueezerModel, detuning: float,
                         pilot_freqs=None, pilot_powers=None,
                         linewidth: float = 0.0,
                         samples_per_state: int = 40,
                         adc_rate: float = 1e9,
                         transmissivity: float = 1.0
                         ) -> tuple[float, float]:
    """Expected recovered (squeezing, anti-squeezing) in dB for the full
    chain, from injected parameters only: boxcar-weighted band averages
    with image terms and notch masking, plus pilot phase-noise leakage
    and residual-jitter mixing between the quadratures."""
    args = (samples_per_state, adc_rate, transmissivity, pilot_freqs)
    vx = 10.0 ** (boxcar_band_average_db(detuning, model, *args,
                                         quadrature="x") / 10.0)
    vp = 10.0 ** (boxcar_band_average_db(detuning, model, *args,
                                         quadrature="p") / 10.0)
    leak = pilot_leakage_snu(pilot_freqs, pilot_powers, linewidth,
                             adc_rate, samples_per_state)
    sigma2 = (linewidth / (np.pi * 2e6)) if linewidth > 0.0 else 0.0
    mix = 0.5 * (1.0 - np.exp(-2.0 * sigma2))
    sq = vx * (1.0 - mix) + vp * mix + leak
    asq = vp * (1.0 - mix) + vx * mix + leak
    return float(10.0 * np.log10(sq)), float(10.0 * np.log10(asq))


def band_average_db(model: SqueezerModel, bandwidth: float,
                    transmissivity: float = 1.0,
                    quadrature: str = "x") -> float:
    """Flat band average of a single quadrature PSD in dB (no image mixing);
    the homodyne-grade expectation for an ideal reconstruction."""
    f = np.linspace(0.0, bandwidth, 4000)
    s_minus, s_plus = model.spectra(f)
    s = s_minus if quadrature == "x" else s_plus
    avg = 1.0 + transmissivity * (np.mean(s) - 1.0)
    return float(10.0 * np.log10(avg))


def detuning_sweep_db(detunings, model: SqueezerModel,
                      samples_per_state: int, adc_rate: float = 1e9,
                      transmissivity: float = 1.0) -> list[float]:
    """Predicted recovered squeezing across an LO detuning sweep."""
    return [boxcar_band_average_db(d, model, samples_per_state, adc_rate,
                                   transmissivity) for d in detunings]
