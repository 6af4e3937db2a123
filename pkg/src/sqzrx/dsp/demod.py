"""Digital down-conversion and pilot notch filtering."""
from __future__ import annotations

import numpy as np

from .analytic import AnalyticSignal, fft_freqs


def demodulate(sig: AnalyticSignal, carrier_freq: float,
               carrier_phase: float = 0.0) -> np.ndarray:
    """Complex baseband: real part X', imaginary part P'.

    `carrier_freq` is the recovered beat frequency (pilot frequency
    minus the configured pilot offset, corrected by the clock modifier).
    """
    t = np.arange(len(sig)) / sig.sample_rate
    return sig.samples * np.exp(-1j * (2.0 * np.pi * carrier_freq * t
                                       + carrier_phase))


def notch(bb: np.ndarray, sample_rate: float, freqs,
          halfwidth: float = 1e6) -> np.ndarray:
    """Zero narrow bands around the given baseband offsets (pilot residue
    and any modulator image tones).

    Bands are removed symmetrically at +f0 and -f0: squeezing is carried
    by correlated sideband pairs, so removing only one side of a pair
    would convert correlated content into excess quadrature noise.
    """
    spec = np.fft.fft(bb)
    f = fft_freqs(len(bb), sample_rate)
    for f0 in np.atleast_1d(freqs):
        spec[np.abs(f - f0) <= halfwidth] = 0.0
        spec[np.abs(f + f0) <= halfwidth] = 0.0
    return np.fft.ifft(spec)
