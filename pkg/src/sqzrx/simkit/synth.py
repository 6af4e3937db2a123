"""Frequency-domain synthesis of squeezed-vacuum field envelopes.

The complex baseband envelope u(t) is built so that the quadratures
x = sqrt(2) Re u and p = sqrt(2) Im u are independent stationary real
Gaussian processes with PSDs S-(f) and S+(f).  Building the quadratures
as real processes automatically gives the correct correlated
complex-Gaussian structure between +f and -f sideband pairs of u.  Far
from the carrier S± -> 1, so the envelope carries plain vacuum across
the rest of the synthesis band (this is what produces the image-band
detuning penalty downstream, without ad-hoc modeling).
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from ..errors import DataError
from .models import PilotPlan, SqueezerModel

MIN_SAMPLES = 1 << 12


def _real_process_from_psd(psd: np.ndarray, n: int, rng) -> np.ndarray:
    """Real Gaussian process of length n whose one-sided PSD is `psd`
    (shot-noise units: psd == 1 everywhere gives unit variance).

    Single precision throughout: the ADC keeps 16 bits, so a 24-bit
    mantissa is ample, and the transforms run twice as fast.
    """
    m = len(psd)
    amp = np.sqrt(n * psd / 2.0).astype(np.float32)
    spec = amp * (rng.standard_normal(m, dtype=np.float32)
                  + 1j * rng.standard_normal(m, dtype=np.float32))
    # DC and Nyquist bins are their own conjugates: real, double variance
    spec[0] = np.sqrt(n * psd[0]) * rng.standard_normal()
    if n % 2 == 0:
        spec[-1] = np.sqrt(n * psd[-1]) * rng.standard_normal()
    return np.fft.irfft(spec, n)


def synthesize_squeezed_field(model: SqueezerModel, duration: float,
                              rate: float, seed: int) -> np.ndarray:
    """Complex baseband envelope of squeezed vacuum, sampled at `rate`."""
    n = int(round(duration * rate))
    if n < MIN_SAMPLES:
        raise DataError(f"duration*rate = {n} below minimum {MIN_SAMPLES}")
    if rate < 4.0 * model.bandwidth_gamma:
        raise DataError("sample rate does not support the squeezing bandwidth")
    rngs = [np.random.default_rng(s)
            for s in np.random.SeedSequence(seed).spawn(3)]
    f = np.fft.rfftfreq(n, 1.0 / rate)
    s_minus, s_plus = model.spectra(f)
    x = _real_process_from_psd(s_minus, n, rngs[0])
    p = _real_process_from_psd(s_plus, n, rngs[1])
    u = (x + 1j * p) * 0.5 ** 0.5
    if model.rms_phase_noise > 0.0:
        # slow source jitter: one phase draw per synthesized frame
        u = u * complex(
            np.exp(1j * model.rms_phase_noise * rngs[2].standard_normal()))
    return u


def vacuum_field(n: int, seed: int) -> np.ndarray:
    """Complex vacuum envelope: unit-variance circular Gaussian."""
    rng = np.random.default_rng(seed)
    return (rng.standard_normal(n, dtype=np.float32)
            + 1j * rng.standard_normal(n, dtype=np.float32)) * 0.5 ** 0.5


def _tone(freq: float, rate: float, n: int, start_index: int,
          dtype) -> np.ndarray:
    """exp(2 pi i f t) on the sample grid; tiled from one period when
    f/rate is rational with a small denominator (the common case for
    pilot plans), with the phase evaluated modulo one cycle in double
    precision."""
    ratio = Fraction(freq / rate).limit_denominator(1 << 16)
    if abs(float(ratio) - freq / rate) < 1e-12 and ratio.denominator <= 1 << 16:
        q = ratio.denominator
        ph = ((start_index + np.arange(q)) * ratio.numerator) % q
        period = np.exp(2j * np.pi * ph / q).astype(dtype)
        reps = -(-n // q)
        return np.tile(period, reps)[:n]
    t = (start_index + np.arange(n)) / rate
    return np.exp(2j * np.pi * freq * t).astype(dtype)


def add_pilots(field: np.ndarray, pilots: PilotPlan, rate: float,
               start_index: int = 0) -> np.ndarray:
    """Superimpose coherent pilot tones on a baseband envelope.

    Pilot amplitude convention: a tone of power P contributes
    sqrt(P) * exp(i 2 pi f t), i.e. its mean |u|^2 is P shot-noise units.
    """
    n = len(field)
    dtype = (np.complex64 if field.dtype in (np.float32, np.complex64)
             else np.complex128)
    out = field.astype(dtype, copy=True)
    for freq, power in zip(pilots.frequencies, pilots.powers):
        out += float(np.sqrt(power)) * _tone(freq, rate, n, start_index, dtype)
    return out
