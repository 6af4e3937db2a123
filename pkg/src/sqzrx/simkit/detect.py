"""RF-heterodyne detection: beat-note photocurrent, receiver impairments,
clock-skew resampling, and ADC quantization."""
from __future__ import annotations

import numpy as np

from ..errors import DataError
from .models import PilotPlan, RawTrace, ReceiverModel
from .synth import add_pilots, vacuum_field

_SINC_HALF_TAPS = 32
_KAISER_BETA = 8.6


def lo_phase_path(rx: ReceiverModel, n: int, seed: int) -> np.ndarray:
    """Ground-truth LO-vs-source Wiener phase path used by heterodyne_detect.

    Increment variance is 2 pi * linewidth * dt per sample; the path is
    reproducible from (rx, n, seed) so tests can compare DSP phase
    tracking against the injected truth.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(4)[0])
    if rx.lo_linewidth <= 0.0:
        return np.zeros(n)
    sigma = np.sqrt(2.0 * np.pi * rx.lo_linewidth / rx.adc_rate)
    return np.cumsum(sigma * rng.standard_normal(n))


_TABLE_PHASES = 512
_tap_table_cache: dict[int, np.ndarray] = {}


def _tap_table(k: int) -> np.ndarray:
    """Polyphase windowed-sinc table: row p holds the 2k taps for a
    fractional delay of p / _TABLE_PHASES samples."""
    if k not in _tap_table_cache:
        offsets = np.arange(-k + 1, k + 1)
        frac = np.arange(_TABLE_PHASES + 1)[:, None] / _TABLE_PHASES
        arg = frac - offsets
        taps = np.sinc(arg)
        taps *= np.i0(_KAISER_BETA * np.sqrt(np.clip(
            1.0 - (arg / k) ** 2, 0.0, 1.0))) / np.i0(_KAISER_BETA)
        _tap_table_cache[k] = taps
    return _tap_table_cache[k]


def resample_clock_skew(x: np.ndarray, ppm: float) -> np.ndarray:
    """Resample x(t) at times t * (1 + ppm * 1e-6) by windowed-sinc
    (Kaiser) band-limited interpolation, evaluated through a polyphase
    tap table with linear interpolation between fractional phases."""
    if ppm == 0.0:
        return x
    delta = ppm * 1e-6
    n = len(x)
    k = _SINC_HALF_TAPS
    n_out = int((n - 1 - k) / (1.0 + delta))
    offsets = np.arange(-k + 1, k + 1)
    table = _tap_table(k)
    pad = np.concatenate([np.zeros(k), x, np.zeros(k + 1)])
    out = np.empty(n_out)
    chunk = 1 << 16
    for start in range(0, n_out, chunk):
        m = np.arange(start, min(start + chunk, n_out))
        pos = m * (1.0 + delta)
        base = np.floor(pos).astype(np.int64)
        frac = pos - base
        fidx = frac * _TABLE_PHASES
        lo = fidx.astype(np.int64)
        a = (fidx - lo)[:, None]
        taps = table[lo] * (1.0 - a) + table[lo + 1] * a
        idx = base[:, None] + offsets + k
        out[m] = np.sum(pad[idx] * taps, axis=1)
    return out


def quantize(x: np.ndarray, bits: int,
             full_scale: float | None = None) -> tuple[np.ndarray, float]:
    """Mid-tread uniform quantizer; full scale defaults to 8x the RMS.

    Returns (integer codes, scale) with value = code * scale.
    """
    if full_scale is None:
        rms = float(np.sqrt(np.mean(x ** 2)))
        full_scale = 8.0 * rms if rms > 0.0 else 1.0
    half = 1 << (bits - 1)
    scale = full_scale / half
    codes = np.clip(np.round(x / scale), -half, half - 1).astype(np.int32)
    return codes, scale


def heterodyne_detect(sig, pilots: PilotPlan | None, rx: ReceiverModel,
                      seed: int, inject_pilots: bool = True,
                      metadata: dict | None = None) -> RawTrace:
    """Detect one or two polarization envelopes as quantized photocurrents.

    Per channel: (optional) pilot injection, detector-efficiency vacuum
    admixture, beat against the detuned LO with Wiener phase noise
    (I = sqrt(2) Re[u exp(i(2 pi dw t + phase))]), receiver clock-skew
    resampling, electronic-noise addition, and mid-tread quantization.
    All injected ground truth lands in the metadata.
    """
    channels = [np.asarray(c) for c in (sig if isinstance(sig, (tuple, list))
                                        else [sig])]
    if not 1 <= len(channels) <= 2:
        raise DataError("one or two polarization channels expected")
    n = len(channels[0])
    max_pilot = max(pilots.frequencies) if pilots else 0.0
    rx.check_aliasing(max_pilot)
    if pilots and any(abs(f + rx.lo_detuning) < 1e3 or abs(f) < 1e3
                      for f in pilots.frequencies):
        raise DataError("pilot collides with the LO beat frequency")

    seeds = np.random.SeedSequence(seed).spawn(4)
    # seeds[0] reserved: lo_phase_path spawns index 0 internally from `seed`
    phase = lo_phase_path(rx, n, seed)
    t = np.arange(n) / rx.adc_rate
    # phase accumulated in double precision, reduced mod 2 pi, then the
    # phasor is built in single precision (4e-7 rad reduction error is
    # far below the quantizer floor)
    ph = np.remainder(2.0 * np.pi * rx.lo_detuning * t + phase,
                      2.0 * np.pi).astype(np.float32)
    carrier = np.exp(1j * ph)
    eta = rx.detector_efficiency
    eps_var = (0.0 if rx.electronic_noise_db == -np.inf
               else 10.0 ** (rx.electronic_noise_db / 10.0))

    meta = dict(metadata or {})
    meta.update({
        "lo_detuning": rx.lo_detuning, "lo_linewidth": rx.lo_linewidth,
        "adc_rate": rx.adc_rate, "adc_bits": rx.adc_bits,
        "clock_ppm": rx.clock_ppm, "electronic_noise_db": rx.electronic_noise_db,
        "detector_efficiency": eta, "detect_seed": seed,
        "n_channels": len(channels),
    })
    if pilots:
        meta["pilot_frequencies"] = ",".join(f"{f:.6f}" for f in pilots.frequencies)
        meta["pilot_powers"] = ",".join(f"{p:.6f}" for p in pilots.powers)

    vac_seeds = seeds[1].spawn(2)
    el_seeds = seeds[2].spawn(2)
    out = []
    for i, u in enumerate(channels):
        if len(u) != n:
            raise DataError("channel lengths differ")
        if pilots and inject_pilots:
            u = add_pilots(u, pilots, rx.adc_rate)
        if eta < 1.0:
            u = float(np.sqrt(eta)) * u + float(np.sqrt(1.0 - eta)) \
                * vacuum_field(n, vac_seeds[i])
        current = 2.0 ** 0.5 * np.real(u * carrier)
        current = resample_clock_skew(current, rx.clock_ppm)
        if eps_var > 0.0:
            rng = np.random.default_rng(el_seeds[i])
            noise = rng.standard_normal(len(current),
                                        dtype=np.float32)
            current = current + float(np.sqrt(eps_var)) * noise
        codes, scale = quantize(current, rx.adc_bits)
        meta[f"adc_scale_{i}"] = scale
        out.append(codes)
    return RawTrace(channels=out, sample_rate=rx.adc_rate,
                    bit_depth=rx.adc_bits, metadata=meta)


def calibration_traces(rx: ReceiverModel, duration: float,
                       seed: int) -> tuple[RawTrace, RawTrace]:
    """(vacuum trace, electronic-noise trace) under identical quantization
    settings as a signal run: vacuum = shot + electronic noise;
    electronic = LO blocked, electronic noise only."""
    n = int(round(duration * rx.adc_rate))
    seeds = np.random.SeedSequence(seed).spawn(3)
    vac = heterodyne_detect(vacuum_field(n, seeds[0]), None, rx, seed,
                            metadata={"calibration": "vacuum"})
    n_out = len(vac.channels[0])
    eps_var = (0.0 if rx.electronic_noise_db == -np.inf
               else 10.0 ** (rx.electronic_noise_db / 10.0))
    rng = np.random.default_rng(seeds[1])
    el = np.sqrt(eps_var) * rng.standard_normal(n_out)
    codes, scale = quantize(el, rx.adc_bits)
    elec = RawTrace(channels=[codes], sample_rate=rx.adc_rate,
                    bit_depth=rx.adc_bits,
                    metadata={"calibration": "electronic",
                              "electronic_noise_db": rx.electronic_noise_db,
                              "adc_rate": rx.adc_rate, "n_channels": 1,
                              "adc_scale_0": scale})
    return vac, elec
