"""Domain types of the trace synthesizer.

All randomness is driven by integer seeds through numpy SeedSequence
spawning, so every operation is a pure function of (inputs, seed).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError


@dataclass
class SqueezerModel:
    """Below-threshold OPO squeezer.

    Quadrature PSDs at sideband frequency f (Hz, shot-noise units):

        S-(f) = 1 - eta * 4x / ((1 + x)^2 + (f/gamma)^2)   (squeezed)
        S+(f) = 1 + eta * 4x / ((1 - x)^2 + (f/gamma)^2)   (anti-squeezed)

    with x = pump_ratio (sqrt(P/P_thr)), gamma the OPO half-linewidth,
    eta the escape efficiency.
    """

    pump_ratio: float
    bandwidth_gamma: float
    escape_efficiency: float = 1.0
    rms_phase_noise: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.pump_ratio < 1.0:
            raise DataError(f"pump_ratio {self.pump_ratio} outside [0, 1)")
        if self.bandwidth_gamma <= 0.0:
            raise DataError("bandwidth_gamma must be > 0")
        if not 0.0 <= self.escape_efficiency <= 1.0:
            raise DataError("escape_efficiency outside [0, 1]")
        if self.rms_phase_noise < 0.0:
            raise DataError("rms_phase_noise must be >= 0")

    def spectra(self, f) -> tuple[np.ndarray, np.ndarray]:
        """(S-, S+) at sideband frequency f in Hz (no phase-noise mixing)."""
        f = np.asarray(f, dtype=float)
        x, eta = self.pump_ratio, self.escape_efficiency
        w2 = (f / self.bandwidth_gamma) ** 2
        s_minus = 1.0 - eta * 4.0 * x / ((1.0 + x) ** 2 + w2)
        s_plus = 1.0 + eta * 4.0 * x / ((1.0 - x) ** 2 + w2)
        return s_minus, s_plus


@dataclass
class PilotPlan:
    """Coherent pilot tones at baseband offsets from the signal carrier.

    Powers are mean tone powers relative to the shot-noise unit
    (default 30 dB above shot noise).
    """

    frequencies: list[float]
    powers: list[float] = None

    def __post_init__(self):
        self.frequencies = [float(f) for f in self.frequencies]
        if not 1 <= len(self.frequencies) <= 2:
            raise DataError("pilot plan must hold one or two tones")
        if len(set(self.frequencies)) != len(self.frequencies):
            raise DataError("pilot frequencies must be distinct")
        if any(f == 0.0 for f in self.frequencies):
            raise DataError("pilot frequency must be nonzero")
        if self.powers is None:
            self.powers = [10.0 ** 3.0] * len(self.frequencies)  # +30 dB
        self.powers = [float(p) for p in self.powers]
        if len(self.powers) != len(self.frequencies):
            raise DataError("one power per pilot required")
        if any(p <= 0.0 for p in self.powers):
            raise DataError("pilot powers must be > 0")


@dataclass
class JonesChannel:
    """Fiber channel: unitary polarization rotation followed by pure loss.

    The rotation matrix is

        [  cos(theta)              sin(theta) e^{-i phi} ]
        [ -sin(theta) e^{+i phi}   cos(theta)            ]

    (the conjugate phase in the lower-left keeps the matrix exactly
    unitary).  Loss is applied symmetrically to both output
    polarizations as a beamsplitter admixing fresh vacuum.
    """

    loss_db: float = 0.0
    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if self.loss_db < 0.0:
            raise DataError("loss_db must be >= 0")

    @property
    def transmissivity(self) -> float:
        return 10.0 ** (-self.loss_db / 10.0)

    def jones(self) -> np.ndarray:
        c, s = np.cos(self.theta), np.sin(self.theta)
        e = np.exp(-1j * self.phi)
        return np.array([[c, s * e], [-s * np.conj(e), c]])


@dataclass
class ReceiverModel:
    """RF-heterodyne receiver with a free-running local oscillator."""

    lo_detuning: float = 200e6
    lo_linewidth: float = 10e3
    adc_rate: float = 1e9
    adc_bits: int = 16
    clock_ppm: float = 0.0
    electronic_noise_db: float = -15.0
    detector_efficiency: float = 1.0
    signal_bandwidth: float = 25e6        # analysis band, for aliasing checks

    def __post_init__(self):
        if not 8 <= self.adc_bits <= 24:
            raise DataError("adc_bits outside [8, 24]")
        if not 0.0 < self.detector_efficiency <= 1.0:
            raise DataError("detector_efficiency outside (0, 1]")
        if self.lo_detuning < 0.0 or self.adc_rate <= 0.0:
            raise DataError("lo_detuning and adc_rate must be non-negative")

    def check_aliasing(self, max_pilot_freq: float) -> None:
        if self.adc_rate <= 2.0 * (self.lo_detuning + max_pilot_freq
                                   + self.signal_bandwidth):
            raise DataError(
                f"adc_rate {self.adc_rate:.3g} violates the Nyquist margin for "
                f"detuning {self.lo_detuning:.3g} + pilots {max_pilot_freq:.3g}")


@dataclass
class RawTrace:
    """Quantized ADC trace(s) with full ground-truth provenance.

    Sample values are integer ADC codes; metadata key `adc_scale_<ch>`
    converts a code to a shot-noise-unit photocurrent value.
    """

    channels: list[np.ndarray]
    sample_rate: float
    bit_depth: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 1 <= len(self.channels) <= 2:
            raise DataError("trace must hold one or two channels")
        n = len(self.channels[0])
        lo, hi = -(1 << (self.bit_depth - 1)), (1 << (self.bit_depth - 1)) - 1
        for ch in self.channels:
            if len(ch) != n:
                raise DataError("channel lengths differ")
            if ch.min() < lo or ch.max() > hi:
                raise DataError("sample outside ADC code range")

    def physical(self, channel: int = 0) -> np.ndarray:
        """Channel samples converted back to shot-noise-unit photocurrent."""
        scale = float(self.metadata[f"adc_scale_{channel}"])
        # single precision: 16-bit codes fit a 24-bit mantissa exactly
        return self.channels[channel].astype(np.float32) * np.float32(scale)
