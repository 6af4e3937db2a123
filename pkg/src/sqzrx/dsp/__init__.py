"""The reconstruction chain: pilot frequency recovery, clock recovery,
polarization recovery, UKF phase tracking, quadrature rotation, mode
filtering, vacuum-normalized PSDs, and squeezing-model fitting."""

from .analytic import AnalyticSignal, analytic
from .demod import demodulate, notch
from .ensemble import (QuadratureEnsemble, mode_filter,
                       normalize_to_shot_noise, rotate_decorrelate)
from .phase import (apply_phase_correction, estimate_noise_vars,
                    ukf_phase_track)
from .pilots import ClockModifier, PilotEstimate, clock_recover, estimate_pilot
from .pipeline import ReconstructionRecord, reconstruct
from .polarization import PolarizationResult, polarization_recover
from .qio import read_ensemble, write_ensemble
from .spectrum import (PsdRatio, fit_squeezing_model,
                       squeezing_spectra_with_jitter, welch_psd)

__all__ = [
    "AnalyticSignal", "analytic",
    "PilotEstimate", "ClockModifier", "estimate_pilot", "clock_recover",
    "demodulate", "notch",
    "PolarizationResult", "polarization_recover",
    "ukf_phase_track", "estimate_noise_vars", "apply_phase_correction",
    "QuadratureEnsemble", "mode_filter", "normalize_to_shot_noise",
    "rotate_decorrelate",
    "PsdRatio", "welch_psd", "fit_squeezing_model",
    "squeezing_spectra_with_jitter",
    "ReconstructionRecord", "reconstruct",
    "read_ensemble", "write_ensemble",
]
