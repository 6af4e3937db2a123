"""Heterodyne trace synthesis under configurable impairments, with all
injected ground truth recorded for oracle testing."""

from .analysis import (band_average_db, boxcar_band_average_db,
                       detuning_sweep_db, measured_x_ratio)
from .channel import apply_channel
from .detect import (calibration_traces, heterodyne_detect, lo_phase_path,
                     quantize, resample_clock_skew)
from .models import (JonesChannel, PilotPlan, RawTrace, ReceiverModel,
                     SqueezerModel)
from .scenarios import (lossy_thermal_arm, solve_squeezer_for_band_targets,
                        split_balanced)
from .synth import add_pilots, synthesize_squeezed_field, vacuum_field
from .traceio import read_trace, write_trace

__all__ = [
    "SqueezerModel", "PilotPlan", "JonesChannel", "ReceiverModel", "RawTrace",
    "synthesize_squeezed_field", "vacuum_field", "add_pilots",
    "apply_channel", "heterodyne_detect", "calibration_traces",
    "lo_phase_path", "resample_clock_skew", "quantize",
    "read_trace", "write_trace",
    "split_balanced", "lossy_thermal_arm", "solve_squeezer_for_band_targets",
    "measured_x_ratio", "boxcar_band_average_db", "band_average_db",
    "detuning_sweep_db",
]
