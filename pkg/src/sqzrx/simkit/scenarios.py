"""Scenario-level field builders: balanced splitting of one squeezed
source between two stations, and lossy arms with thermal excess noise."""
from __future__ import annotations

import numpy as np
from scipy.optimize import least_squares

from ..errors import DataError
from .models import SqueezerModel
from .synth import vacuum_field


def split_balanced(field: np.ndarray, seed: int
                   ) -> tuple[np.ndarray, np.ndarray]:
    """Balanced beamsplitter: (field + v)/sqrt2 to arm 1, (field - v)/sqrt2
    to arm 2 with fresh vacuum v, giving anti-correlated squeezed
    quadratures between the two outputs."""
    v = vacuum_field(len(field), seed)
    return (field + v) / np.sqrt(2.0), (field - v) / np.sqrt(2.0)


def lossy_thermal_arm(field: np.ndarray, transmissivity: float,
                      thermal_w: float, seed: int) -> np.ndarray:
    """Beamsplitter loss admixing a thermal environment of per-quadrature
    variance `thermal_w` (shot-noise units; 1 = vacuum)."""
    if not 0.0 < transmissivity <= 1.0:
        raise DataError("transmissivity outside (0, 1]")
    if thermal_w < 1.0:
        raise DataError("thermal variance below vacuum")
    if transmissivity == 1.0:
        return field
    env = np.sqrt(thermal_w) * vacuum_field(len(field), seed)
    return (np.sqrt(transmissivity) * field
            + np.sqrt(1.0 - transmissivity) * env)


def solve_squeezer_for_band_targets(sq_target: float, asq_target: float,
                                    bandwidth: float,
                                    gamma: float = 2e8) -> SqueezerModel:
    """Squeezer whose flat band averages of (S-, S+) over [0, bandwidth]
    hit the requested state-level variances."""
    if sq_target >= 1.0 or asq_target <= 1.0 or sq_target * asq_target < 1.0:
        raise DataError("targets must satisfy sq < 1 < asq and sq*asq >= 1")
    f = np.linspace(0.0, bandwidth, 2000)

    def residual(p):
        x, eta = p
        m = SqueezerModel(pump_ratio=x, bandwidth_gamma=gamma,
                          escape_efficiency=eta)
        sm, sp = m.spectra(f)
        return [np.mean(sm) - sq_target, np.mean(sp) - asq_target]

    sol = least_squares(residual, x0=[0.5, 0.9],
                        bounds=([1e-6, 1e-6], [0.999, 1.0]))
    if np.max(np.abs(sol.fun)) > 1e-6:
        raise DataError("no squeezer model reaches the requested band targets")
    return SqueezerModel(pump_ratio=float(sol.x[0]), bandwidth_gamma=gamma,
                         escape_efficiency=float(sol.x[1]))
