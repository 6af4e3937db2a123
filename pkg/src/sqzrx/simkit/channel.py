"""Polarization channel: unitary Jones rotation plus symmetric loss."""
from __future__ import annotations

import numpy as np

from .models import JonesChannel
from .synth import vacuum_field


def apply_channel(field_xpol: np.ndarray, channel: JonesChannel,
                  seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Propagate an X-polarized envelope through the fiber channel.

    The Y input is fresh vacuum; after the unitary rotation both
    polarizations see the same beamsplitter loss with independent fresh
    vacuum admixed.
    """
    n = len(field_xpol)
    seeds = np.random.SeedSequence(seed).spawn(3)
    ey_in = vacuum_field(n, seeds[0])
    j = channel.jones()
    # python-scalar coefficients keep single-precision envelopes single
    ex = complex(j[0, 0]) * field_xpol + complex(j[0, 1]) * ey_in
    ey = complex(j[1, 0]) * field_xpol + complex(j[1, 1]) * ey_in
    t = channel.transmissivity
    if t < 1.0:
        a, b = float(np.sqrt(t)), float(np.sqrt(1.0 - t))
        ex = a * ex + b * vacuum_field(n, seeds[1])
        ey = a * ey + b * vacuum_field(n, seeds[2])
    return ex, ey
