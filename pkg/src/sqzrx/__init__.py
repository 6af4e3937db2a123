"""sqzrx: digital coherent receiver toolkit for squeezed-light detection
and passive CV-QKD analysis.

Subpackages:
    simkit   - heterodyne trace synthesis under configurable impairments
    dsp      - the reconstruction chain (frequency/clock/polarization/phase
               recovery, mode filtering, spectral fitting)
    gaussian - Gaussian-state linear algebra and the purification model
    qkd      - mutual information, Holevo bounds, secret-key rates
"""

__version__ = "0.1.0"
