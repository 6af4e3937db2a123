"""Gaussian-state linear algebra: covariance estimation, symplectic
spectra, entropies, measurement conditioning, and the purification model."""

from .covariance import (CovMatrix4, dump_covariance, estimate_covariance,
                         load_covariance)
from .entropy import (P_QUAD, X_QUAD, condition_on_homodyne, entropy_of_modes,
                      g_function, von_neumann_entropy)
from .purification import (DetectorModel, PurifiedState, SetupModel,
                           TrustModel, build_purification, fit_setup_model)
from .symplectic import (beamsplitter, direct_sum, omega, partial_trace,
                         purified_source, symplectic_eigenvalues, thermal,
                         two_mode_squeezed, vacuum)

__all__ = [
    "CovMatrix4", "estimate_covariance", "dump_covariance", "load_covariance",
    "X_QUAD", "P_QUAD", "g_function", "von_neumann_entropy",
    "condition_on_homodyne", "entropy_of_modes",
    "DetectorModel", "TrustModel", "SetupModel", "PurifiedState",
    "fit_setup_model", "build_purification",
    "omega", "direct_sum", "beamsplitter", "vacuum", "thermal",
    "two_mode_squeezed", "purified_source", "symplectic_eigenvalues",
    "partial_trace",
]
