"""Temporal-mode filtering, shot-noise normalization, and the
quadrature-rotation decorrelation step."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import AmbiguousRotation, DataError

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def _golden_section(func, lo, hi, tol=1e-10):
    """Golden-section minimizer on [lo, hi] (objective unimodal there)."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = func(c), func(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = func(d)
    return 0.5 * (a + b)

DEFAULT_SAMPLES_PER_STATE = 40
AMBIGUOUS_RATIO = (0.95, 1.05)


@dataclass
class QuadratureEnsemble:
    x: np.ndarray
    p: np.ndarray
    normalization: str = "raw"          # "raw" or "snu"
    samples_per_state: int = DEFAULT_SAMPLES_PER_STATE
    bandwidth: float = 25e6

    def __post_init__(self):
        if len(self.x) != len(self.p):
            raise DataError("x and p sequences must have equal length")
        if self.normalization not in ("raw", "snu"):
            raise DataError(f"unknown normalization {self.normalization!r}")

    def __len__(self):
        return len(self.x)

    def covariance(self) -> tuple[float, float, float]:
        return (float(np.var(self.x)), float(np.var(self.p)),
                float(np.cov(self.x, self.p)[0, 1]))


def mode_filter(bb: np.ndarray, samples_per_state: int = DEFAULT_SAMPLES_PER_STATE,
                sample_rate: float = 1e9) -> QuadratureEnsemble:
    """One (X, P) outcome per block: boxcar average over
    `samples_per_state` consecutive baseband samples."""
    n_states = len(bb) // samples_per_state
    if n_states < 1000:
        raise DataError(
            f"sequence supports only {n_states} states (< 1000 minimum)")
    blocks = bb[:n_states * samples_per_state].reshape(n_states,
                                                       samples_per_state)
    mean = blocks.mean(axis=1)
    return QuadratureEnsemble(x=np.ascontiguousarray(mean.real),
                              p=np.ascontiguousarray(mean.imag),
                              normalization="raw",
                              samples_per_state=samples_per_state,
                              bandwidth=sample_rate / samples_per_state / 2.0)


def normalize_to_shot_noise(ens: QuadratureEnsemble,
                            vacuum: QuadratureEnsemble,
                            electronic: QuadratureEnsemble | None = None
                            ) -> QuadratureEnsemble:
    """Rescale so an identically processed vacuum ensemble has unit
    variance per quadrature; electronic-noise variance (trusted-detector
    assumption) is removed from the vacuum reference first."""
    ex = np.var(electronic.x) if electronic is not None else 0.0
    ep = np.var(electronic.p) if electronic is not None else 0.0
    vx = np.var(vacuum.x) - ex
    vp = np.var(vacuum.p) - ep
    if vx <= 0.0 or vp <= 0.0:
        raise DataError("vacuum variance below electronic noise")
    return replace(ens, x=ens.x / np.sqrt(vx), p=ens.p / np.sqrt(vp),
                   normalization="snu")


def rotate_decorrelate(ens: QuadratureEnsemble
                       ) -> tuple[QuadratureEnsemble, float]:
    """Rotation angle minimizing |cov(x, p)| via golden-section search on
    [-pi/4, pi/4), with the smaller variance assigned to x afterwards."""
    vx, vp, c = ens.covariance()
    ratio = vx / vp
    if AMBIGUOUS_RATIO[0] <= ratio <= AMBIGUOUS_RATIO[1]:
        raise AmbiguousRotation(
            f"var(x)/var(p) = {ratio:.3f} too close to 1 for the angle "
            "to be identifiable")

    def abs_cov(phi):
        # covariance of the rotated pair in closed form
        return abs(0.5 * np.sin(2.0 * phi) * (vp - vx)
                   + np.cos(2.0 * phi) * c)

    phi = _golden_section(abs_cov, -np.pi / 4.0, np.pi / 4.0)
    # tie-break: the objective has period pi/2; prefer the smaller |phi|
    for cand in (phi - np.pi / 2.0, phi + np.pi / 2.0):
        if (-np.pi / 4.0 <= cand < np.pi / 4.0 and abs(cand) < abs(phi)
                and abs_cov(cand) <= abs_cov(phi) + 1e-15):
            phi = cand
    cphi, sphi = np.cos(phi), np.sin(phi)
    x = cphi * ens.x + sphi * ens.p
    p = -sphi * ens.x + cphi * ens.p
    if np.var(x) > np.var(p):
        # resolve the phi vs phi + pi/2 ambiguity: squeezed axis -> x
        x, p = p, -x
        phi = phi - np.pi / 2.0 if phi > 0 else phi + np.pi / 2.0
    return replace(ens, x=x, p=p), float(phi)
