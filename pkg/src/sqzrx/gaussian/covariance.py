"""Two-party covariance estimation with shot-noise normalization.

The 4x4 covariance uses ordering (X1, P1, X2, P2) in shot-noise units of
the heterodyne outcome statistics.  Standard errors follow the asymptotic
Gaussian formulas SE(var) = var*sqrt(2/n) and
SE(cov) = sqrt((var_a*var_b + cov^2)/n).
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError, NonPhysical


@dataclass
class CovMatrix4:
    entries: np.ndarray          # 4x4 symmetric, shot-noise units
    ci: np.ndarray               # 4x4 standard errors (+-1 SE convention)
    n_symbols: int

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=float)
        self.ci = np.asarray(self.ci, dtype=float)
        if self.entries.shape != (4, 4) or self.ci.shape != (4, 4):
            raise DataError("covariance and CI matrices must be 4x4")
        if not np.allclose(self.entries, self.entries.T, atol=1e-12):
            raise DataError("covariance matrix must be symmetric")
        if np.any(np.diag(self.entries) <= 0):
            raise DataError("covariance diagonal must be positive")

    def validate_physical(self) -> None:
        """Heterodyne-outcome statistics must satisfy entries + I >= 0."""
        w = np.linalg.eigvalsh(self.entries + np.eye(4))
        if w.min() < -1e-9:
            raise NonPhysical(
                f"outcome covariance + I has negative eigenvalue {w.min():.3e}")

    # quadrature block helpers ------------------------------------------------
    def block(self, quadrature: int) -> tuple[float, float, float]:
        """(V1, V2, C) of the chosen quadrature (0 = X, 1 = P)."""
        i, j = quadrature, quadrature + 2
        return self.entries[i, i], self.entries[j, j], self.entries[i, j]


def estimate_covariance(ens1, ens2, electronic_var: tuple[float, float, float, float]
                        = (0.0, 0.0, 0.0, 0.0)) -> CovMatrix4:
    """Sample covariance of two aligned shot-noise-normalized ensembles.

    `electronic_var` holds the electronic-noise variances (already in SNU)
    of (x1, p1, x2, p2); they are subtracted from the diagonal, matching a
    trusted-detector calibration.
    """
    if len(ens1.x) != len(ens2.x):
        raise DataError(
            f"misaligned ensembles: {len(ens1.x)} vs {len(ens2.x)} symbols")
    for e in (ens1, ens2):
        if e.normalization != "snu":
            raise DataError("ensembles must be shot-noise normalized")
    n = len(ens1.x)
    if n < 10 ** 5:
        raise DataError(f"need >= 1e5 symbols for covariance estimation, got {n}")
    data = np.vstack([ens1.x, ens1.p, ens2.x, ens2.p])
    cov = np.cov(data)
    cov -= np.diag(electronic_var)
    se = np.empty((4, 4))
    for i in range(4):
        for j in range(4):
            if i == j:
                se[i, j] = cov[i, i] * np.sqrt(2.0 / n)
            else:
                se[i, j] = np.sqrt((cov[i, i] * cov[j, j] + cov[i, j] ** 2) / n)
    result = CovMatrix4(entries=0.5 * (cov + cov.T), ci=se, n_symbols=n)
    result.validate_physical()
    return result


# --- serialization (structured text) -----------------------------------------

_HEADER = "# sqzrx covariance v1"


def dump_covariance(cov: CovMatrix4) -> str:
    buf = io.StringIO()
    buf.write(_HEADER + "\n")
    buf.write(f"n_symbols = {cov.n_symbols}\n")
    buf.write("entries =\n")
    for row in cov.entries:
        buf.write("  " + " ".join(f"{v:.10e}" for v in row) + "\n")
    buf.write("standard_errors =\n")
    for row in cov.ci:
        buf.write("  " + " ".join(f"{v:.10e}" for v in row) + "\n")
    return buf.getvalue()


def load_covariance(text: str) -> CovMatrix4:
    lines = [ln.rstrip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != _HEADER:
        raise DataError("not a sqzrx covariance file")
    n_symbols = None
    entries, errors = [], []
    target = None
    for ln in lines[1:]:
        s = ln.strip()
        if s.startswith("n_symbols"):
            n_symbols = int(s.split("=")[1])
        elif s.startswith("entries"):
            target = entries
        elif s.startswith("standard_errors"):
            target = errors
        elif target is not None:
            target.append([float(v) for v in s.split()])
    if n_symbols is None or len(entries) != 4 or len(errors) != 4:
        raise DataError("malformed covariance file")
    return CovMatrix4(entries=np.array(entries), ci=np.array(errors),
                      n_symbols=n_symbols)
