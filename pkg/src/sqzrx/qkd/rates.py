"""Secret-key rates of the passive squeezed-state protocol.

Key bounds (bits/symbol), reference side B = Lab 2 (Bob), whose
heterodyne ports appear explicitly in the purification:

    K^X  = max[0, beta * I_X - chi(E|B^P)]
    K^P  = max[0, beta * I_P - chi(E|B^X)]
    K^XP = max[0, beta * (I_X + I_P) - chi(E)]

In the single-quadrature strategies the complementary quadrature is
treated as publicly disclosed and enters Eve's side information through
the conditional Holevo bounds chi(E|B^q) = S(E|B^q) - S(E|B^X B^P);
chi(E) = S(E) - S(E|B^X B^P).

Each strategy commits to its own security scenario: the share and
orientation of the source-monitor record ceded to the eavesdropper
differs between the X-key bound and the P/joint-key bounds (see the
purification module).  `key_rates` builds both scenario states and
takes each chi from the scenario it belongs to.
"""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from ..errors import DataError, InconsistentLoss, NumericalError
from ..gaussian.covariance import CovMatrix4
from ..gaussian.entropy import (P_QUAD, X_QUAD, condition_on_homodyne,
                                entropy_of_modes)
from ..gaussian.purification import (SCENARIO_PXP_MONITOR,
                                     SCENARIO_X_MONITOR, DetectorModel,
                                     PurifiedState, TrustModel,
                                     build_purification, fit_setup_model)


@dataclass
class KeyScenario:
    beta: float = 1.0
    reference_side: int = 1            # Lab index used for conditioning
    strategy: str = "all"              # "x", "p", "xp", or "all"

    def __post_init__(self):
        if not 0.0 < self.beta <= 1.0:
            raise DataError(f"beta = {self.beta} outside (0, 1]")
        if self.strategy not in ("x", "p", "xp", "all"):
            raise DataError(f"unknown strategy {self.strategy!r}")


@dataclass
class KeyRateReport:
    beta: float
    i_x: float
    i_p: float
    chi_full: float
    chi_given_p: float
    chi_given_x: float
    k_x: float
    k_p: float
    k_xp: float

    def as_text(self) -> str:
        buf = io.StringIO()
        buf.write("# sqzrx key-rate report\n")
        buf.write(f"beta = {self.beta}\n")
        buf.write(f"I_X = {self.i_x:.6e} bits/symbol\n")
        buf.write(f"I_P = {self.i_p:.6e} bits/symbol\n")
        buf.write(f"chi(E) = {self.chi_full:.6e}\n")
        buf.write(f"chi(E|B^P) = {self.chi_given_p:.6e}\n")
        buf.write(f"chi(E|B^X) = {self.chi_given_x:.6e}\n")
        buf.write(f"K_X = {self.k_x:.6e}\n")
        buf.write(f"K_P = {self.k_p:.6e}\n")
        buf.write(f"K_XP = {self.k_xp:.6e}\n")
        return buf.getvalue()

    CSV_HEADER = "beta,I_X,I_P,chi_full,chi_given_P,chi_given_X,K_X,K_P,K_XP"

    def as_csv_row(self) -> str:
        return ",".join(f"{v:.6e}" for v in
                        (self.beta, self.i_x, self.i_p, self.chi_full,
                         self.chi_given_p, self.chi_given_x,
                         self.k_x, self.k_p, self.k_xp))


def mutual_information(cov: CovMatrix4, quadrature: int,
                       detector: DetectorModel | None = None) -> float:
    """I(Lab1:Lab2) in bits/symbol on the detected outcome statistics.

    The covariance holds electronic-noise-free outcome statistics; the key
    is distilled from the data as actually recorded, so the characterized
    detector efficiency and electronic noise re-enter here.
    """
    detector = detector or DetectorModel()
    v1, v2, c = cov.block(quadrature)
    eta, eps = detector.efficiency, detector.electronic_noise
    v1 = eta * v1 + (1.0 - eta) + eps
    v2 = eta * v2 + (1.0 - eta) + eps
    c = eta * c
    if c * c >= v1 * v2:
        raise DataError("correlation exceeds variance product")
    return float(-0.5 * np.log2(1.0 - c * c / (v1 * v2)))


def _shifted(modes: list[int], removed: list[int]) -> list[int]:
    return [m - sum(1 for r in removed if r < m) for m in modes]


def _eve_entropies(state: PurifiedState) -> dict[str, float]:
    """S(E), S(E|B^X), S(E|B^P), S(E|B^X B^P) on Eve's partition."""
    cov = state.cov
    eve = state.eve_modes
    xp_, pp_ = state.x_port, state.p_port
    # Bob's ports are ideal heterodyne outputs; his detection
    # imperfections are already folded into the fitted arm loss, so the
    # conditioning carries no extra variance.
    s_e = entropy_of_modes(cov, eve)
    g_x = condition_on_homodyne(cov, xp_, X_QUAD)
    s_ex = entropy_of_modes(g_x, _shifted(eve, [xp_]))
    g_xp = condition_on_homodyne(g_x, _shifted([pp_], [xp_])[0], P_QUAD)
    s_exp = entropy_of_modes(g_xp, _shifted(eve, [xp_, pp_]))
    g_p = condition_on_homodyne(cov, pp_, P_QUAD)
    s_ep = entropy_of_modes(g_p, _shifted(eve, [pp_]))
    return {"none": s_e, "x": s_ex, "p": s_ep, "xp": s_exp}


def holevo_bound(state: PurifiedState, conditioning: str = "none") -> float:
    """Holevo bound on Eve's information given the disclosed quadrature(s).

    conditioning: "none" -> chi(E); "given_x" -> chi(E|B^X);
    "given_p" -> chi(E|B^P); "given_both" -> 0 (everything disclosed).
    """
    if conditioning == "given_both":
        return 0.0
    s = _eve_entropies(state)
    try:
        prior = {"none": s["none"], "given_x": s["x"], "given_p": s["p"]}[conditioning]
    except KeyError:
        raise DataError(f"unknown conditioning {conditioning!r}") from None
    chi = prior - s["xp"]
    if chi < -1e-6:
        raise NumericalError(f"negative Holevo bound {chi:.3e}")
    return max(chi, 0.0)


def key_rates(cov: CovMatrix4, scenario: KeyScenario, arm2_loss_db: float,
              detector: DetectorModel | None = None) -> KeyRateReport:
    """Key-rate bounds from a measured covariance and the Lab-2 channel loss.

    Fits the setup model, builds the per-strategy purifications, and
    evaluates the detected mutual information and Holevo bounds.  The
    reduced two-lab state of each purification is checked against the
    measured covariance on the way.
    """
    detector = detector or DetectorModel()
    i_x = mutual_information(cov, X_QUAD, detector)
    i_p = mutual_information(cov, P_QUAD, detector)
    setup = fit_setup_model(cov, arm2_loss_db)
    g_x, sg_x = SCENARIO_X_MONITOR
    g_p, sg_p = SCENARIO_PXP_MONITOR
    state_x = build_purification(
        setup, detector,
        TrustModel(source_monitor_fraction=g_x, source_monitor_squeeze=sg_x),
        measured=cov)
    state_pxp = build_purification(
        setup, detector,
        TrustModel(source_monitor_fraction=g_p, source_monitor_squeeze=sg_p))
    s = _eve_entropies(state_pxp)
    chi_full = max(s["none"] - s["xp"], 0.0)
    chi_given_x = max(s["x"] - s["xp"], 0.0)
    chi_given_p = holevo_bound(state_x, "given_p")
    b = scenario.beta
    return KeyRateReport(
        beta=b, i_x=i_x, i_p=i_p,
        chi_full=chi_full, chi_given_p=chi_given_p, chi_given_x=chi_given_x,
        k_x=max(0.0, b * i_x - chi_given_p),
        k_p=max(0.0, b * i_p - chi_given_x),
        k_xp=max(0.0, b * (i_x + i_p) - chi_full),
    )


@dataclass
class LossEstimate:
    pilot_db: float
    variance_db: float
    sigma_db: float
    consistent: bool


def estimate_channel_loss(pilot_power_tx_db: float, pilot_power_rx_db: float,
                          asq_var_tx: float, asq_var_rx: float,
                          asq_var_rx_se: float = 0.0) -> LossEstimate:
    """Channel loss from pilot powers and, independently, from the
    anti-squeezed variance contraction V_rx - 1 = T * (V_tx - 1)."""
    loss_pilot = pilot_power_tx_db - pilot_power_rx_db
    if asq_var_tx <= 1.0 or asq_var_rx <= 1.0:
        raise DataError("anti-squeezed variances must exceed 1 SNU")
    t = (asq_var_rx - 1.0) / (asq_var_tx - 1.0)
    if not 0.0 < t <= 1.0 + 1e-9:
        raise DataError(f"implied transmissivity {t:.4f} outside (0, 1]")
    loss_var = -10.0 * np.log10(min(t, 1.0))
    sigma = (10.0 / np.log(10.0)) * asq_var_rx_se / (asq_var_rx - 1.0)
    consistent = abs(loss_pilot - loss_var) <= 3.0 * max(sigma, 1e-12)
    if not consistent:
        raise InconsistentLoss(
            f"pilot loss {loss_pilot:.3f} dB vs variance loss {loss_var:.3f} dB "
            f"(3 sigma = {3 * sigma:.3f} dB)")
    return LossEstimate(pilot_db=loss_pilot, variance_db=loss_var,
                        sigma_db=sigma, consistent=True)
