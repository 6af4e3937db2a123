"""Passive CV-QKD key-rate computation."""

from .rates import (KeyRateReport, KeyScenario, LossEstimate,
                    estimate_channel_loss, holevo_bound, key_rates,
                    mutual_information)

__all__ = [
    "KeyScenario", "KeyRateReport", "LossEstimate",
    "mutual_information", "holevo_bound", "key_rates",
    "estimate_channel_loss",
]
