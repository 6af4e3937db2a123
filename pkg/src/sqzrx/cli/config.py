"""Run configuration: flat namespaced key=value text with a fixed schema.

Config files are diff-friendly plain text::

    # comment
    [run]
    scenario = link10km
    seed = 2024
    receiver.lo_detuning = 200e6

A ``[section]`` header prefixes the following bare keys with
``section.``; fully dotted keys work anywhere.  Every parameter has a
default, and any key outside the schema is a hard error (no silent
typos).

Randomness: all stages derive their seeds from the single master seed
``run.seed`` as the first eight 32-bit words of
``numpy.random.SeedSequence(run.seed).generate_state(8)``, consumed in
the fixed order (0) source field, (1) channel vacua, (2) detection,
(3) calibration, (4) passive source, (5) passive splitting,
(6) arm-1 environment, (7) arm-2 environment.  Stages rerun separately
therefore agree with a single end-to-end run.
"""
from __future__ import annotations

import numpy as np

from ..errors import ConfigError

_FLOAT_LIST = "float_list"

#: key -> (default, type).  Types: int, float, bool, str, _FLOAT_LIST.
SCHEMA = {
    "run.scenario": ("link10km", str),
    "run.seed": (2024, int),
    "run.frames": (2, int),
    "run.frame_duration": (1e-3, float),
    "run.calibration_duration": (1e-3, float),
    "run.samples_per_state": (40, int),
    "run.detunings": ([18e6, 40e6, 70e6, 100e6, 135e6, 167e6], _FLOAT_LIST),
    "run.sweep_duration": (2e-3, float),

    "squeezer.squeezing_db": (3.0, float),       # band-average, below shot noise
    "squeezer.antisqueezing_db": (5.0, float),   # band-average, above shot noise
    "squeezer.bandwidth": (25e6, float),
    "squeezer.gamma": (2e8, float),
    "squeezer.pump_ratio": (-1.0, float),        # >= 0 overrides the band solve
    "squeezer.escape_efficiency": (1.0, float),
    "squeezer.rms_phase_noise": (0.0, float),

    "channel.loss_db": (0.47, float),
    "channel.theta": (0.6, float),
    "channel.phi": (0.0, float),

    "pilot.frequencies": ([30e6, 120e6], _FLOAT_LIST),
    "pilot.powers": ([1e3, 1e3], _FLOAT_LIST),

    "receiver.lo_detuning": (200e6, float),
    "receiver.lo_linewidth": (1e4, float),
    "receiver.adc_rate": (1e9, float),
    "receiver.adc_bits": (16, int),
    "receiver.clock_ppm": (0.0, float),
    "receiver.electronic_noise_db": (-15.0, float),
    "receiver.detector_efficiency": (1.0, float),
    "receiver.signal_bandwidth": (25e6, float),

    "dsp.track_phase": (True, bool),
    "dsp.decorrelate": (True, bool),

    "passive.source_sq_var": (0.646297246, float),
    "passive.source_asq_var": (7.738567660, float),
    "passive.arm1_transmissivity": (0.996277564, float),
    "passive.arm1_thermal": (2.685357838, float),
    "passive.arm2_transmissivity": (0.897428795, float),
    "passive.arm2_thermal": (1.275450436, float),
    "passive.n_symbols": (2_400_000, int),

    "qkd.beta": ([1.0, 0.95], _FLOAT_LIST),
    "qkd.arm2_loss_db": (0.47, float),
}

#: Per-scenario overrides applied on top of the schema defaults (and
#: overridden in turn by the config file and command-line flags).
SCENARIOS = {
    "link10km": {},
    "rf_het": {
        "pilot.frequencies": [40e6],
        "pilot.powers": [100.0],
        "channel.loss_db": 0.0,
        "channel.theta": 0.0,
        "run.samples_per_state": 50,
        "receiver.lo_linewidth": 1e3,
        "squeezer.pump_ratio": 0.48,
        "squeezer.gamma": 5e7,
        "squeezer.escape_efficiency": 0.95,
    },
    "passive_qkd": {},
}


def _parse_scalar(key: str, text: str, kind):
    text = text.strip()
    try:
        if kind is bool:
            low = text.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError(text)
        if kind is int:
            return int(float(text)) if ("e" in text or "." in text) else int(text)
        if kind is float:
            return float(text)
        if kind is _FLOAT_LIST:
            return [float(v) for v in text.split(",") if v.strip()]
        return text
    except ValueError as exc:
        raise ConfigError(f"config key {key}: cannot parse {text!r}") from exc


def parse_config_text(text: str) -> dict:
    """Raw key -> string-value mapping, with section headers expanded."""
    out = {}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key = value, "
                              f"got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if section and "." not in key:
            key = f"{section}.{key}"
        if key in out:
            raise ConfigError(f"config line {lineno}: duplicate key {key}")
        out[key] = value
    return out


class RunConfig:
    """Validated, fully-defaulted run configuration."""

    def __init__(self, values: dict):
        self.values = values

    def __getitem__(self, key: str):
        return self.values[key]

    @classmethod
    def load(cls, path: str | None = None,
             overrides: dict | None = None) -> "RunConfig":
        """Defaults <- scenario preset <- config file <- overrides."""
        raw = parse_config_text(open(path).read()) if path else {}
        for key in raw:
            if key not in SCHEMA:
                raise ConfigError(f"unknown config key: {key}")
        scenario = raw.get("run.scenario", SCHEMA["run.scenario"][0])
        if overrides and "run.scenario" in overrides:
            scenario = overrides["run.scenario"]
        if scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {scenario!r}; choose from "
                              + ", ".join(sorted(SCENARIOS)))
        values = {k: default for k, (default, _) in SCHEMA.items()}
        values.update(SCENARIOS[scenario])
        for key, text in raw.items():
            values[key] = _parse_scalar(key, text, SCHEMA[key][1])
        for key, value in (overrides or {}).items():
            if key not in SCHEMA:
                raise ConfigError(f"unknown config key: {key}")
            values[key] = value
        values["run.scenario"] = scenario
        cfg = cls(values)
        cfg._validate()
        return cfg

    def _validate(self) -> None:
        v = self.values
        if v["run.frames"] < 1:
            raise ConfigError("run.frames must be >= 1")
        for key in ("run.frame_duration", "run.calibration_duration",
                    "run.sweep_duration"):
            if v[key] <= 0.0:
                raise ConfigError(f"{key} must be > 0")
        if v["run.samples_per_state"] < 1:
            raise ConfigError("run.samples_per_state must be >= 1")
        if len(v["pilot.frequencies"]) != len(v["pilot.powers"]):
            raise ConfigError("pilot.frequencies and pilot.powers "
                              "must have equal length")
        for beta in v["qkd.beta"]:
            if not 0.0 < beta <= 1.0:
                raise ConfigError(f"qkd.beta entry {beta} outside (0, 1]")
        if v["passive.n_symbols"] < 10 ** 5:
            raise ConfigError("passive.n_symbols must be >= 1e5")

    def stage_seeds(self) -> list[int]:
        """Eight per-stage seeds derived from the master seed (see module
        docstring for the consumption order)."""
        state = np.random.SeedSequence(self.values["run.seed"]).generate_state(8)
        return [int(s) for s in state]

    def as_text(self) -> str:
        lines = ["# sqzrx run configuration"]
        for key in sorted(self.values):
            value = self.values[key]
            if isinstance(value, list):
                value = ",".join(f"{v:g}" for v in value)
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"
