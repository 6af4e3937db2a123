"""Command-line interface: end-to-end orchestration of simulate,
calibrate, reconstruct, keyrate, report, and sweep stages."""
from .config import RunConfig, SCENARIOS, SCHEMA
from .main import main

__all__ = ["RunConfig", "SCENARIOS", "SCHEMA", "main"]
