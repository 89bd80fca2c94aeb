"""Closed-loop ACC simulator with CAN speed spoofing and an IDS-gated emergency brake."""

from accsim.units import SimClock, advance, kmh_to_mps, mps_to_kmh
from accsim.scenario import PRESETS, ScenarioConfig, preset, run

__all__ = [
    "PRESETS",
    "ScenarioConfig",
    "SimClock",
    "advance",
    "kmh_to_mps",
    "mps_to_kmh",
    "preset",
    "run",
]

__version__ = "0.1.0"
