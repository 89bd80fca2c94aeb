"""Unit conversions and the fixed-step simulation clock.

Everything inside the simulator runs in SI units. km/h only shows up at the
stopping-distance formula, in the CAN speed payload and in user-facing
config/output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

KMH_PER_MPS = 3.6


def _check_speed(s: float) -> None:
    if not math.isfinite(s) or s < 0:
        raise ValueError(f"speed must be finite and non-negative, got {s!r}")


def kmh_to_mps(s: float) -> float:
    _check_speed(s)
    return s / KMH_PER_MPS


def mps_to_kmh(s: float) -> float:
    _check_speed(s)
    return s * KMH_PER_MPS


@dataclass(frozen=True)
class SimClock:
    """Integer-indexed clock; ``now`` is derived from the tick, never accumulated."""

    tick_index: int = 0
    dt: float = 0.05

    def __post_init__(self):
        if self.tick_index < 0:
            raise ValueError("tick_index must be non-negative")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt!r}")

    @property
    def now(self) -> float:
        return self.tick_index * self.dt


def advance(clock: SimClock) -> SimClock:
    return SimClock(clock.tick_index + 1, clock.dt)


def is_multiple(value: float, step: float, tol: float = 1e-9) -> bool:
    """True when ``value`` is an integer multiple of ``step`` (up to float noise)."""
    q = value / step
    return abs(q - round(q)) <= tol * max(1.0, abs(q))
