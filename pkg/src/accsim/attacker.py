"""Speed-spoofing attacker that injects forged frames onto the bus."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from accsim.canbus import SPEED_FRAME_ID, SPOOFED, CanFrame, encode_speed
from accsim.rng import make_rng

BERNOULLI = "bernoulli"
PERIODIC = "periodic"


@dataclass(frozen=True)
class AttackConfig:
    """Attack parameters.

    ``pattern="bernoulli"`` draws an independent coin per sensor period.
    ``pattern="periodic"`` is a deterministic variant that injects on a fixed
    fraction of periods (e.g. 3 of every 4 for p=0.75), useful to take the
    randomness out of sensitivity studies.
    """

    enabled: bool = False
    spoofed_speed: float = 10.0  # km/h
    injection_probability: float = 0.75
    target_id: int = SPEED_FRAME_ID
    start_time: float = 0.0
    end_time: float | None = float("inf")  # None: until the end of the run
    seed: int | None = None
    pattern: str = BERNOULLI

    def __post_init__(self):
        if self.end_time is None:
            object.__setattr__(self, "end_time", float("inf"))
        if not 0.0 <= self.injection_probability <= 1.0:
            raise ValueError("injection_probability must be in [0, 1]")
        if self.start_time > self.end_time:
            raise ValueError("start_time must not exceed end_time")
        if self.pattern not in (BERNOULLI, PERIODIC):
            raise ValueError(f"unknown attack pattern {self.pattern!r}")
        encode_speed(self.spoofed_speed)  # range check


class Attacker:
    def __init__(self, config: AttackConfig, seed: int):
        self.config = config
        self.payload = encode_speed(config.spoofed_speed)
        self._rng: np.random.Generator = make_rng(seed)
        self.draws = 0
        self.injected = 0

    def active_at(self, now: float) -> bool:
        c = self.config
        return c.enabled and c.start_time <= now <= c.end_time

    def _decide(self) -> bool:
        p = self.config.injection_probability
        k = self.draws
        self.draws += 1
        if self.config.pattern == PERIODIC:
            # floor((k+1)p) - floor(kp) spreads round(p*N) hits evenly over N periods
            return int((k + 1) * p + 1e-12) - int(k * p + 1e-12) == 1
        # always consume the draw so the pattern depends on the draw index only
        return bool(self._rng.random() < p)

    def maybe_inject(self, now: float) -> CanFrame | None:
        """Called once per speed-sensor period inside the attack window."""
        if not self._decide():
            return None
        self.injected += 1
        return CanFrame(now, self.config.target_id, self.payload, SPOOFED)
