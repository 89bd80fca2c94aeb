"""Statistical model of a real-time CAN intrusion detector.

No features or learning: each frame is flagged with a fixed probability that
depends on its ground-truth provenance, and the flag only reaches the
controller ``response_time`` seconds later.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

from accsim.canbus import SPOOFED, CanFrame
from accsim.rng import make_rng

# absorbs tick*dt rounding when comparing against visible_at
_TIME_EPS = 1e-9


@dataclass(frozen=True)
class IdsConfig:
    detection_rate: float = 0.97
    response_time: float = 1.026  # s
    detection_latency: float = 0.152  # s, reported only
    false_positive_rate: float = 0.0
    flag_hold: float = 1.0  # s
    seed: int | None = None

    def __post_init__(self):
        for name in ("detection_rate", "false_positive_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if not self.response_time >= self.detection_latency >= 0:
            raise ValueError("need response_time >= detection_latency >= 0")
        if not self.flag_hold > 0:
            raise ValueError("flag_hold must be positive")


@dataclass(frozen=True)
class IdsVerdict:
    timestamp: float
    flagged: bool
    visible_at: float


def poll(now: float, verdicts: Iterable[IdsVerdict], flag_hold: float) -> bool:
    """Is an intrusion flag showing at ``now``? Each visible detection holds the flag for ``flag_hold``."""
    return any(
        v.flagged and v.visible_at <= now + _TIME_EPS and now + _TIME_EPS < v.visible_at + flag_hold
        for v in verdicts
    )


class IntrusionDetector:
    def __init__(self, config: IdsConfig, seed: int):
        self.config = config
        self._rng = make_rng(seed)
        self._pending: deque[IdsVerdict] = deque()
        self._active_until = float("-inf")
        self.classified = 0
        self.flagged = 0

    def classify(self, frame: CanFrame) -> IdsVerdict:
        c = self.config
        rate = c.detection_rate if frame.provenance == SPOOFED else c.false_positive_rate
        # one draw per frame regardless of provenance keeps the stream aligned with the frame sequence
        flagged = bool(self._rng.random() < rate)
        self.classified += 1
        visible_at = frame.timestamp + c.response_time if flagged else frame.timestamp
        verdict = IdsVerdict(frame.timestamp, flagged, visible_at)
        if flagged:
            self.flagged += 1
            self._pending.append(verdict)
        return verdict

    def poll(self, now: float) -> bool:
        # visible_at is non-decreasing because frames arrive in time order
        pending = self._pending
        while pending and pending[0].visible_at <= now + _TIME_EPS:
            v = pending.popleft()
            self._active_until = max(self._active_until, v.visible_at + self.config.flag_hold)
        return now + _TIME_EPS < self._active_until
