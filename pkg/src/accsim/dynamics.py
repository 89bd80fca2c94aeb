"""Point-mass longitudinal vehicle model.

The lower-level controller is assumed ideal: the commanded acceleration is
applied exactly for the whole step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

NORMAL = "normal"
# speeds below this after braking are float residue from v - k*b*dt
_STOP_EPS = 1e-9
EMERGENCY = "emergency_brake"


@dataclass(frozen=True)
class VehicleState:
    position: float = 0.0  # m
    speed: float = 0.0  # m/s
    last_accel: float = 0.0  # m/s^2


@dataclass(frozen=True)
class ActuationLimits:
    a_max: float = 6.0  # tuned with PidGains.u_scale so the attack matrix holds
    b_max: float = 6.0
    b_emergency: float = 8.0

    def __post_init__(self):
        if min(self.a_max, self.b_max, self.b_emergency) <= 0:
            raise ValueError("actuation limits must be strictly positive")
        if self.b_emergency < self.b_max:
            raise ValueError("b_emergency must be >= b_max")


@dataclass(frozen=True)
class ControlCommand:
    """Either ``normal`` with a throttle/brake signal ``u`` in [-1, 1] or ``emergency_brake``."""

    mode: str = NORMAL
    u: float = 0.0

    def __post_init__(self):
        if self.mode not in (NORMAL, EMERGENCY):
            raise ValueError(f"unknown command mode {self.mode!r}")
        if not math.isfinite(self.u):
            raise ValueError("control signal must be finite")
        object.__setattr__(self, "u", min(1.0, max(-1.0, self.u)))
        if self.mode == EMERGENCY:
            object.__setattr__(self, "u", -1.0)

    @classmethod
    def normal(cls, u: float) -> "ControlCommand":
        return cls(NORMAL, u)

    @classmethod
    def emergency(cls) -> "ControlCommand":
        return cls(EMERGENCY, -1.0)

    @property
    def is_emergency(self) -> bool:
        return self.mode == EMERGENCY


def commanded_accel(cmd: ControlCommand, limits: ActuationLimits) -> float:
    if cmd.is_emergency:
        return -limits.b_emergency
    if cmd.u >= 0:
        return cmd.u * limits.a_max
    return cmd.u * limits.b_max


def step(state: VehicleState, cmd: ControlCommand, limits: ActuationLimits, dt: float) -> VehicleState:
    """Advance one vehicle by ``dt`` seconds with a trapezoidal position update.

    If braking would take the speed below zero, the vehicle stops partway
    through the step and only travels the distance covered until then.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if not (math.isfinite(state.position) and math.isfinite(state.speed)):
        raise ValueError(f"non-finite vehicle state {state!r}")

    a = commanded_accel(cmd, limits)
    v0 = state.speed
    v1 = v0 + a * dt
    if v1 > _STOP_EPS or (v1 > 0 and a >= 0):
        dx = 0.5 * (v0 + v1) * dt
    else:
        v1 = 0.0
        # a < 0 here unless v0 == 0
        dx = 0.5 * v0 * (v0 / -a) if a < 0 else 0.0
    return VehicleState(state.position + dx, v1, a)


def gap(ego: VehicleState, lead: VehicleState, lead_offset: float) -> float:
    """Bumper-to-bumper distance from ego to lead; <= 0 means contact."""
    return (lead.position + lead_offset) - ego.position
