"""Upper-level ACC controller with the IDS override.

Decision order each tick:

1. intrusion flag showing          -> emergency brake
2. gap - stopping distance <= 0    -> emergency brake
3. otherwise                       -> PID on the speed error (km/h)

Both emergency branches reset the PID memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from accsim.dynamics import ControlCommand


@dataclass(frozen=True)
class SsdParams:
    t_reaction: float = 2.5  # s
    f: float = 0.35  # tyre/road friction
    g: float = 0.0  # road grade

    def __post_init__(self):
        if self.t_reaction < 0:
            raise ValueError("t_reaction must be non-negative")
        if not self.f + self.g > 0:
            raise ValueError("f + g must be positive")


def ssd(v_kmh: float, p: SsdParams = SsdParams()) -> float:
    """Stopping sight distance in metres for a speed in km/h."""
    if not (math.isfinite(v_kmh) and v_kmh >= 0):
        raise ValueError(f"speed must be finite and non-negative, got {v_kmh!r}")
    return 0.278 * p.t_reaction * v_kmh + v_kmh**2 / (254 * (p.f + p.g))


def gap_margin(current_gap: float, stopping_distance: float) -> float:
    return current_gap - stopping_distance


@dataclass(frozen=True)
class PidGains:
    kp: float = 1.0
    ki: float = 0.7
    kd: float = 0.0
    dt: float = 0.05
    # raw output (km/h of error) that maps to full throttle/brake;
    # tuned together with ActuationLimits.a_max
    u_scale: float = 70.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.u_scale > 0:
            raise ValueError("u_scale must be positive")


# Carried for completeness; the road is straight so nothing steers.
LATERAL_GAINS = PidGains(kp=1.98, ki=0.07, kd=0.20, dt=0.05)


@dataclass(frozen=True)
class PidState:
    integral: float = 0.0  # km/h * s
    prev_error: float = 0.0  # km/h
    primed: bool = False
    raw: float = 0.0  # last unclamped output


def pid_step(state: PidState, gains: PidGains, target: float, current: float) -> tuple[float, PidState]:
    """One discrete PID update. Returns the saturated signal ``u`` and the new state."""
    if not (math.isfinite(target) and math.isfinite(current)):
        raise ValueError("PID inputs must be finite")
    dt = gains.dt
    e = target - current
    integral = state.integral + e * dt
    derivative = (e - state.prev_error) / dt if state.primed else 0.0
    raw = gains.kp * e + gains.ki * integral + gains.kd * derivative
    u = min(1.0, max(-1.0, raw / gains.u_scale))

    # anti-windup: the integral term alone may never exceed saturation
    if gains.ki != 0:
        limit = gains.u_scale / abs(gains.ki)
        integral = min(limit, max(-limit, integral))
    return u, PidState(integral, e, True, raw)


@dataclass(frozen=True)
class PerceivedInputs:
    current_speed: float  # km/h, whatever the bus said last
    target_speed: float  # km/h
    current_gap: float  # m
    intrusion_active: bool = False


@dataclass(frozen=True)
class Decision:
    command: ControlCommand
    pid: PidState
    ssd: float
    margin: float
    reason: str  # "intrusion", "distance" or "pid"


def acc_decide(
    inputs: PerceivedInputs,
    pid: PidState,
    gains: PidGains = PidGains(),
    ssd_params: SsdParams = SsdParams(),
) -> Decision:
    stop_dist = ssd(inputs.current_speed, ssd_params)
    margin = gap_margin(inputs.current_gap, stop_dist)
    if inputs.intrusion_active:
        return Decision(ControlCommand.emergency(), PidState(), stop_dist, margin, "intrusion")
    if margin <= 0:
        return Decision(ControlCommand.emergency(), PidState(), stop_dist, margin, "distance")
    u, new_pid = pid_step(pid, gains, inputs.target_speed, inputs.current_speed)
    return Decision(ControlCommand.normal(u), new_pid, stop_dist, margin, "pid")
