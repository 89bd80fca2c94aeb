"""Scenario definitions, presets and the fixed-step closed loop.

Per tick ``k`` (``now = k * dt``), in this order:

1. the lead vehicle advances over [now, now + dt] following its profile
2. authentic speed/distance frames sampled at ``now`` go on the bus
3. the attacker may inject a forged speed frame (after the authentic one)
4. the IDS classifies every delivered frame and is polled at ``now``
5. the controller decodes the latest frames and decides
6. the ego vehicle advances over [now, now + dt]
7. collision check on the end-of-tick gap
8. a trace record is appended

True-state columns of a record (ego speed, lead speed, gap, collision)
describe the vehicles at ``now + dt``; perceived speed, ssd, margin, u,
command mode, intrusion flag and injected frames describe the decision taken
at ``now``.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path

from accsim import canbus
from accsim.attacker import AttackConfig, Attacker
from accsim.canbus import BusSchedule, CanBus
from accsim.controller import PerceivedInputs, PidGains, PidState, SsdParams, acc_decide
from accsim.dynamics import ActuationLimits, ControlCommand, VehicleState, gap, step
from accsim.ids import IdsConfig, IntrusionDetector
from accsim.rng import ATTACK_STREAM, IDS_STREAM, derive_seed
from accsim.units import SimClock, kmh_to_mps, mps_to_kmh

# ---------------------------------------------------------------- lead profiles


@dataclass(frozen=True)
class ConstantProfile:
    speed: float  # km/h
    kind: str = field(default="constant", init=False)

    def __post_init__(self):
        if not self.speed >= 0:
            raise ValueError("lead speed must be non-negative")

    def speed_at(self, now: float) -> float:
        return self.speed


@dataclass(frozen=True)
class TrapezoidProfile:
    """0 -> v_peak over ``ramp_up`` s, hold, back to 0 over ``ramp_down`` s, then stand still."""

    v_peak: float
    ramp_up: float
    hold: float
    ramp_down: float
    kind: str = field(default="trapezoid", init=False)

    def __post_init__(self):
        if self.v_peak < 0 or min(self.ramp_up, self.hold, self.ramp_down) < 0:
            raise ValueError("trapezoid speeds and durations must be non-negative")

    def speed_at(self, now: float) -> float:
        t = now
        if t < self.ramp_up:
            return self.v_peak * t / self.ramp_up
        t -= self.ramp_up
        if t <= self.hold:
            return self.v_peak
        t -= self.hold
        if t < self.ramp_down:
            return self.v_peak * (1 - t / self.ramp_down)
        return 0.0


@dataclass(frozen=True)
class ReplayProfile:
    """Lead speed taken from a candump log.

    Timestamps are rebased so the first frame of the file sits at t=0.
    """

    path: str
    frame_id: int = canbus.SPEED_FRAME_ID
    kind: str = field(default="replay", init=False)

    @cached_property
    def _series(self) -> tuple[list[float], list[float]]:
        frames = canbus.read_candump(self.path)
        if not frames:
            return [], []
        t0 = min(f.timestamp for f in frames)
        pairs = sorted(
            ((f.timestamp - t0, canbus.decode_speed(f, self.frame_id)) for f in frames if f.can_id == self.frame_id),
            key=lambda p: p[0],
        )
        return [p[0] for p in pairs], [p[1] for p in pairs]

    def load(self) -> "ReplayProfile":
        self._series  # noqa: B018 - force I/O errors at load time
        return self

    def speed_at(self, now: float) -> float:
        times, speeds = self._series
        i = bisect.bisect_right(times, now + 1e-9)
        return speeds[i - 1] if i else 0.0


LeadProfile = ConstantProfile | TrapezoidProfile | ReplayProfile


def lead_speed(profile: LeadProfile, now: float) -> float:
    if now < 0:
        raise ValueError("time must be non-negative")
    return profile.speed_at(now)


# ---------------------------------------------------------------- config


@dataclass(frozen=True)
class ScenarioConfig:
    ego_target_speed: float  # km/h
    lead_profile: LeadProfile
    initial_gap: float = 30.0  # m
    duration: float = 60.0  # s
    dt: float = 0.05
    attack: AttackConfig = AttackConfig()
    ids: IdsConfig | None = None
    ssd_params: SsdParams = SsdParams()
    pid_gains: PidGains = PidGains()
    limits: ActuationLimits = ActuationLimits()
    schedule: BusSchedule = BusSchedule()
    stop_on_crash: bool = False
    resume_after_flag: bool = True
    # None: start at the lead's initial speed
    ego_initial_speed: float | None = None
    master_seed: int = 0

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if not self.initial_gap > 0:
            raise ValueError("initial_gap must be positive")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.ego_target_speed < 0:
            raise ValueError("ego_target_speed must be non-negative")
        if self.ego_initial_speed is not None and self.ego_initial_speed < 0:
            raise ValueError("ego_initial_speed must be non-negative")
        if not math.isclose(self.pid_gains.dt, self.dt):
            raise ValueError(f"pid_gains.dt={self.pid_gains.dt} differs from dt={self.dt}")
        self.schedule.validate(self.dt)

    @property
    def n_ticks(self) -> int:
        return int(round(self.duration / self.dt))

    @property
    def attack_seed(self) -> int:
        if self.attack.seed is not None:
            return self.attack.seed
        return derive_seed(self.master_seed, ATTACK_STREAM)

    @property
    def ids_seed(self) -> int:
        if self.ids is not None and self.ids.seed is not None:
            return self.ids.seed
        return derive_seed(self.master_seed, IDS_STREAM)


# ---------------------------------------------------------------- results


# not frozen: one of these is built every tick and frozen init is ~3x slower
@dataclass(slots=True)
class TraceRecord:
    tick: int
    now: float
    ego_speed_true: float  # km/h
    ego_speed_perceived: float  # km/h
    lead_speed: float  # km/h
    gap: float  # m
    ssd: float  # m
    margin: float  # m
    u: float
    command_mode: str
    intrusion_active: bool
    frames_injected: int
    collision: bool


@dataclass(frozen=True)
class RunSummary:
    crashed: bool
    crash_count: int
    first_crash_time: float | None
    min_gap: float
    mean_ego_speed: float
    ticks: int


def summarize(trace: list[TraceRecord]) -> RunSummary:
    crashes = [r for r in trace if r.collision]
    return RunSummary(
        crashed=bool(crashes),
        crash_count=len(crashes),
        first_crash_time=crashes[0].now if crashes else None,
        min_gap=min((r.gap for r in trace), default=float("nan")),
        mean_ego_speed=math.fsum(r.ego_speed_true for r in trace) / len(trace) if trace else float("nan"),
        ticks=len(trace),
    )


# ---------------------------------------------------------------- loop


def run(config: ScenarioConfig) -> tuple[list[TraceRecord], RunSummary]:
    cfg = config
    dt = cfg.dt
    profile = cfg.lead_profile
    if isinstance(profile, ReplayProfile):
        profile.load()
    sched = cfg.schedule
    bus = CanBus()
    attacker = Attacker(cfg.attack, cfg.attack_seed)
    ids = IntrusionDetector(cfg.ids, cfg.ids_seed) if cfg.ids is not None else None

    lead_v0 = lead_speed(profile, 0.0)
    ego_v0 = lead_v0 if cfg.ego_initial_speed is None else cfg.ego_initial_speed
    lead = VehicleState(0.0, kmh_to_mps(lead_v0))
    ego = VehicleState(0.0, kmh_to_mps(ego_v0))
    offset = cfg.initial_gap

    # hoisted out of the tick loop, which dominates run time
    speed_id, distance_id = sched.speed_frame_id, sched.distance_frame_id
    decode_speed, decode_distance = canbus.decode_speed, canbus.decode_distance
    target, gains, ssd_params, limits = cfg.ego_target_speed, cfg.pid_gains, cfg.ssd_params, cfg.limits
    latching = not cfg.resume_after_flag
    speed_at = profile.speed_at

    pid = PidState()
    # fail-safe until the first frames arrive: zero gap forces braking
    perceived_speed = 0.0
    perceived_gap = 0.0
    latched = False
    prev_gap = offset
    trace: list[TraceRecord] = []

    for k in range(cfg.n_ticks):
        clock = SimClock(k, dt)
        now = clock.now
        sampled_gap = gap(ego, lead, offset)
        sampled_speed = mps_to_kmh(ego.speed)

        # (1) lead follows its profile exactly
        v_next = kmh_to_mps(speed_at(now + dt))
        lead = VehicleState(lead.position + 0.5 * (lead.speed + v_next) * dt, v_next, (v_next - lead.speed) / dt)

        # (2) authentic broadcast, (3) injection
        bus.send_all(canbus.broadcast(clock, sampled_speed, sampled_gap, sched))
        injected = 0
        if attacker.active_at(now) and sched.speed_due(clock):
            frame = attacker.maybe_inject(now)
            if frame is not None:
                bus.send(frame)
                injected = 1
        frames = bus.deliver()

        # (4) IDS
        intrusion = False
        if ids is not None:
            for f in frames:
                ids.classify(f)
            intrusion = ids.poll(now)
        if intrusion and latching:
            latched = True
        intrusion = intrusion or latched

        # (5) controller sees only decoded payloads
        for f in frames:
            try:
                if f.can_id == speed_id:
                    perceived_speed = decode_speed(f, speed_id)
                elif f.can_id == distance_id:
                    perceived_gap = decode_distance(f, distance_id)
            except canbus.MalformedFrameError:
                continue
        decision = acc_decide(
            PerceivedInputs(perceived_speed, target, perceived_gap, intrusion), pid, gains, ssd_params
        )
        pid = decision.pid
        cmd: ControlCommand = decision.command

        # (6) ego dynamics
        ego = step(ego, cmd, limits, dt)

        # (7) collision on the end-of-tick gap
        g = gap(ego, lead, offset)
        collision = g <= 0 < prev_gap
        prev_gap = g
        if g < 0:
            # stay in contact rather than pass through the lead
            ego = replace(ego, position=lead.position + offset)

        # (8)
        trace.append(
            TraceRecord(
                tick=k,
                now=now,
                ego_speed_true=mps_to_kmh(ego.speed),
                ego_speed_perceived=perceived_speed,
                lead_speed=mps_to_kmh(lead.speed),
                gap=g,
                ssd=decision.ssd,
                margin=decision.margin,
                u=cmd.u,
                command_mode=cmd.mode,
                intrusion_active=intrusion,
                frames_injected=injected,
                collision=collision,
            )
        )
        if collision and cfg.stop_on_crash:
            break

    return trace, summarize(trace)


# ---------------------------------------------------------------- presets

# scenario 1 stands in for the recorded lead-vehicle log with a 0 -> 30 -> 0 km/h trapezoid
SCENARIO1_LEAD = TrapezoidProfile(30.0, 10.0, 10.0, 10.0)
DEFAULT_IDS = IdsConfig()


# Under attack the crashes come from a noisy limit cycle, so each minute of
# attack is a fresh chance to crash. Five minutes separates the crash and
# no-crash cases reliably.
ATTACK_DURATION = 300.0


def attacked_config(speed: float, spoof: float, with_ids: bool) -> ScenarioConfig:
    """Ego and lead at the same constant speed, ego speed frames spoofed at p=0.75."""
    return ScenarioConfig(
        ego_target_speed=speed,
        duration=ATTACK_DURATION,
        lead_profile=ConstantProfile(speed),
        attack=AttackConfig(enabled=True, spoofed_speed=spoof, injection_probability=0.75),
        ids=DEFAULT_IDS if with_ids else None,
    )


PRESETS: dict[str, ScenarioConfig] = {
    "scenario1": ScenarioConfig(ego_target_speed=25.0, lead_profile=SCENARIO1_LEAD),
    "scenario2-60": attacked_config(60.0, 10.0, with_ids=False),
    "scenario2-90": attacked_config(90.0, 10.0, with_ids=False),
    "scenario3-60": attacked_config(60.0, 10.0, with_ids=True),
    "scenario3-90": attacked_config(90.0, 10.0, with_ids=True),
    "matrix-40-5": attacked_config(40.0, 5.0, with_ids=False),
    "matrix-40-10": attacked_config(40.0, 10.0, with_ids=False),
}


def preset(name: str, **overrides) -> ScenarioConfig:
    try:
        cfg = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
    return replace(cfg, **overrides) if overrides else cfg
