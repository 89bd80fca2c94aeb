"""Virtual CAN bus, payload codecs and candump log I/O.

Wire format for the two sensor frames (fixed by this package, there is no DBC):

* speed    (default id 0x0C0): km/h x 100 as uint16 little-endian, dlc 2
* distance (default id 0x0D0): metres x 100 as uint16 little-endian, dlc 2

candump lines look like ``(0.050000) vcan0 0C0#7017``.
"""

from __future__ import annotations

import functools
import math
import re
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from accsim.units import SimClock, is_multiple

AUTHENTIC = "authentic"
SPOOFED = "spoofed"

SPEED_FRAME_ID = 0x0C0
DISTANCE_FRAME_ID = 0x0D0
MAX_CENTI_VALUE = 655.35

_U16 = struct.Struct("<H")


class MalformedFrameError(ValueError):
    pass


class CandumpParseError(ValueError):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class CanFrame:
    timestamp: float
    can_id: int
    data: bytes
    # ground truth for the IDS model and telemetry; decoders never look at it
    provenance: str = field(default=AUTHENTIC, compare=True)

    def __post_init__(self):
        if not 0 <= self.can_id < 0x800:
            raise ValueError(f"can_id {self.can_id:#x} is not an 11-bit identifier")
        if len(self.data) > 8:
            raise ValueError(f"payload of {len(self.data)} bytes exceeds 8")
        if self.provenance not in (AUTHENTIC, SPOOFED):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        object.__setattr__(self, "data", bytes(self.data))

    @property
    def dlc(self) -> int:
        return len(self.data)


@dataclass(frozen=True)
class BusSchedule:
    speed_frame_id: int = SPEED_FRAME_ID
    speed_period: float = 0.05
    distance_frame_id: int = DISTANCE_FRAME_ID
    distance_period: float = 0.05

    def validate(self, dt: float) -> None:
        for name in ("speed_period", "distance_period"):
            period = getattr(self, name)
            if period <= 0 or not is_multiple(period, dt):
                raise ValueError(f"{name}={period} must be a positive multiple of dt={dt}")

    def ticks_per(self, period: float, dt: float) -> int:
        return _ticks_per(period, dt)

    def speed_due(self, clock: SimClock) -> bool:
        return clock.tick_index % self.ticks_per(self.speed_period, clock.dt) == 0

    def distance_due(self, clock: SimClock) -> bool:
        return clock.tick_index % self.ticks_per(self.distance_period, clock.dt) == 0


@functools.lru_cache(maxsize=64)
def _ticks_per(period: float, dt: float) -> int:
    return max(1, round(period / dt))


def _encode_centi(value: float, what: str) -> bytes:
    if not (math.isfinite(value) and 0 <= value <= MAX_CENTI_VALUE):
        raise ValueError(f"{what} {value!r} outside [0, {MAX_CENTI_VALUE}]")
    return _U16.pack(round(value * 100))


def _decode_centi(frame: CanFrame, expected_id: int, what: str) -> float:
    if frame.can_id != expected_id:
        raise MalformedFrameError(
            f"{what} frame expected id {expected_id:03X}, got {frame.can_id:03X}"
        )
    if frame.dlc < 2:
        raise MalformedFrameError(f"{what} frame needs 2 data bytes, got {frame.dlc}")
    return _U16.unpack_from(frame.data)[0] / 100


def encode_speed(kmh: float) -> bytes:
    return _encode_centi(kmh, "speed")


def decode_speed(frame: CanFrame, frame_id: int = SPEED_FRAME_ID) -> float:
    """Speed in km/h carried by ``frame``."""
    return _decode_centi(frame, frame_id, "speed")


def encode_distance(metres: float) -> bytes:
    return _encode_centi(metres, "distance")


def decode_distance(frame: CanFrame, frame_id: int = DISTANCE_FRAME_ID) -> float:
    return _decode_centi(frame, frame_id, "distance")


def quantize(value: float) -> float:
    return round(value * 100) / 100


def broadcast(clock: SimClock, true_speed_kmh: float, true_gap_m: float, schedule: BusSchedule) -> list[CanFrame]:
    """Authentic sensor frames due at this tick, stamped ``clock.now``.

    The range sensor saturates: readings are clipped into the codec range
    (a collision reads as 0 m, a far-away lead as 655.35 m).
    """
    now = clock.now
    frames = []
    if schedule.speed_due(clock):
        frames.append(CanFrame(now, schedule.speed_frame_id, encode_speed(true_speed_kmh)))
    if schedule.distance_due(clock):
        reading = min(MAX_CENTI_VALUE, max(0.0, true_gap_m))
        frames.append(CanFrame(now, schedule.distance_frame_id, encode_distance(reading)))
    return frames


class CanBus:
    """Single-owner ordered queue; frames delivered in (timestamp, insertion) order."""

    def __init__(self):
        self._pending: list[CanFrame] = []
        self.history: list[list[CanFrame]] = []

    def send(self, frame: CanFrame) -> None:
        self._pending.append(frame)

    def send_all(self, frames: Iterable[CanFrame]) -> None:
        self._pending.extend(frames)

    def deliver(self, keep_history: bool = False) -> list[CanFrame]:
        # sorted() is stable, so equal timestamps keep insertion order
        tick_log = sorted(self._pending, key=lambda f: f.timestamp)
        self._pending = []
        if keep_history:
            self.history.append(tick_log)
        return tick_log


_CANDUMP_RE = re.compile(
    r"^\s*\((?P<ts>\d+(?:\.\d+)?)\)\s+(?P<iface>\S+)\s+(?P<id>[0-9A-Fa-f]{1,3})#(?P<data>[0-9A-Fa-f]*)\s*$"
)


def parse_candump_line(line: str, lineno: int | None = None) -> tuple[CanFrame, str]:
    """Parse one candump line into ``(frame, interface_name)``."""
    m = _CANDUMP_RE.match(line)
    if m is None:
        raise CandumpParseError(f"not a candump frame: {line.strip()!r}", lineno)
    hexdata = m["data"]
    if len(hexdata) % 2:
        raise CandumpParseError(f"odd number of hex digits in payload {hexdata!r}", lineno)
    if len(hexdata) > 16:
        raise CandumpParseError(f"payload longer than 8 bytes: {hexdata!r}", lineno)
    can_id = int(m["id"], 16)
    if can_id >= 0x800:
        raise CandumpParseError(f"identifier {m['id']} is not 11-bit", lineno)
    frame = CanFrame(float(m["ts"]), can_id, bytes.fromhex(hexdata))
    return frame, m["iface"]


def format_candump_line(frame: CanFrame, iface: str = "vcan0") -> str:
    return f"({frame.timestamp:.6f}) {iface} {frame.can_id:03X}#{frame.data.hex().upper()}"


def iter_candump(lines: Iterable[str]) -> Iterator[tuple[CanFrame, str]]:
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        yield parse_candump_line(line, lineno)


def read_candump(path: str | Path) -> list[CanFrame]:
    with open(path, encoding="ascii") as fh:
        return [frame for frame, _ in iter_candump(fh)]


def write_candump(frames: Iterable[CanFrame], path: str | Path, iface: str = "vcan0") -> None:
    with open(path, "w", encoding="ascii") as fh:
        for frame in frames:
            fh.write(format_candump_line(frame, iface) + "\n")
