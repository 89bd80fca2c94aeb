"""Trace CSV and summary JSON writers (and a reader for the CSV)."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import fields
from pathlib import Path

from accsim.scenario import RunSummary, TraceRecord

TRACE_HEADER = [
    "tick",
    "time_s",
    "ego_speed_true_kmh",
    "ego_speed_perceived_kmh",
    "lead_speed_kmh",
    "gap_m",
    "ssd_m",
    "margin_m",
    "u",
    "command_mode",
    "intrusion_active",
    "frames_injected",
    "collision",
]
# CSV column -> TraceRecord attribute, same order as the header
_COLUMNS = dict(zip(TRACE_HEADER, (f.name for f in fields(TraceRecord))))


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        # avoid "-0.000000" so equal traces print equal text
        text = f"{value:.6f}"
        return "0.000000" if text == "-0.000000" else text
    return str(value)


def trace_rows(trace: list[TraceRecord]) -> list[list[str]]:
    return [[_fmt(getattr(r, attr)) for attr in _COLUMNS.values()] for r in trace]


def write_trace(trace: list[TraceRecord], path: str | Path) -> None:
    path = Path(path)
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TRACE_HEADER)
            writer.writerows(trace_rows(trace))
    except OSError as exc:
        raise OSError(f"cannot write trace to {path}: {exc}") from exc


def read_trace(path: str | Path) -> list[TraceRecord]:
    """Parse a trace CSV written by :func:`write_trace`."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != TRACE_HEADER:
            raise ValueError(f"{path}: unexpected trace header {header}")
        out = []
        for row in reader:
            v = dict(zip(TRACE_HEADER, row))
            out.append(
                TraceRecord(
                    tick=int(v["tick"]),
                    now=float(v["time_s"]),
                    ego_speed_true=float(v["ego_speed_true_kmh"]),
                    ego_speed_perceived=float(v["ego_speed_perceived_kmh"]),
                    lead_speed=float(v["lead_speed_kmh"]),
                    gap=float(v["gap_m"]),
                    ssd=float(v["ssd_m"]),
                    margin=float(v["margin_m"]),
                    u=float(v["u"]),
                    command_mode=v["command_mode"],
                    intrusion_active=v["intrusion_active"] == "1",
                    frames_injected=int(v["frames_injected"]),
                    collision=v["collision"] == "1",
                )
            )
    return out


def _round(x: float | None) -> float | None:
    if x is None or not math.isfinite(x):
        return None
    return round(x, 6) + 0.0


def summary_dict(summary: RunSummary) -> dict:
    return {
        "crashed": summary.crashed,
        "crash_count": summary.crash_count,
        "first_crash_time_s": _round(summary.first_crash_time),
        "min_gap_m": _round(summary.min_gap),
        "mean_ego_speed_kmh": _round(summary.mean_ego_speed),
        "ticks": summary.ticks,
    }


def write_summary(summary: RunSummary, path: str | Path) -> None:
    path = Path(path)
    try:
        path.write_text(json.dumps(summary_dict(summary), indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write summary to {path}: {exc}") from exc
