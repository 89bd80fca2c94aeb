"""Command-line interface: ``accsim run | sweep | presets``.

Exit codes for ``run``: 0 no crash, 2 crash, 1 error.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from accsim.config import ConfigError, load_config
from accsim.scenario import PRESETS, ScenarioConfig, attacked_config, preset, run
from accsim.telemetry import summary_dict, write_summary, write_trace

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CRASH = 2

SWEEP_HEADER = ["ego_speed_kmh", "spoof_speed_kmh", "ids", "seed", "crashed", "min_gap_m"]

log = logging.getLogger("accsim")


def _float_list(text: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("list must not be empty")
    return values


def _int_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("list must not be empty")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="accsim", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario and write trace.csv + summary.json")
    src = p_run.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=sorted(PRESETS))
    src.add_argument("--config", type=Path, help="JSON scenario file")
    p_run.add_argument("--seed", type=int, help="override master_seed")
    p_run.add_argument("--out", type=Path, help="output directory (default: $ACCSIM_OUT_DIR or .)")
    p_run.add_argument("--stop-on-crash", action="store_true")
    p_run.add_argument("--duration", type=float, help="override duration in seconds")

    p_sweep = sub.add_parser("sweep", help="crash matrix over ego speed x spoofed speed x seed")
    p_sweep.add_argument("--ego-speeds", type=_float_list, required=True, metavar="LIST")
    p_sweep.add_argument("--spoof-speeds", type=_float_list, required=True, metavar="LIST")
    p_sweep.add_argument("--ids", choices=("on", "off"), default="off")
    p_sweep.add_argument("--seeds", type=_int_list, default=[0], metavar="LIST")
    p_sweep.add_argument("--duration", type=float)
    p_sweep.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p_sweep.add_argument("--out", type=Path, help="write sweep.csv into this directory as well")

    sub.add_parser("presets", help="list preset scenarios")
    return parser


def _out_dir(arg: Path | None) -> Path:
    if arg is not None:
        return arg
    return Path(os.environ.get("ACCSIM_OUT_DIR", "."))


def cmd_run(args) -> int:
    if args.preset:
        cfg = preset(args.preset)
    else:
        cfg = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.stop_on_crash:
        overrides["stop_on_crash"] = True
    if args.duration is not None:
        overrides["duration"] = args.duration
    if overrides:
        cfg = replace(cfg, **overrides)

    trace, summary = run(cfg)
    out = _out_dir(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_trace(trace, out / "trace.csv")
    write_summary(summary, out / "summary.json")
    s = summary_dict(summary)
    print(" ".join(f"{k}={v}" for k, v in s.items()))
    return EXIT_CRASH if summary.crashed else EXIT_OK


def _sweep_one(job: tuple[float, float, bool, int, float | None]) -> tuple:
    ego, spoof, with_ids, seed, duration = job
    cfg = attacked_config(ego, spoof, with_ids=with_ids)
    cfg = replace(cfg, master_seed=seed, **({"duration": duration} if duration is not None else {}))
    _, summary = run(cfg)
    return (ego, spoof, "on" if with_ids else "off", seed, summary.crashed, summary.min_gap)


def sweep_rows(ego_speeds, spoof_speeds, with_ids: bool, seeds, duration=None, jobs: int = 1) -> list[tuple]:
    work = [(e, s, with_ids, seed, duration) for seed in seeds for e in ego_speeds for s in spoof_speeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_one, work))
    else:
        rows = [_sweep_one(w) for w in work]
    # completion order must not leak into the report
    return sorted(rows, key=lambda r: (r[3], r[0], r[1]))


def format_sweep(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for ego, spoof, ids, seed, crashed, min_gap in rows:
        w.writerow([f"{ego:g}", f"{spoof:g}", ids, seed, int(crashed), f"{min_gap:.6f}"])
    return buf.getvalue()


def cmd_sweep(args) -> int:
    rows = sweep_rows(args.ego_speeds, args.spoof_speeds, args.ids == "on", args.seeds, args.duration, args.jobs)
    text = format_sweep(rows)
    sys.stdout.write(text)
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "sweep.csv").write_text(text, encoding="utf-8")
    return EXIT_OK


def describe(name: str, cfg: ScenarioConfig) -> str:
    lp = cfg.lead_profile
    if lp.kind == "constant":
        lead = f"constant {lp.speed:g} km/h"
    elif lp.kind == "trapezoid":
        lead = f"trapezoid 0->{lp.v_peak:g}->0 km/h ({lp.ramp_up:g}/{lp.hold:g}/{lp.ramp_down:g} s)"
    else:
        lead = f"replay {lp.path}"
    a = cfg.attack
    attack = f"spoof {a.spoofed_speed:g} km/h p={a.injection_probability:g}" if a.enabled else "none"
    ids = (
        f"detection {cfg.ids.detection_rate:g} response {cfg.ids.response_time:g}s"
        if cfg.ids is not None
        else "off"
    )
    return f"{name:<14} ego {cfg.ego_target_speed:g} km/h | lead {lead} | attack {attack} | ids {ids} | {cfg.duration:g} s"


def cmd_presets(args) -> int:
    for name, cfg in PRESETS.items():
        print(describe(name, cfg))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handler = {"run": cmd_run, "sweep": cmd_sweep, "presets": cmd_presets}[args.command]
    try:
        return handler(args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"accsim: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
