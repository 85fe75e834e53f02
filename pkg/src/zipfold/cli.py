"""Command-line entry points.

Exit codes: 0 success, 1 usage/validation failure, 2 simulation failure
(buckling or instability) when the scenario stops on failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .calibration import SampleSet, calibrate_model, default_calibration, fit_power_law
from .gait import expand_command
from .recording import summary_document, write_summary, write_trajectory
from .scenario import ScenarioError, load_scenario
from .sim import PenetrationError, run_scenario

log = logging.getLogger("zipfold")

_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging() -> None:
    level = os.environ.get("ZIPFOLD_LOG_LEVEL", "warn").lower()
    logging.basicConfig(level=_LEVELS.get(level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def _error(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def _cmd_sim(args) -> int:
    try:
        spec = load_scenario(args.scenario)
    except ScenarioError as exc:
        return _error(str(exc))
    world = spec.build_world(dt=args.dt, seed=args.seed)
    snapshots, summary = run_scenario(world, list(spec.script))

    out = Path(args.out)
    seed = args.seed if args.seed is not None else spec.sim.seed
    dt = args.dt if args.dt is not None else spec.sim.dt
    traj_path = write_trajectory(out / f"{spec.name}_trajectory.csv", snapshots)
    summary_path = write_summary(
        out / f"{spec.name}_summary.json", summary_document(spec.name, summary, seed, dt)
    )
    print(f"wrote {traj_path}")
    print(f"wrote {summary_path}")
    for failure in summary.failures:
        print(f"sim failure: {failure}", file=sys.stderr)
    if summary.failures and spec.sim.stop_on_failure:
        return 2
    return 0


def _cmd_fit(args) -> int:
    points = []
    unit = "force"
    try:
        lines = Path(args.data).read_text().splitlines()
    except OSError as exc:
        return _error(f"cannot read {args.data}: {exc}")
    for i, line in enumerate(lines):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if i == 0 and not _is_number(parts[0]):
            continue   # header row
        if len(parts) < 2:
            return _error(f"{args.data}:{i + 1}: expected length_m,value[,unit]")
        try:
            points.append((float(parts[0]), float(parts[1])))
        except ValueError:
            return _error(f"{args.data}:{i + 1}: non-numeric sample {line!r}")
        if len(parts) >= 3 and parts[2]:
            unit = parts[2]
    try:
        fit = fit_power_law(SampleSet(points=tuple(points), unit=unit, source=str(args.data)))
    except ValueError as exc:
        return _error(str(exc))
    print(f"exponent    {fit.exponent:+.6f}")
    print(f"coefficient {fit.coefficient:.6g}")
    print(f"r_squared   {fit.r_squared:.9f}")
    return 0


def _is_number(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def _cmd_calibrate(args) -> int:
    anchors = None
    if args.anchors:
        try:
            doc = json.loads(Path(args.anchors).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            return _error(f"cannot load anchors: {exc}")
        if not isinstance(doc, list):
            return _error("anchors file must be a JSON list of [quantity, value, length]")
        anchors = [tuple(entry) for entry in doc]
    try:
        result = calibrate_model(anchors) if anchors else default_calibration()
    except ValueError as exc:
        return _error(str(exc))
    print(result.report())
    return 0


def _cmd_gait(args) -> int:
    try:
        spec = load_scenario(args.scenario)
    except ScenarioError as exc:
        return _error(str(exc))
    world = spec.build_world()
    count = 0
    for i, cmd in enumerate(spec.script):
        try:
            primitives = expand_command(cmd, world, spec.gait)
        except ValueError as exc:
            return _error(f"script[{i}]: {exc}")
        print(f"script[{i}] {cmd.kind.value}:")
        for prim in primitives:
            parts = []
            if prim.phase is not None:
                parts.append(f"phase={prim.phase.value}")
            if prim.retract_by:
                parts.append(f"retract_by={dict(prim.retract_by)}")
            if prim.extension_targets:
                parts.append(f"extend_to={dict(prim.extension_targets)}")
            if prim.tilt_targets:
                parts.append(f"tilt_to={dict(prim.tilt_targets)}")
            if prim.to_contact:
                parts.append(f"to_contact={list(prim.to_contact)}")
            if prim.push:
                parts.append("push")
            if prim.lift is not None:
                parts.append(f"lift={prim.lift}")
            print("  " + " ".join(parts))
            count += 1
    print(f"{count} primitives")
    return 0


def _cmd_serve(args) -> int:
    try:
        spec = load_scenario(args.scenario)
    except ScenarioError as exc:
        return _error(str(exc))
    from .service import serve

    try:
        serve(spec, port=args.port, speed=args.speed, ui_dir=args.ui_dir)
    except OSError as exc:
        return _error(f"cannot bind port {args.port}: {exc}")
    except SystemExit as exc:
        # uvicorn exits nonzero on startup failures such as a busy port
        if exc.code not in (0, None):
            return _error(f"service startup failed (port {args.port} busy?)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zipfold", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("sim", help="run a scenario and write trajectory + summary")
    p_sim.add_argument("--scenario", required=True)
    p_sim.add_argument("--out", required=True)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--dt", type=float, default=None)
    p_sim.set_defaults(func=_cmd_sim)

    p_fit = sub.add_parser("fit", help="fit a power law to length,value samples")
    p_fit.add_argument("--data", required=True)
    p_fit.set_defaults(func=_cmd_fit)

    p_cal = sub.add_parser("calibrate", help="print the model calibration report")
    p_cal.add_argument("--anchors", default=None)
    p_cal.set_defaults(func=_cmd_calibrate)

    p_gait = sub.add_parser("gait", help="print the expanded primitive list for a scenario")
    p_gait.add_argument("--scenario", required=True)
    p_gait.add_argument("--dry-run", action="store_true", default=True)
    p_gait.set_defaults(func=_cmd_gait)

    p_serve = sub.add_parser("serve", help="serve the live teleoperation endpoint")
    p_serve.add_argument("--scenario", required=True)
    p_serve.add_argument("--port", type=int, default=8700)
    p_serve.add_argument("--speed", type=float, default=1.0)
    p_serve.add_argument("--ui-dir", default=None)
    p_serve.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except PenetrationError as exc:
        print(f"sim failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
