"""Trajectory and report serialization.

The trajectory log is a delimited text table with a fixed, versioned header;
floats are written with repr so identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from .sim import ScenarioSummary, SimSnapshot

LOG_SCHEMA = "trajectory.v1"

COLUMNS = (
    ["t_s", "x_m", "y_m", "z_m", "roll_rad", "pitch_rad", "yaw_rad"]
    + [f"ext{i}_m" for i in range(4)]
    + [f"tilt{i}_deg" for i in range(4)]
    + [f"contact{i}" for i in range(4)]
    + [f"load{i}_n" for i in range(4)]
    + ["margin_m", "power_w", "energy_j", "ceiling_breach", "failures"]
)


def _fmt(value: float) -> str:
    return repr(float(value))


def snapshot_row(snap: SimSnapshot) -> list[str]:
    row = [
        _fmt(snap.t),
        _fmt(snap.pose.position[0]),
        _fmt(snap.pose.position[1]),
        _fmt(snap.pose.position[2]),
        _fmt(snap.pose.roll),
        _fmt(snap.pose.pitch),
        _fmt(snap.pose.yaw),
    ]
    row += [_fmt(leg.module.extension_l) for leg in snap.legs]
    row += [_fmt(leg.tilt_deg) for leg in snap.legs]
    row += ["1" if c else "0" for c in snap.contacts]
    row += [_fmt(v) for v in snap.leg_loads]
    row += [
        _fmt(snap.margin),
        _fmt(snap.total_power),
        _fmt(snap.cumulative_energy),
        "1" if snap.ceiling_breach else "0",
        ";".join(snap.failures),
    ]
    return row


def trajectory_text(snapshots) -> str:
    lines = [f"# {LOG_SCHEMA}", ",".join(COLUMNS)]
    for snap in snapshots:
        lines.append(",".join(snapshot_row(snap)))
    return "\n".join(lines) + "\n"


def write_trajectory(path, snapshots) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(trajectory_text(snapshots))
    return path


def summary_document(name: str, summary: ScenarioSummary, seed: int, dt: float) -> dict:
    doc = {"schema": "summary.v1", "scenario": name, "seed": seed, "dt_s": dt}
    doc.update(summary.to_dict())
    return doc


def write_summary(path, doc: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def read_trajectory(path) -> tuple[list[str], list[dict]]:
    """Parse a trajectory log back into column names and row dicts."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError("missing trajectory schema line")
    schema = lines[0][1:].strip()
    if schema != LOG_SCHEMA:
        raise ValueError(f"unsupported trajectory schema {schema!r}")
    header = lines[1].split(",")
    rows = []
    for line in lines[2:]:
        parts = line.split(",")
        row: dict = {}
        for key, value in zip(header, parts):
            if key == "failures":
                row[key] = value.split(";") if value else []
            elif key.startswith("contact") or key == "ceiling_breach":
                row[key] = value == "1"
            else:
                row[key] = float(value)
        rows.append(row)
    return header, rows
