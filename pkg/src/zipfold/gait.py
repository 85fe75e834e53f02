"""Crawl gait sequencing, open-loop command vocabulary, and attitude PD loop.

A crawl cycle is six phases: the back then front leg of one side step,
everything pushes, then the other side repeats.  A step is retract, tilt
forward, re-extend to ground contact.  A push sweeps every planted leg
backward through a shared "ground advance" variable so that all pinned feet
demand exactly the same body displacement at every instant (the sweep is
linear in sin(tilt), not in the angle itself).

Stance angles cycle through {+stride, 0, -stride}: a side's legs are planted
at +stride, pushed to 0 while the other side goes to -stride, and recovered
by the next step.  The mirrored groups keep pushes kinematically exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .assembly import LEG_BL, LEG_BR, LEG_FL, LEG_FR


class CommandKind(str, Enum):
    EXTEND = "extend"
    RETRACT = "retract"
    TILT = "tilt"
    STEP = "step"
    PUSH = "push"
    STAND_TO = "stand_to"
    CROUCH_TO = "crouch_to"
    REACH = "reach"
    GAIT = "gait"


@dataclass(frozen=True)
class Command:
    kind: CommandKind
    module: int | None = None
    target_m: float | None = None
    angle_deg: float | None = None
    cycles: int = 1

    def __post_init__(self) -> None:
        if self.module is not None and self.module not in (0, 1, 2, 3):
            raise ValueError(f"module index must be 0..3, got {self.module}")
        if self.cycles < 1:
            raise ValueError(f"cycles must be >= 1, got {self.cycles}")


class GaitPhase(str, Enum):
    LB_STEP = "LB_step"
    LF_STEP = "LF_step"
    PUSH_L = "push_L"
    RB_STEP = "RB_step"
    RF_STEP = "RF_step"
    PUSH_R = "push_R"


CYCLE_ORDER = (
    GaitPhase.LB_STEP,
    GaitPhase.LF_STEP,
    GaitPhase.PUSH_L,
    GaitPhase.RB_STEP,
    GaitPhase.RF_STEP,
    GaitPhase.PUSH_R,
)


@dataclass(frozen=True)
class GaitConfig:
    stride_angle_deg: float = 10.0
    step_clearance_m: float = 0.02
    servo_rate_dps: float = 30.0
    side_order: str = "left_first"     # which side steps first in a cycle
    leg_labels: dict = field(
        default_factory=lambda: {"LB": LEG_BL, "LF": LEG_FL, "RB": LEG_BR, "RF": LEG_FR}
    )

    def __post_init__(self) -> None:
        if not 0 < self.stride_angle_deg <= 45:
            raise ValueError(f"stride angle must lie in (0, 45] deg, got {self.stride_angle_deg}")
        if self.step_clearance_m <= 0:
            raise ValueError(f"step clearance must be positive, got {self.step_clearance_m}")
        if self.servo_rate_dps <= 0:
            raise ValueError(f"servo rate must be positive, got {self.servo_rate_dps}")
        if self.side_order not in ("left_first", "right_first"):
            raise ValueError(f"side_order must be left_first or right_first, got {self.side_order}")

    def phase_order(self) -> tuple[GaitPhase, ...]:
        if self.side_order == "left_first":
            return CYCLE_ORDER
        return CYCLE_ORDER[3:] + CYCLE_ORDER[:3]


@dataclass(frozen=True)
class Primitive:
    """One synchronized setpoint move executed by the sim sequencer.

    extension_targets / tilt_targets map module index to absolute target;
    ``retract_by`` entries resolve against the extension at execution time
    (step lifts need the live ground-contact length, not the length when
    the command was expanded).  ``to_contact`` modules extend until their
    foot touches a surface.  ``lift`` names a module whose contact is about
    to be released (the sequencer margin guard runs on the remaining feet).
    ``push`` marks a coordinated ground sweep driven through the shared
    advance variable.
    """

    extension_targets: tuple = ()
    retract_by: tuple = ()
    tilt_targets: tuple = ()
    to_contact: tuple = ()
    lift: int | None = None
    push: bool = False
    phase: GaitPhase | None = None


class CommandError(ValueError):
    """Command expansion rejected an out-of-range target."""


def _step_primitives(
    module: int, cfg: GaitConfig, target_tilt_deg: float, phase: GaitPhase | None = None
) -> list[Primitive]:
    return [
        Primitive(retract_by=((module, cfg.step_clearance_m),), lift=module, phase=phase),
        Primitive(tilt_targets=((module, target_tilt_deg),), phase=phase),
        Primitive(to_contact=(module,), phase=phase),
    ]


def _push_primitive(robot_state, cfg: GaitConfig, targets: dict[int, float], phase=None) -> Primitive:
    return Primitive(tilt_targets=tuple(sorted(targets.items())), push=True, phase=phase)


def expand_command(cmd: Command, robot_state, cfg: GaitConfig) -> list[Primitive]:
    """Expand a command into the ordered primitive list the sequencer runs.

    Expansion is a pure function of (command, robot state, gait config).
    Out-of-range targets are rejected here, before anything moves.
    """
    chassis = robot_state.assembly.chassis
    tilt_range = chassis.tilt_range_deg

    def check_extension(module: int, target: float) -> None:
        limit = robot_state.assembly.modules[module].max_extension
        if not 0.0 <= target <= limit + 1e-12:
            raise CommandError(
                f"extension target {target} m outside [0, {limit}] for module {module}"
            )

    def check_tilt(target: float) -> None:
        if abs(target) > tilt_range + 1e-12:
            raise CommandError(f"tilt target {target} deg outside +/-{tilt_range} deg")

    kind = cmd.kind
    if kind in (CommandKind.EXTEND, CommandKind.RETRACT):
        if cmd.module is None or cmd.target_m is None:
            raise CommandError(f"{kind.value} needs module and target_m")
        check_extension(cmd.module, cmd.target_m)
        current = robot_state.legs[cmd.module].module.extension_l
        if abs(current - cmd.target_m) < 1e-12:
            return []
        lift = None
        if cmd.target_m < current and robot_state.legs[cmd.module].in_contact:
            lift = cmd.module
        return [Primitive(extension_targets=((cmd.module, cmd.target_m),), lift=lift)]

    if kind == CommandKind.TILT:
        if cmd.module is None or cmd.angle_deg is None:
            raise CommandError("tilt needs module and angle_deg")
        check_tilt(cmd.angle_deg)
        if abs(robot_state.legs[cmd.module].tilt_deg - cmd.angle_deg) < 1e-12:
            return []
        return [Primitive(tilt_targets=((cmd.module, cmd.angle_deg),))]

    if kind == CommandKind.STEP:
        if cmd.module is None:
            raise CommandError("step needs a module index")
        stride = cmd.angle_deg if cmd.angle_deg is not None else cfg.stride_angle_deg
        check_tilt(stride)
        return _step_primitives(cmd.module, cfg, stride)

    if kind == CommandKind.PUSH:
        stride = cmd.angle_deg if cmd.angle_deg is not None else cfg.stride_angle_deg
        targets = {}
        for i, leg in enumerate(robot_state.legs):
            if leg.in_contact:
                target = max(leg.tilt_deg - stride, -tilt_range)
                targets[i] = target
        return [_push_primitive(robot_state, cfg, targets)]

    if kind in (CommandKind.STAND_TO, CommandKind.CROUCH_TO):
        if cmd.target_m is None:
            raise CommandError(f"{kind.value} needs target_m (body top height)")
        ext = cmd.target_m - chassis.compact_height
        for i in range(4):
            check_extension(i, ext)
        return [Primitive(extension_targets=tuple((i, ext) for i in range(4)))]

    if kind == CommandKind.REACH:
        if cmd.module is None:
            raise CommandError("reach needs a module index")
        angle = cmd.angle_deg if cmd.angle_deg is not None else 0.0
        target = (
            cmd.target_m
            if cmd.target_m is not None
            else robot_state.assembly.modules[cmd.module].max_extension
        )
        check_tilt(angle)
        check_extension(cmd.module, target)
        lift = cmd.module if robot_state.legs[cmd.module].in_contact else None
        return [
            Primitive(tilt_targets=((cmd.module, angle),), lift=lift),
            Primitive(extension_targets=((cmd.module, target),)),
        ]

    if kind == CommandKind.GAIT:
        return expand_gait(robot_state, cfg, cmd.cycles)

    raise CommandError(f"unknown command kind {cmd.kind}")


def expand_gait(robot_state, cfg: GaitConfig, cycles: int) -> list[Primitive]:
    """Expand N crawl cycles into phased primitives.

    Step targets are absolute (+stride); each push drives the freshly
    stepped side from +stride to 0 and the other side from 0 to -stride,
    whose equal sine drops make the pinned-feet sweep exact.
    """
    stride = cfg.stride_angle_deg
    labels = cfg.leg_labels
    primitives: list[Primitive] = []
    order = cfg.phase_order()

    phase_legs = {
        GaitPhase.LB_STEP: labels["LB"],
        GaitPhase.LF_STEP: labels["LF"],
        GaitPhase.RB_STEP: labels["RB"],
        GaitPhase.RF_STEP: labels["RF"],
    }
    side_of = {
        GaitPhase.PUSH_L: (labels["LB"], labels["LF"]),
        GaitPhase.PUSH_R: (labels["RB"], labels["RF"]),
    }

    for _ in range(cycles):
        for phase in order:
            if phase in phase_legs:
                primitives.extend(
                    _step_primitives(phase_legs[phase], cfg, stride, phase=phase)
                )
            else:
                stepped = side_of[phase]
                targets = {}
                for i in range(4):
                    targets[i] = 0.0 if i in stepped else -stride
                primitives.append(_push_primitive(robot_state, cfg, targets, phase=phase))
    return primitives


def stride_displacement(tilt_from_deg: float, tilt_to_deg: float, leg_l: float) -> float:
    """Body advance while a pinned foot's tilt sweeps between two angles (m)."""
    return leg_l * (math.sin(math.radians(tilt_from_deg)) - math.sin(math.radians(tilt_to_deg)))


@dataclass(frozen=True)
class PdGains:
    # shipped defaults, tuned against the disturbance-decay check
    kp_roll: float = 0.2
    kd_roll: float = 0.001
    kp_pitch: float = 0.2
    kd_pitch: float = 0.001
    imu_noise_sigma: float = 0.0       # rad
    max_correction_m: float = 0.005

    def __post_init__(self) -> None:
        for g in (self.kp_roll, self.kd_roll, self.kp_pitch, self.kd_pitch):
            if g < 0:
                raise ValueError("PD gains must be nonnegative")
        if self.imu_noise_sigma < 0:
            raise ValueError("imu_noise_sigma must be nonnegative")

    @property
    def enabled(self) -> bool:
        return any(g > 0 for g in (self.kp_roll, self.kd_roll, self.kp_pitch, self.kd_pitch))


# Per-leg (front/back, left/right) mixing signs, ordered FL, FR, BL, BR.
# With the BodyPose convention, positive pitch is nose down (front legs must
# extend) and positive roll is left side up (left legs must retract).
PD_MIXING = (
    (1.0, 1.0),
    (1.0, -1.0),
    (-1.0, 1.0),
    (-1.0, -1.0),
)


def pd_stabilize(
    gains: PdGains,
    roll: float,
    pitch: float,
    roll_rate: float,
    pitch_rate: float,
    dt: float,
) -> np.ndarray:
    """Differential leg-length corrections (m) from measured roll/pitch."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    pitch_term = gains.kp_pitch * pitch + gains.kd_pitch * pitch_rate
    roll_term = gains.kp_roll * roll + gains.kd_roll * roll_rate
    corrections = np.array(
        [sx * pitch_term - sy * roll_term for sx, sy in PD_MIXING]
    )
    return np.clip(corrections, -gains.max_correction_m, gains.max_correction_m)


def static_stability_margin(foot_xy, com_xy) -> float:
    """Signed distance from the CoM projection to the support polygon edge (m).

    Positive inside.  Fewer than three contacts cannot form a polygon and
    return -inf; collinear contacts give a non-positive margin.
    """
    pts = np.atleast_2d(np.asarray(foot_xy, dtype=float))
    com = np.asarray(com_xy, dtype=float)
    if pts.shape[0] < 3:
        return float("-inf")

    hull = _convex_hull(pts)
    if len(hull) < 3:
        # collinear support: distance to the segment, never positive
        return -_distance_to_segment(com, hull[0], hull[-1] if len(hull) > 1 else hull[0])

    signed = []
    inside = True
    for a, b in zip(hull, hull[1:] + [hull[0]]):
        edge = b - a
        # hull is counter-clockwise, so inside points sit left of each edge
        cross = edge[0] * (com[1] - a[1]) - edge[1] * (com[0] - a[0])
        norm = math.hypot(edge[0], edge[1])
        if norm == 0.0:
            continue
        signed.append(cross / norm)
        if cross < 0:
            inside = False
    if not signed:
        return float("-inf")
    if inside:
        # margin may be set by an edge or, for obtuse hulls, a vertex; with a
        # convex hull the edge distance is exact for interior points
        return min(signed)
    return -min(_distance_to_segment(com, a, b) for a, b in zip(hull, hull[1:] + [hull[0]]))


def _convex_hull(pts: np.ndarray) -> list[np.ndarray]:
    """Andrew monotone chain, counter-clockwise, for a handful of points."""
    unique = sorted({(float(p[0]), float(p[1])) for p in pts})
    if len(unique) == 1:
        return [np.array(unique[0])]
    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    lower: list = []
    for p in unique:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(unique):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    return [np.array(p) for p in hull]


def _distance_to_segment(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.hypot(*(p - a)))
    t = max(0.0, min(1.0, float((p - a) @ ab) / denom))
    closest = a + t * ab
    return float(np.hypot(*(p - closest)))
