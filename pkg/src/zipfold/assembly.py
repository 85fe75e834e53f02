"""Kinematics and statics of the four-module walker.

Frames: the body frame has +x forward, +y left, +z up, with its origin at
the centre of the chassis bottom face.  Modules hang from the four corners
of that face; each leg is the actuator block (``leg_offset`` long) plus the
deployed beam, swung about the body y axis by its servo tilt.  Leg order is
(front-left, front-right, back-left, back-right).

Load distribution is quasi-static and vertical-only: with three contacts the
solution is unique, with four the minimum-norm least-squares solution is
used.  One or two contacts cannot balance moments; they get the lever-rule
split so that total weight is always carried.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .actuator import ActuatorState, ModuleSpec

GRAVITY = 9.81

LEG_FL, LEG_FR, LEG_BL, LEG_BR = 0, 1, 2, 3
LEG_NAMES = ("FL", "FR", "BL", "BR")


def _default_mounts() -> tuple[tuple[float, float, float], ...]:
    return (
        (0.05, 0.045, 0.0),
        (0.05, -0.045, 0.0),
        (-0.05, 0.045, 0.0),
        (-0.05, -0.045, 0.0),
    )


@dataclass(frozen=True)
class ChassisSpec:
    """Chassis geometry and mass properties.

    ``compact_height`` anchors the fully retracted standing height; the
    chassis box height is derived from it so the anchor holds exactly.
    ``com_offset`` shifts the chassis mass centre in the body frame (the
    controller board and strip pile sit slightly ahead of centre, which is
    also what keeps the first gait step statically stable).
    """

    mount_points: tuple[tuple[float, float, float], ...] = field(default_factory=_default_mounts)
    chassis_mass: float = 0.143
    compact_height: float = 0.11
    body_size: tuple[float, float, float] = (0.09, 0.10, 0.11)   # w x d x h
    leg_offset: float = 0.025            # block + foot length below the mount
    com_offset: tuple[float, float, float] = (0.004, 0.0, 0.0)
    tilt_range_deg: float = 45.0

    def __post_init__(self) -> None:
        if len(self.mount_points) != 4:
            raise ValueError(f"exactly 4 mount points required, got {len(self.mount_points)}")
        if self.chassis_mass < 0:
            raise ValueError(f"chassis_mass must be nonnegative, got {self.chassis_mass}")
        if not 0 <= self.leg_offset < self.compact_height:
            raise ValueError("leg_offset must lie in [0, compact_height)")
        pts = np.asarray(self.mount_points, dtype=float)
        spans = pts.max(axis=0) - pts.min(axis=0)
        if spans[0] <= 0 or spans[1] <= 0:
            raise ValueError("mount points must form a non-degenerate rectangle")

    @property
    def body_height(self) -> float:
        """Chassis box height above the mount plane (m)."""
        return self.compact_height - self.leg_offset


@dataclass(frozen=True)
class LegState:
    module: ActuatorState = field(default_factory=ActuatorState)
    tilt_deg: float = 0.0
    in_contact: bool = False


@dataclass(frozen=True)
class BodyPose:
    """World pose of the body frame."""

    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    roll: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0

    def __post_init__(self) -> None:
        for v in (*self.position, self.roll, self.pitch, self.yaw):
            if not math.isfinite(v):
                raise ValueError("pose components must be finite")

    def rotation(self) -> np.ndarray:
        cached = getattr(self, "_rot", None)
        if cached is not None:
            return cached
        cr, sr = math.cos(self.roll), math.sin(self.roll)
        cp, sp = math.cos(self.pitch), math.sin(self.pitch)
        cy, sy = math.cos(self.yaw), math.sin(self.yaw)
        rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
        ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
        rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
        rot = rz @ ry @ rx
        object.__setattr__(self, "_rot", rot)
        return rot

    def transform(self, point_body) -> np.ndarray:
        return np.asarray(self.position) + self.rotation() @ np.asarray(point_body)


def pose_from_rotation(rot: np.ndarray, position: np.ndarray) -> BodyPose:
    """Recover roll/pitch/yaw (z-y-x convention) from a rotation matrix."""
    pitch = -math.asin(max(-1.0, min(1.0, rot[2, 0])))
    roll = math.atan2(rot[2, 1], rot[2, 2])
    yaw = math.atan2(rot[1, 0], rot[0, 0])
    return BodyPose(position=tuple(float(v) for v in position), roll=roll, pitch=pitch, yaw=yaw)


@dataclass(frozen=True)
class RobotAssembly:
    chassis: ChassisSpec = field(default_factory=ChassisSpec)
    modules: tuple[ModuleSpec, ModuleSpec, ModuleSpec, ModuleSpec] = field(
        default_factory=lambda: tuple(ModuleSpec() for _ in range(4))
    )

    def __post_init__(self) -> None:
        if len(self.modules) != 4:
            raise ValueError(f"exactly 4 modules required, got {len(self.modules)}")

    def total_mass(self) -> float:
        mass = self.chassis.chassis_mass
        for m in self.modules:
            mass += m.block_mass + m.strip_mass_per_m * m.max_extension
        return mass


def _leg_vectors_body(chassis: ChassisSpec, legs) -> np.ndarray:
    """4x3 mount-to-foot vectors; validates tilt range for all legs."""
    tilts = np.array([leg.tilt_deg for leg in legs])
    if np.any(np.abs(tilts) > chassis.tilt_range_deg + 1e-9):
        raise ValueError(
            f"tilt outside +/-{chassis.tilt_range_deg} deg servo range: {tilts.tolist()}"
        )
    lengths = np.array(
        [chassis.leg_offset + leg.module.extension_l for leg in legs]
    )
    theta = np.radians(tilts)
    vecs = np.zeros((len(legs), 3))
    vecs[:, 0] = lengths * np.sin(theta)
    vecs[:, 2] = -lengths * np.cos(theta)
    return vecs


def foot_positions_body(chassis: ChassisSpec, legs) -> np.ndarray:
    """4x3 array of foot positions in the body frame."""
    return np.asarray(chassis.mount_points, dtype=float) + _leg_vectors_body(chassis, legs)


def center_of_mass_body(assembly: RobotAssembly, legs) -> tuple[np.ndarray, float]:
    """Centre of mass in the body frame and the total mass.

    The chassis mass sits at the box centre plus the configured offset;
    blocks sit at the mounts; the deployed portion of each strip pair is
    lumped at the beam midpoint and the stored remainder stays at the mount.
    """
    chassis = assembly.chassis
    chassis_center = np.array(
        [chassis.com_offset[0], chassis.com_offset[1], chassis.body_height / 2 + chassis.com_offset[2]]
    )
    moment = chassis.chassis_mass * chassis_center
    total = chassis.chassis_mass

    mounts = np.asarray(chassis.mount_points, dtype=float)
    midpoints = mounts + 0.5 * _leg_vectors_body(chassis, legs)
    for i, leg in enumerate(legs):
        spec = assembly.modules[i]
        deployed = spec.strip_mass_per_m * leg.module.extension_l
        stored = spec.strip_mass_per_m * (spec.max_extension - leg.module.extension_l)
        moment = moment + (spec.block_mass + stored) * mounts[i] + deployed * midpoints[i]
        total += spec.block_mass + stored + deployed

    return moment / total, total


def forward_kinematics(chassis: ChassisSpec, legs, pose: BodyPose) -> np.ndarray:
    """World foot positions (4x3) for the given pose."""
    feet_body = foot_positions_body(chassis, legs)
    rot = pose.rotation()
    return np.asarray(pose.position) + feet_body @ rot.T


def standing_height(chassis: ChassisSpec, pose: BodyPose) -> float:
    """Height of the body top face centre above the ground plane."""
    top_center = np.array([0.0, 0.0, chassis.body_height])
    return float(pose.transform(top_center)[2])


def body_corners_world(chassis: ChassisSpec, pose: BodyPose) -> np.ndarray:
    """Eight corners of the chassis box in world coordinates."""
    w, d, h = chassis.body_size[0], chassis.body_size[1], chassis.body_height
    corners = []
    for sx in (-0.5, 0.5):
        for sy in (-0.5, 0.5):
            for z in (0.0, h):
                corners.append([sx * d, sy * w, z])
    rot = pose.rotation()
    return np.asarray(pose.position) + np.asarray(corners) @ rot.T


def body_bottom_points_world(chassis: ChassisSpec, pose: BodyPose, n: int = 5) -> np.ndarray:
    """Grid of sample points on the chassis bottom face, for obstacle clearance."""
    w, d = chassis.body_size[0], chassis.body_size[1]
    xs = np.linspace(-d / 2, d / 2, n)
    ys = np.linspace(-w / 2, w / 2, n)
    grid = np.array([[x, y, 0.0] for x in xs for y in ys])
    rot = pose.rotation()
    return np.asarray(pose.position) + grid @ rot.T


@dataclass(frozen=True)
class ArmConfig:
    """Pose of one module re-aimed upward as a reaching arm."""

    tilt_from_vertical_deg: float = 35.0


def max_reach(
    chassis: ChassisSpec,
    module: ModuleSpec | None = None,
    arm: ArmConfig = ArmConfig(),
    stand_extension: float = 0.21,
    arm_extension: float | None = None,
) -> float:
    """Highest point reachable standing expanded with one module as an arm (m)."""
    module = module if module is not None else ModuleSpec()
    if arm_extension is None:
        arm_extension = module.max_extension
    expanded = chassis.compact_height + stand_extension
    return expanded + arm_extension * math.cos(math.radians(arm.tilt_from_vertical_deg))


class AirborneError(RuntimeError):
    """No legs are in contact; quasi-static loads are undefined."""


def leg_load_distribution(
    assembly: RobotAssembly, legs, pose: BodyPose, feet_w=None, com_w=None, mass=None
) -> np.ndarray:
    """Vertical contact force per leg (N), zero on legs not in contact.

    ``feet_w``, ``com_w`` and ``mass`` may be supplied when the caller has
    already computed them for this configuration.
    """
    contacts = [i for i, leg in enumerate(legs) if leg.in_contact]
    if not contacts:
        raise AirborneError("no legs in contact")

    if com_w is None or mass is None:
        com_body, mass = center_of_mass_body(assembly, legs)
        com_w = pose.transform(com_body)
    if feet_w is None:
        feet_w = forward_kinematics(assembly.chassis, legs, pose)
    weight = mass * GRAVITY

    loads = np.zeros(4)
    if len(contacts) == 1:
        loads[contacts[0]] = weight
        return loads
    if len(contacts) == 2:
        p1, p2 = feet_w[contacts[0], :2], feet_w[contacts[1], :2]
        seg = p2 - p1
        denom = float(seg @ seg)
        t = 0.0 if denom == 0.0 else float((com_w[:2] - p1) @ seg) / denom
        loads[contacts[0]] = weight * (1.0 - t)
        loads[contacts[1]] = weight * t
        return loads

    rows = np.zeros((3, len(contacts)))
    rows[0] = 1.0
    for j, i in enumerate(contacts):
        rows[1, j] = feet_w[i, 0] - com_w[0]
        rows[2, j] = feet_w[i, 1] - com_w[1]
    rhs = np.array([weight, 0.0, 0.0])
    solution = np.linalg.pinv(rows) @ rhs
    for j, i in enumerate(contacts):
        loads[i] = solution[j]
    return loads
