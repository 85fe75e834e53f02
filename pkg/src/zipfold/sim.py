"""Fixed-timestep quasi-static world simulation.

The robot moves at millimetres per second, so inertia is ignored: every
snapshot satisfies static force balance.  Stance feet are sticky point
contacts (pinned world positions); given the commanded leg geometry, the
body pose is the rigid transform that best fits the pinned feet, solved in
closed form (Kabsch).  Exactly consistent manoeuvres (uniform extension,
mirrored push sweeps) therefore track with zero slip, and small kinematic
strain is absorbed as sub-tolerance residuals or, past a threshold, by
releasing the worst-fitting foot for a step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .actuator import ActuatorState, check_buckling, power_draw, step_extension
from .assembly import (
    AirborneError,
    BodyPose,
    LegState,
    RobotAssembly,
    body_bottom_points_world,
    body_corners_world,
    center_of_mass_body,
    foot_positions_body,
    forward_kinematics,
    leg_load_distribution,
    pose_from_rotation,
)
from .gait import (
    Command,
    CommandError,
    GaitConfig,
    PdGains,
    Primitive,
    expand_command,
    pd_stabilize,
    static_stability_margin,
)

CONTACT_TOL = 1e-4          # m, surface contact detection distance
CONTACT_SNAP_BAND = 1.5e-3  # m, descending feet inside this band snap onto the surface
RELEASE_TOL = 4e-4          # m, pinned-foot residual that forces a release
SNAP_EPS = 1e-10            # m, setpoint completion snap


@dataclass(frozen=True)
class Box:
    """Axis-aligned obstacle resting in the world."""

    min_corner: tuple[float, float, float]
    size: tuple[float, float, float]

    def __post_init__(self) -> None:
        if any(s <= 0 for s in self.size):
            raise ValueError(f"box needs positive volume, got size {self.size}")

    @property
    def top(self) -> float:
        return self.min_corner[2] + self.size[2]

    def contains_xy(self, x: float, y: float) -> bool:
        return (
            self.min_corner[0] <= x <= self.min_corner[0] + self.size[0]
            and self.min_corner[1] <= y <= self.min_corner[1] + self.size[1]
        )


@dataclass(frozen=True)
class Environment:
    """Flat ground at z = 0, optional boxes, optional ceiling plane."""

    boxes: tuple[Box, ...] = ()
    ceiling: float | None = None
    gravity: float = 9.81

    def __post_init__(self) -> None:
        if self.ceiling is not None and self.ceiling <= 0:
            raise ValueError(f"ceiling height must be positive, got {self.ceiling}")

    def surface_under(self, x: float, y: float) -> float:
        z = 0.0
        for box in self.boxes:
            if box.contains_xy(x, y):
                z = max(z, box.top)
        return z


class PenetrationError(RuntimeError):
    """A foot or body point entered a solid volume."""


def resolve_contacts(env: Environment, feet, prev_contacts) -> tuple[list[bool], list[float]]:
    """Contact flags and supported heights for four feet.

    A foot is in contact when it sits within tolerance of the highest
    surface under its (x, y); previously contacting feet stay in contact
    at the same threshold (stickiness itself is enforced by the pinning in
    the world stepper).  A foot clearly below the local surface is inside
    a solid and raises PenetrationError.
    """
    contacts: list[bool] = []
    heights: list[float] = []
    for i, foot in enumerate(feet):
        x, y, z = float(foot[0]), float(foot[1]), float(foot[2])
        surface = env.surface_under(x, y)
        if z < surface - CONTACT_SNAP_BAND:
            raise PenetrationError(
                f"foot {i} inside a solid at ({x:.3f}, {y:.3f}, {z:.4f}), "
                f"surface z={surface:.4f}"
            )
        contacts.append(z <= surface + CONTACT_TOL)
        heights.append(surface)
    del prev_contacts
    return contacts, heights


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.01
    max_steps: int = 500_000
    seed: int = 0
    stop_on_failure: bool = True
    record_every: int = 1
    settle_s: float = 0.0        # extra hold time after the script completes

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass(frozen=True)
class SimSnapshot:
    t: float
    pose: BodyPose
    legs: tuple[LegState, ...]
    foot_positions: tuple[tuple[float, float, float], ...]
    contacts: tuple[bool, ...]
    leg_loads: tuple[float, ...]
    leg_limits: tuple[float, ...]
    margin: float
    total_power: float
    cumulative_energy: float
    failures: tuple[str, ...]
    standing_height: float
    ceiling_breach: bool


@dataclass
class _PushState:
    legs: list[int]
    sin0: dict[int, float]
    lengths: dict[int, float]
    targets: dict[int, float]
    advance: float
    advance_max: float


class World:
    """One live simulation: robot + environment + sequencer + recorder hooks."""

    def __init__(
        self,
        assembly: RobotAssembly,
        env: Environment,
        gait_cfg: GaitConfig | None = None,
        pd: PdGains | None = None,
        config: SimConfig | None = None,
        initial_extensions=(0.0, 0.0, 0.0, 0.0),
        initial_tilts=(0.0, 0.0, 0.0, 0.0),
    ) -> None:
        self.assembly = assembly
        self.env = env
        self.gait_cfg = gait_cfg if gait_cfg is not None else GaitConfig()
        self.pd = pd if pd is not None else PdGains(0.0, 0.0, 0.0, 0.0)
        self.config = config if config is not None else SimConfig()
        self.rng = np.random.default_rng(self.config.seed)

        self.legs: list[LegState] = [
            LegState(module=ActuatorState(extension_l=float(e)), tilt_deg=float(t))
            for e, t in zip(initial_extensions, initial_tilts)
        ]
        self.pose = BodyPose()
        self.pins: dict[int, np.ndarray] = {}
        self.queue: list[Command] = []
        self.backlog: list[Primitive] = []
        self.active: Primitive | None = None
        self._push: _PushState | None = None
        self._lift_released = False
        self._no_pin: set[int] = set()
        self._active_ext_targets: dict[int, float] = {}
        self.step_count = 0
        self.energy = 0.0
        self.failures: list[str] = []
        self.halted = False
        self._settle_steps_left = 0
        self._script_done = False
        self._prev_meas_rp: tuple[float, float] | None = None

        self._settle_initial_pose()
        self.snapshot = self._build_snapshot(0.0, 0.0)

    # -- setup -------------------------------------------------------------

    def _settle_initial_pose(self) -> None:
        """Place the robot on the ground along the best-fit plane of its feet."""
        feet_body = foot_positions_body(self.assembly.chassis, self.legs)
        centered = feet_body - feet_body.mean(axis=0)
        _, _, vt = np.linalg.svd(centered)
        normal = vt[2]
        if normal[2] < 0:
            normal = -normal
        rot = _rotation_between(normal, np.array([0.0, 0.0, 1.0]))
        rotated = feet_body @ rot.T
        z_shift = -rotated[:, 2].min()
        position = np.array([0.0, 0.0, z_shift])
        self.pose = pose_from_rotation(rot, position)
        feet_w = forward_kinematics(self.assembly.chassis, self.legs, self.pose)
        for i in range(4):
            x, y, z = feet_w[i]
            surface = self.env.surface_under(x, y)
            if abs(z - surface) <= CONTACT_TOL:
                self.pins[i] = np.array([x, y, surface])
                self.legs[i] = replace(self.legs[i], in_contact=True)

    def load_script(self, commands) -> None:
        self.queue = list(commands)
        self._script_done = not self.queue
        self._settle_steps_left = int(round(self.config.settle_s / self.config.dt))

    def reset(self, initial_extensions=(0.0, 0.0, 0.0, 0.0), initial_tilts=(0.0, 0.0, 0.0, 0.0)):
        self.__init__(
            self.assembly,
            self.env,
            self.gait_cfg,
            self.pd,
            self.config,
            initial_extensions,
            initial_tilts,
        )

    @property
    def idle(self) -> bool:
        """True when no primitive is active and no command is queued."""
        return self.active is None and not self.backlog and not self.queue

    def done(self) -> bool:
        if self.halted:
            return True
        if not self.idle:
            return False
        return self._settle_steps_left <= 0

    # -- sequencing ----------------------------------------------------------

    def enqueue(self, cmd: Command) -> None:
        self.queue.append(cmd)

    def _advance_queue(self) -> None:
        while self.active is None:
            if self.backlog:
                self._start_primitive(self.backlog.pop(0))
                return
            if not self.queue:
                return
            cmd = self.queue.pop(0)
            try:
                self.backlog = expand_command(cmd, self, self.gait_cfg)
            except CommandError as exc:
                self._record_failure(f"command_rejected:{exc}")
                return

    def _start_primitive(self, prim: Primitive) -> None:
        self.active = prim
        self._lift_released = prim.lift is None
        self._no_pin = set()
        if prim.lift is not None:
            self._no_pin.add(prim.lift)
        for module, _ in prim.tilt_targets:
            if not prim.push and not self.legs[module].in_contact:
                self._no_pin.add(module)
        self._active_ext_targets = dict(prim.extension_targets)
        for module, delta in prim.retract_by:
            current = self.legs[module].module.extension_l
            self._active_ext_targets[module] = max(current - delta, 0.0)
        self._push = None
        if prim.push:
            legs = []
            sin0: dict[int, float] = {}
            lengths: dict[int, float] = {}
            targets: dict[int, float] = {}
            drops = []
            for module, target in prim.tilt_targets:
                if not self.legs[module].in_contact:
                    continue
                theta0 = math.radians(self.legs[module].tilt_deg)
                length = self.assembly.chassis.leg_offset + self.legs[module].module.extension_l
                drop = length * (math.sin(theta0) - math.sin(math.radians(target)))
                if drop <= 0:
                    continue
                legs.append(module)
                sin0[module] = math.sin(theta0)
                lengths[module] = length
                targets[module] = target
                drops.append(drop)
            advance_max = min(drops) if drops else 0.0
            self._push = _PushState(
                legs=legs, sin0=sin0, lengths=lengths, targets=targets,
                advance=0.0, advance_max=advance_max,
            )

    def _release_lift(self) -> bool:
        """Margin-guarded contact release at the start of a lifting primitive."""
        assert self.active is not None and self.active.lift is not None
        leg = self.active.lift
        if not self.legs[leg].in_contact:
            self._lift_released = True
            return True
        remaining = [i for i in self.pins if i != leg]
        if len(remaining) >= 3:
            com_body, _ = center_of_mass_body(self.assembly, self.legs)
            com_w = self.pose.transform(com_body)
            margin = static_stability_margin(
                [self.pins[i][:2] for i in remaining], com_w[:2]
            )
        else:
            margin = float("-inf")
        if margin < 0:
            # refusing the lift abandons the rest of the expanded command;
            # executing a step's swing on a planted foot would drag it
            self._record_failure(f"refused_lift:leg{leg}")
            self.active = None
            self._push = None
            self._active_ext_targets = {}
            self.backlog.clear()
            return False
        self._unpin(leg)
        self._lift_released = True
        return True

    def _unpin(self, leg: int) -> None:
        self.pins.pop(leg, None)
        self.legs[leg] = replace(self.legs[leg], in_contact=False)

    # -- stepping ------------------------------------------------------------

    def step(self) -> SimSnapshot:
        """Advance one quasi-static timestep and return the new snapshot."""
        cfg = self.config
        dt = cfg.dt
        if self.halted:
            return self.snapshot
        if self.active is None:
            self._advance_queue()
        if self.active is None and self.idle and self._settle_steps_left > 0:
            self._settle_steps_left -= 1

        if self.active is not None and not self._lift_released:
            if not self._release_lift():
                # refusal is a failure; fall through so it gets recorded
                pass

        ext_targets: dict[int, float] = {}
        tilt_targets: dict[int, float] = {}
        prim = self.active
        if prim is not None:
            ext_targets.update(self._active_ext_targets)
            if self._push is not None:
                self._advance_push(dt)
            else:
                for module, target in prim.tilt_targets:
                    tilt_targets[module] = target
            for module in prim.to_contact:
                if not self.legs[module].in_contact:
                    ext_targets[module] = self.assembly.modules[module].max_extension

        self._apply_pd(ext_targets, dt)
        self._move_extensions(ext_targets, dt)
        self._move_tilts(tilt_targets, dt)

        self._solve_pose()
        self._strain_release()
        feet_w = self._update_contacts()
        breach = self._check_clearances(feet_w)

        loads, limits, margin = self._statics(feet_w)
        total_power = sum(power_draw(self.assembly.modules[i], self.legs[i].module) for i in range(4))
        self.energy += total_power * dt
        self.step_count += 1
        t = self.step_count * dt

        if margin < 0 and len(self.pins) >= 3:
            self._record_failure("instability:negative_margin")

        self._finish_primitive(ext_targets)

        if self.failures and cfg.stop_on_failure:
            self.halted = True

        self.snapshot = self._build_snapshot(t, total_power, feet_w, loads, limits, margin, breach)
        return self.snapshot

    def _advance_push(self, dt: float) -> None:
        push = self._push
        assert push is not None
        if not push.legs:
            push.advance = push.advance_max
            return
        rate = math.radians(self.gait_cfg.servo_rate_dps)
        # da = L cos(theta) dtheta keeps every servo within its rate limit
        min_scale = min(
            push.lengths[i] * math.cos(math.radians(self.legs[i].tilt_deg))
            for i in push.legs
        )
        push.advance = min(push.advance + rate * dt * max(min_scale, 1e-4), push.advance_max)
        for i in push.legs:
            s = push.sin0[i] - push.advance / push.lengths[i]
            tilt = math.degrees(math.asin(max(-1.0, min(1.0, s))))
            # legs whose own drop set advance_max land exactly on target
            if abs(tilt - push.targets[i]) < 1e-9:
                tilt = push.targets[i]
            self.legs[i] = replace(self.legs[i], tilt_deg=tilt)

    def _apply_pd(self, ext_targets: dict[int, float], dt: float) -> None:
        if not self.pd.enabled:
            return
        # a push sweep rolls the body on purpose; trimming legs against it
        # mid-sweep only strains the pinned feet
        if self._push is not None:
            return
        noise = (
            self.rng.normal(0.0, self.pd.imu_noise_sigma, size=2)
            if self.pd.imu_noise_sigma > 0
            else (0.0, 0.0)
        )
        roll = self.pose.roll + float(noise[0])
        pitch = self.pose.pitch + float(noise[1])
        if self._prev_meas_rp is None:
            rates = (0.0, 0.0)
        else:
            rates = ((roll - self._prev_meas_rp[0]) / dt, (pitch - self._prev_meas_rp[1]) / dt)
        self._prev_meas_rp = (roll, pitch)
        corrections = pd_stabilize(self.pd, roll, pitch, rates[0], rates[1], dt)
        for i in range(4):
            if i in ext_targets or not self.legs[i].in_contact:
                continue
            spec = self.assembly.modules[i]
            target = self.legs[i].module.extension_l + float(corrections[i])
            ext_targets[i] = min(max(target, 0.0), spec.max_extension)

    def _move_extensions(self, ext_targets: dict[int, float], dt: float) -> None:
        for i, target in ext_targets.items():
            spec = self.assembly.modules[i]
            state = self.legs[i].module
            delta = target - state.extension_l
            full = spec.rated_speed * dt
            duty = max(-1.0, min(1.0, delta / full))
            new_state = step_extension(spec, state, duty, dt)
            if abs(new_state.extension_l - target) < SNAP_EPS:
                new_state = replace(new_state, extension_l=target)
            self.legs[i] = replace(self.legs[i], module=new_state)
        for i in range(4):
            if i not in ext_targets:
                state = self.legs[i].module
                if state.duty != 0.0 or state.current != 0.0:
                    self.legs[i] = replace(
                        self.legs[i], module=replace(state, duty=0.0, current=0.0)
                    )

    def _move_tilts(self, tilt_targets: dict[int, float], dt: float) -> None:
        rate = self.gait_cfg.servo_rate_dps * dt
        for i, target in tilt_targets.items():
            tilt = self.legs[i].tilt_deg
            delta = target - tilt
            if abs(delta) <= rate:
                tilt = target
            else:
                tilt += math.copysign(rate, delta)
            self.legs[i] = replace(self.legs[i], tilt_deg=tilt)

    def _solve_pose(self) -> None:
        if not self.pins:
            raise AirborneError("no pinned feet; quasi-static pose is undefined")
        feet_body = foot_positions_body(self.assembly.chassis, self.legs)
        idx = sorted(self.pins)
        b = feet_body[idx]
        w = np.array([self.pins[i] for i in idx])
        if len(idx) >= 3:
            rot, pos = _kabsch(b, w)
        else:
            rot = self.pose.rotation()
            pos = (w - b @ rot.T).mean(axis=0)
        self.pose = pose_from_rotation(rot, pos)

    def _strain_release(self) -> None:
        for _ in range(2):
            if len(self.pins) <= 3:
                return
            feet_body = foot_positions_body(self.assembly.chassis, self.legs)
            rot = self.pose.rotation()
            pos = np.asarray(self.pose.position)
            worst, worst_res = -1, 0.0
            for i, pin in self.pins.items():
                res = float(np.linalg.norm(pos + rot @ feet_body[i] - pin))
                if res > worst_res:
                    worst, worst_res = i, res
            if worst_res <= RELEASE_TOL:
                return
            self._unpin(worst)
            self._solve_pose()

    def _update_contacts(self) -> np.ndarray:
        feet_w = forward_kinematics(self.assembly.chassis, self.legs, self.pose)
        for i in range(4):
            if i in self.pins:
                feet_w[i] = self.pins[i]
                continue
            x, y, z = feet_w[i]
            surface = self.env.surface_under(float(x), float(y))
            if z < surface - CONTACT_SNAP_BAND:
                # deep under the local support surface: crossed into a solid,
                # either a box side wall or the ground itself
                raise PenetrationError(
                    f"foot {i} entered a solid at ({x:.3f}, {y:.3f}, {z:.4f}), "
                    f"surface z={surface:.4f}"
                )
            if z <= surface + CONTACT_TOL and i not in self._no_pin:
                pin = np.array([x, y, surface])
                self.pins[i] = pin
                feet_w[i] = pin
                self.legs[i] = replace(self.legs[i], in_contact=True)
        return feet_w

    def _check_clearances(self, feet_w: np.ndarray) -> bool:
        corners = body_corners_world(self.assembly.chassis, self.pose)
        points = corners
        if self.env.boxes:
            points = np.vstack([corners, body_bottom_points_world(self.assembly.chassis, self.pose)])
        for point in points:
            x, y, z = point
            surface = self.env.surface_under(float(x), float(y))
            if z < surface - CONTACT_TOL:
                raise PenetrationError(f"body point inside solid at ({x:.3f}, {y:.3f}, {z:.4f})")
        breach = False
        if self.env.ceiling is not None:
            top = float(corners[:, 2].max())
            if top > self.env.ceiling + CONTACT_TOL:
                breach = True
        del feet_w
        return breach

    def _statics(self, feet_w: np.ndarray):
        limits = []
        com_body, mass = center_of_mass_body(self.assembly, self.legs)
        com_w = self.pose.transform(com_body)
        if self.pins:
            loads = leg_load_distribution(
                self.assembly, self.legs, self.pose, feet_w=feet_w, com_w=com_w, mass=mass
            )
        else:
            loads = np.zeros(4)
        for i in range(4):
            vertical = float(loads[i])
            cos_t = max(math.cos(math.radians(self.legs[i].tilt_deg)), 0.2)
            axial = max(vertical, 0.0) / cos_t
            state = replace(self.legs[i].module, axial_load=axial)
            report, state = check_buckling(self.assembly.modules[i], state)
            if state.failed and not self.legs[i].module.failed:
                self._record_failure(f"buckled:leg{i}")
            limits.append(report.limit)
            self.legs[i] = replace(self.legs[i], module=state)

        contact_xy = [self.pins[i][:2] for i in sorted(self.pins)]
        margin = static_stability_margin(contact_xy, com_w[:2]) if len(contact_xy) >= 3 else float("-inf")
        return loads, limits, margin

    def _finish_primitive(self, ext_targets: dict[int, float]) -> None:
        prim = self.active
        if prim is None:
            return
        for module, target in self._active_ext_targets.items():
            if abs(self.legs[module].module.extension_l - target) > 1e-9:
                return
        if self._push is not None:
            if self._push.advance < self._push.advance_max - 1e-12:
                return
        else:
            for module, target in prim.tilt_targets:
                if abs(self.legs[module].tilt_deg - target) > 1e-9:
                    return
        for module in prim.to_contact:
            if not self.legs[module].in_contact:
                spec = self.assembly.modules[module]
                if self.legs[module].module.extension_l < spec.max_extension - 1e-9:
                    return
        del ext_targets
        self.active = None
        self._push = None
        self._no_pin = set()
        self._active_ext_targets = {}

    def _record_failure(self, failure: str) -> None:
        if failure not in self.failures:
            self.failures.append(failure)

    def _build_snapshot(
        self, t, total_power, feet_w=None, loads=None, limits=None, margin=None, breach=False
    ) -> SimSnapshot:
        if feet_w is None:
            feet_w = forward_kinematics(self.assembly.chassis, self.legs, self.pose)
            for i, pin in self.pins.items():
                feet_w[i] = pin
            loads_arr, limits, margin = self._statics(feet_w)
            loads = loads_arr
        top = body_corners_world(self.assembly.chassis, self.pose)[:, 2].max()
        return SimSnapshot(
            t=t,
            pose=self.pose,
            legs=tuple(self.legs),
            foot_positions=tuple(tuple(float(v) for v in foot) for foot in feet_w),
            contacts=tuple(leg.in_contact for leg in self.legs),
            leg_loads=tuple(float(v) for v in loads),
            leg_limits=tuple(float(v) for v in limits),
            margin=float(margin),
            total_power=float(total_power),
            cumulative_energy=float(self.energy),
            failures=tuple(self.failures),
            standing_height=float(top),
            ceiling_breach=breach,
        )


def _kabsch(b: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares rigid transform mapping body points b onto world points w."""
    bc = b.mean(axis=0)
    wc = w.mean(axis=0)
    h = (b - bc).T @ (w - wc)
    u, _, vt = np.linalg.svd(h)
    d = np.sign(np.linalg.det(vt.T @ u.T))
    flip = np.diag([1.0, 1.0, d if d != 0 else 1.0])
    rot = vt.T @ flip @ u.T
    pos = wc - rot @ bc
    return rot, pos


def _rotation_between(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minimal rotation taking unit vector a to unit vector b."""
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    v = np.cross(a, b)
    c = float(a @ b)
    if np.linalg.norm(v) < 1e-12:
        if c > 0:
            return np.eye(3)
        # opposite vectors: rotate half-turn about any perpendicular axis
        perp = np.array([1.0, 0.0, 0.0]) if abs(a[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        v = np.cross(a, perp)
        v /= np.linalg.norm(v)
        return 2.0 * np.outer(v, v) - np.eye(3)
    vx = np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]])
    return np.eye(3) + vx + vx @ vx * (1.0 / (1.0 + c))


def step_world(world: World) -> SimSnapshot:
    """Advance the world one timestep (thin functional wrapper)."""
    return world.step()


@dataclass
class ScenarioSummary:
    steps: int
    duration_s: float
    displacement_m: tuple[float, float]
    forward_displacement_m: float
    min_margin_m: float
    max_leg_load_n: float
    peak_power_w: float
    mean_power_w: float
    energy_j: float
    failures: tuple[str, ...]
    ceiling_breaches: int
    final_height_m: float

    def to_dict(self) -> dict:
        min_margin = self.min_margin_m
        return {
            "steps": self.steps,
            "duration_s": self.duration_s,
            "displacement_m": list(self.displacement_m),
            "forward_displacement_m": self.forward_displacement_m,
            "min_margin_m": None if math.isinf(min_margin) else min_margin,
            "max_leg_load_n": self.max_leg_load_n,
            "peak_power_w": self.peak_power_w,
            "mean_power_w": self.mean_power_w,
            "energy_j": self.energy_j,
            "failures": list(self.failures),
            "ceiling_breaches": self.ceiling_breaches,
            "final_height_m": self.final_height_m,
        }


def run_scenario(world: World, script) -> tuple[list[SimSnapshot], ScenarioSummary]:
    """Execute a command script to completion, recording the trajectory."""
    world.load_script(script)
    snapshots = [world.snapshot]
    start = np.asarray(world.snapshot.pose.position)
    try:
        while not world.done() and world.step_count < world.config.max_steps:
            snap = world.step()
            if world.step_count % world.config.record_every == 0 or world.done():
                snapshots.append(snap)
        if not world.done():
            world._record_failure("max_steps_reached")
    except PenetrationError as exc:
        world._record_failure(f"penetration:{exc}")
        world.halted = True
        snapshots.append(world.snapshot)

    end = np.asarray(world.snapshot.pose.position)
    margins = [s.margin for s in snapshots]
    powers = [s.total_power for s in snapshots[1:]] or [0.0]
    loads = [max(s.leg_loads) for s in snapshots]
    summary = ScenarioSummary(
        steps=world.step_count,
        duration_s=world.step_count * world.config.dt,
        displacement_m=(float(end[0] - start[0]), float(end[1] - start[1])),
        forward_displacement_m=float(end[0] - start[0]),
        min_margin_m=min(margins),
        max_leg_load_n=max(loads),
        peak_power_w=max(powers),
        mean_power_w=float(np.mean(powers)),
        energy_j=world.snapshot.cumulative_energy,
        failures=tuple(world.failures),
        ceiling_breaches=sum(1 for s in snapshots if s.ceiling_breach),
        final_height_m=world.snapshot.standing_height,
    )
    return snapshots, summary
