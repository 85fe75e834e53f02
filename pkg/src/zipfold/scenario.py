"""Scenario file schema: strict JSON loading, validation, serialization.

Unknown keys are rejected so that a typo in an experiment config fails
loudly instead of silently running defaults.  All quantities are SI with
unit suffixes in the field names (_m, _deg, _s, _n, _w, _kg, _a, _rad);
conversion from the bench units happens only at this boundary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

from .actuator import ModuleSpec
from .assembly import ChassisSpec, RobotAssembly
from .calibration import calibrate_model, default_calibration
from .gait import Command, CommandKind, GaitConfig, PdGains
from .sim import Box, Environment, SimConfig, World

SCHEMA_VERSION = "scenario.v1"


class ScenarioError(ValueError):
    """Validation failure, carrying the offending document path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def _require_mapping(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ScenarioError(path, f"expected an object, got {type(value).__name__}")
    return value


def _check_keys(value: dict, allowed, path: str) -> None:
    unknown = set(value) - set(allowed)
    if unknown:
        raise ScenarioError(path, f"unknown keys {sorted(unknown)}; allowed {sorted(allowed)}")


def _number(value, path: str, minimum=None, maximum=None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(path, f"expected a number, got {value!r}")
    v = float(value)
    if minimum is not None and v < minimum:
        raise ScenarioError(path, f"value {v} below minimum {minimum}")
    if maximum is not None and v > maximum:
        raise ScenarioError(path, f"value {v} above maximum {maximum}")
    return v


def _integer(value, path: str, minimum=None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ScenarioError(path, f"value {value} below minimum {minimum}")
    return value


def _vector(value, n, path: str) -> tuple:
    if not isinstance(value, (list, tuple)) or len(value) != n:
        raise ScenarioError(path, f"expected a list of {n} numbers")
    return tuple(_number(v, f"{path}[{i}]") for i, v in enumerate(value))


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    assembly: RobotAssembly
    env: Environment
    gait: GaitConfig
    pd: PdGains
    script: tuple[Command, ...]
    sim: SimConfig
    initial_extensions: tuple[float, float, float, float]
    initial_tilts: tuple[float, float, float, float]
    anchors: tuple | None = None

    def build_world(self, dt: float | None = None, seed: int | None = None) -> World:
        config = self.sim
        if dt is not None:
            config = replace(config, dt=dt)
        if seed is not None:
            config = replace(config, seed=seed)
        return World(
            self.assembly,
            self.env,
            gait_cfg=self.gait,
            pd=self.pd,
            config=config,
            initial_extensions=self.initial_extensions,
            initial_tilts=self.initial_tilts,
        )

    def to_dict(self) -> dict:
        chassis = self.assembly.chassis
        module = self.assembly.modules[0]
        doc = {
            "schema": SCHEMA_VERSION,
            "name": self.name,
            "robot": {
                "chassis": {
                    "chassis_mass_kg": chassis.chassis_mass,
                    "compact_height_m": chassis.compact_height,
                    "body_size_m": list(chassis.body_size),
                    "leg_offset_m": chassis.leg_offset,
                    "com_offset_m": list(chassis.com_offset),
                    "mount_points_m": [list(p) for p in chassis.mount_points],
                    "tilt_range_deg": chassis.tilt_range_deg,
                },
                "module": {
                    "max_extension_m": module.max_extension,
                    "max_speed_m_s": module.max_speed,
                    "supply_v": module.supply_v,
                    "idle_current_a": module.idle_current,
                    "load_current_gain_a_n": module.load_current_gain,
                    "block_mass_kg": module.block_mass,
                    "strip_mass_per_m_kg": module.strip_mass_per_m,
                },
                "initial_extensions_m": list(self.initial_extensions),
                "initial_tilts_deg": list(self.initial_tilts),
            },
            "environment": {
                "boxes": [
                    {"min_m": list(b.min_corner), "size_m": list(b.size)} for b in self.env.boxes
                ],
            },
            "gait": {
                "stride_angle_deg": self.gait.stride_angle_deg,
                "step_clearance_m": self.gait.step_clearance_m,
                "servo_rate_dps": self.gait.servo_rate_dps,
                "side_order": self.gait.side_order,
                "pd": {
                    "kp_roll": self.pd.kp_roll,
                    "kd_roll": self.pd.kd_roll,
                    "kp_pitch": self.pd.kp_pitch,
                    "kd_pitch": self.pd.kd_pitch,
                    "imu_noise_sigma_rad": self.pd.imu_noise_sigma,
                    "max_correction_m": self.pd.max_correction_m,
                    "enabled": self.pd.enabled,
                },
            },
            "script": [_command_to_dict(c) for c in self.script],
            "sim": {
                "dt_s": self.sim.dt,
                "max_steps": self.sim.max_steps,
                "seed": self.sim.seed,
                "stop_on_failure": self.sim.stop_on_failure,
                "record_every": self.sim.record_every,
                "settle_s": self.sim.settle_s,
            },
        }
        if self.env.ceiling is not None:
            doc["environment"]["ceiling_m"] = self.env.ceiling
        if self.anchors is not None:
            doc["calibration"] = {"anchors": [list(a) for a in self.anchors]}
        return doc


def _command_to_dict(cmd: Command) -> dict:
    doc: dict = {"kind": cmd.kind.value}
    if cmd.module is not None:
        doc["module"] = cmd.module
    if cmd.target_m is not None:
        if cmd.kind in (CommandKind.STAND_TO, CommandKind.CROUCH_TO):
            doc["height_m"] = cmd.target_m
        else:
            doc["target_m"] = cmd.target_m
    if cmd.angle_deg is not None:
        doc["angle_deg"] = cmd.angle_deg
    if cmd.kind is CommandKind.GAIT:
        doc["cycles"] = cmd.cycles
    return doc


_COMMAND_FIELDS = {
    CommandKind.EXTEND: ({"module", "target_m"}, set()),
    CommandKind.RETRACT: ({"module", "target_m"}, set()),
    CommandKind.TILT: ({"module", "angle_deg"}, set()),
    CommandKind.STEP: ({"module"}, {"angle_deg"}),
    CommandKind.PUSH: (set(), {"angle_deg"}),
    CommandKind.STAND_TO: ({"height_m"}, set()),
    CommandKind.CROUCH_TO: ({"height_m"}, set()),
    CommandKind.REACH: ({"module"}, {"target_m", "angle_deg"}),
    CommandKind.GAIT: (set(), {"cycles"}),
}


def _parse_command(doc, path: str) -> Command:
    doc = _require_mapping(doc, path)
    if "kind" not in doc:
        raise ScenarioError(path, "missing 'kind'")
    try:
        kind = CommandKind(doc["kind"])
    except ValueError:
        raise ScenarioError(
            f"{path}.kind", f"unknown command {doc['kind']!r}"
        ) from None
    required, optional = _COMMAND_FIELDS[kind]
    _check_keys(doc, {"kind"} | required | optional, path)
    missing = required - set(doc)
    if missing:
        raise ScenarioError(path, f"{kind.value} requires {sorted(missing)}")

    module = None
    if "module" in doc:
        module = _integer(doc["module"], f"{path}.module", minimum=0)
        if module > 3:
            raise ScenarioError(f"{path}.module", "module index must be 0..3")
    target = None
    if "target_m" in doc:
        target = _number(doc["target_m"], f"{path}.target_m", minimum=0.0)
    if "height_m" in doc:
        target = _number(doc["height_m"], f"{path}.height_m", minimum=0.0)
    angle = None
    if "angle_deg" in doc:
        angle = _number(doc["angle_deg"], f"{path}.angle_deg")
    cycles = 1
    if "cycles" in doc:
        cycles = _integer(doc["cycles"], f"{path}.cycles", minimum=1)
    return Command(kind=kind, module=module, target_m=target, angle_deg=angle, cycles=cycles)


def parse_scenario(doc: dict, name_hint: str = "scenario") -> ScenarioSpec:
    doc = _require_mapping(doc, "$")
    _check_keys(
        doc,
        {"schema", "name", "robot", "environment", "gait", "script", "sim", "calibration"},
        "$",
    )
    if "schema" in doc and doc["schema"] != SCHEMA_VERSION:
        raise ScenarioError("$.schema", f"unsupported schema {doc['schema']!r}")
    name = doc.get("name", name_hint)
    if not isinstance(name, str):
        raise ScenarioError("$.name", "expected a string")

    anchors = None
    if "calibration" in doc:
        cal_doc = _require_mapping(doc["calibration"], "$.calibration")
        _check_keys(cal_doc, {"anchors"}, "$.calibration")
        raw = cal_doc.get("anchors", [])
        if not isinstance(raw, list):
            raise ScenarioError("$.calibration.anchors", "expected a list")
        anchors = []
        for i, entry in enumerate(raw):
            if not isinstance(entry, (list, tuple)) or len(entry) != 3:
                raise ScenarioError(
                    f"$.calibration.anchors[{i}]", "expected [quantity, value, length_or_null]"
                )
            quantity, value, length = entry
            if not isinstance(quantity, str):
                raise ScenarioError(f"$.calibration.anchors[{i}][0]", "expected a string")
            value = _number(value, f"$.calibration.anchors[{i}][1]")
            if length is not None:
                length = _number(length, f"$.calibration.anchors[{i}][2]", minimum=0.0)
            anchors.append((quantity, value, length))
        anchors = tuple(anchors)

    calibrated = calibrate_model(list(anchors)) if anchors else default_calibration()
    chassis, module = _parse_robot_specs(doc.get("robot", {}), calibrated.module)
    assembly = RobotAssembly(chassis=chassis, modules=(module,) * 4)

    robot_doc = _require_mapping(doc.get("robot", {}), "$.robot")
    initial_ext = (0.0, 0.0, 0.0, 0.0)
    if "initial_extensions_m" in robot_doc:
        initial_ext = _vector(robot_doc["initial_extensions_m"], 4, "$.robot.initial_extensions_m")
        for i, e in enumerate(initial_ext):
            if not 0 <= e <= module.max_extension:
                raise ScenarioError(
                    f"$.robot.initial_extensions_m[{i}]",
                    f"extension {e} outside [0, {module.max_extension}]",
                )
    initial_tilt = (0.0, 0.0, 0.0, 0.0)
    if "initial_tilts_deg" in robot_doc:
        initial_tilt = _vector(robot_doc["initial_tilts_deg"], 4, "$.robot.initial_tilts_deg")

    env = _parse_environment(doc.get("environment", {}))
    gait_cfg, pd = _parse_gait(doc.get("gait", {}))
    sim = _parse_sim(doc.get("sim", {}))

    script_doc = doc.get("script", [])
    if not isinstance(script_doc, list):
        raise ScenarioError("$.script", "expected a list of commands")
    script = tuple(
        _parse_command(c, f"$.script[{i}]") for i, c in enumerate(script_doc)
    )
    for i, cmd in enumerate(script):
        if cmd.kind in (CommandKind.EXTEND, CommandKind.RETRACT, CommandKind.REACH):
            if cmd.target_m is not None and cmd.target_m > module.max_extension:
                raise ScenarioError(
                    f"$.script[{i}]", f"target {cmd.target_m} m exceeds max extension"
                )
        if cmd.angle_deg is not None and abs(cmd.angle_deg) > chassis.tilt_range_deg:
            raise ScenarioError(f"$.script[{i}]", f"angle {cmd.angle_deg} outside servo range")

    return ScenarioSpec(
        name=name,
        assembly=assembly,
        env=env,
        gait=gait_cfg,
        pd=pd,
        script=script,
        sim=sim,
        initial_extensions=initial_ext,
        initial_tilts=initial_tilt,
        anchors=anchors,
    )


def _parse_robot_specs(doc, base_module: ModuleSpec) -> tuple[ChassisSpec, ModuleSpec]:
    doc = _require_mapping(doc, "$.robot")
    _check_keys(
        doc,
        {"chassis", "module", "initial_extensions_m", "initial_tilts_deg"},
        "$.robot",
    )
    chassis_doc = _require_mapping(doc.get("chassis", {}), "$.robot.chassis")
    allowed = {
        "chassis_mass_kg", "compact_height_m", "body_size_m", "leg_offset_m",
        "com_offset_m", "mount_points_m", "tilt_range_deg",
    }
    _check_keys(chassis_doc, allowed, "$.robot.chassis")
    kwargs = {}
    if "chassis_mass_kg" in chassis_doc:
        kwargs["chassis_mass"] = _number(chassis_doc["chassis_mass_kg"], "$.robot.chassis.chassis_mass_kg", minimum=0.0)
    if "compact_height_m" in chassis_doc:
        kwargs["compact_height"] = _number(chassis_doc["compact_height_m"], "$.robot.chassis.compact_height_m", minimum=0.0)
    if "body_size_m" in chassis_doc:
        kwargs["body_size"] = _vector(chassis_doc["body_size_m"], 3, "$.robot.chassis.body_size_m")
    if "leg_offset_m" in chassis_doc:
        kwargs["leg_offset"] = _number(chassis_doc["leg_offset_m"], "$.robot.chassis.leg_offset_m", minimum=0.0)
    if "com_offset_m" in chassis_doc:
        kwargs["com_offset"] = _vector(chassis_doc["com_offset_m"], 3, "$.robot.chassis.com_offset_m")
    if "mount_points_m" in chassis_doc:
        pts = chassis_doc["mount_points_m"]
        if not isinstance(pts, list) or len(pts) != 4:
            raise ScenarioError("$.robot.chassis.mount_points_m", "expected 4 points")
        kwargs["mount_points"] = tuple(
            _vector(p, 3, f"$.robot.chassis.mount_points_m[{i}]") for i, p in enumerate(pts)
        )
    if "tilt_range_deg" in chassis_doc:
        kwargs["tilt_range_deg"] = _number(chassis_doc["tilt_range_deg"], "$.robot.chassis.tilt_range_deg", minimum=0.0)
    try:
        chassis = ChassisSpec(**kwargs)
    except ValueError as exc:
        raise ScenarioError("$.robot.chassis", str(exc)) from None

    module_doc = _require_mapping(doc.get("module", {}), "$.robot.module")
    allowed = {
        "max_extension_m", "max_speed_m_s", "supply_v", "idle_current_a",
        "load_current_gain_a_n", "block_mass_kg", "strip_mass_per_m_kg",
    }
    _check_keys(module_doc, allowed, "$.robot.module")
    mod_kwargs = {}
    mapping = {
        "max_extension_m": ("max_extension", 0.0),
        "max_speed_m_s": ("max_speed", 0.0),
        "supply_v": ("supply_v", 0.0),
        "idle_current_a": ("idle_current", 0.0),
        "load_current_gain_a_n": ("load_current_gain", 0.0),
        "block_mass_kg": ("block_mass", 0.0),
        "strip_mass_per_m_kg": ("strip_mass_per_m", 0.0),
    }
    for key, (attr, minimum) in mapping.items():
        if key in module_doc:
            mod_kwargs[attr] = _number(module_doc[key], f"$.robot.module.{key}", minimum=minimum)
    try:
        module = replace(base_module, **mod_kwargs) if mod_kwargs else base_module
    except ValueError as exc:
        raise ScenarioError("$.robot.module", str(exc)) from None
    return chassis, module


def _parse_environment(doc) -> Environment:
    doc = _require_mapping(doc, "$.environment")
    _check_keys(doc, {"boxes", "ceiling_m"}, "$.environment")
    boxes = []
    for i, box_doc in enumerate(doc.get("boxes", [])):
        box_doc = _require_mapping(box_doc, f"$.environment.boxes[{i}]")
        _check_keys(box_doc, {"min_m", "size_m"}, f"$.environment.boxes[{i}]")
        if "min_m" not in box_doc or "size_m" not in box_doc:
            raise ScenarioError(f"$.environment.boxes[{i}]", "boxes need min_m and size_m")
        min_corner = _vector(box_doc["min_m"], 3, f"$.environment.boxes[{i}].min_m")
        size = _vector(box_doc["size_m"], 3, f"$.environment.boxes[{i}].size_m")
        try:
            boxes.append(Box(min_corner=min_corner, size=size))
        except ValueError as exc:
            raise ScenarioError(f"$.environment.boxes[{i}]", str(exc)) from None
    ceiling = None
    if "ceiling_m" in doc:
        ceiling = _number(doc["ceiling_m"], "$.environment.ceiling_m", minimum=1e-6)
    try:
        return Environment(boxes=tuple(boxes), ceiling=ceiling)
    except ValueError as exc:
        raise ScenarioError("$.environment", str(exc)) from None


def _parse_gait(doc) -> tuple[GaitConfig, PdGains]:
    doc = _require_mapping(doc, "$.gait")
    _check_keys(
        doc,
        {"stride_angle_deg", "step_clearance_m", "servo_rate_dps", "side_order", "pd"},
        "$.gait",
    )
    kwargs = {}
    for key, attr in (
        ("stride_angle_deg", "stride_angle_deg"),
        ("step_clearance_m", "step_clearance_m"),
        ("servo_rate_dps", "servo_rate_dps"),
    ):
        if key in doc:
            kwargs[attr] = _number(doc[key], f"$.gait.{key}")
    if "side_order" in doc:
        kwargs["side_order"] = doc["side_order"]
    try:
        gait_cfg = GaitConfig(**kwargs)
    except ValueError as exc:
        raise ScenarioError("$.gait", str(exc)) from None

    pd_doc = _require_mapping(doc.get("pd", {}), "$.gait.pd")
    allowed = {
        "kp_roll", "kd_roll", "kp_pitch", "kd_pitch",
        "imu_noise_sigma_rad", "max_correction_m", "enabled",
    }
    _check_keys(pd_doc, allowed, "$.gait.pd")
    enabled = pd_doc.get("enabled", bool(pd_doc))
    if not isinstance(enabled, bool):
        raise ScenarioError("$.gait.pd.enabled", "expected a boolean")
    if not enabled:
        sigma = _number(pd_doc.get("imu_noise_sigma_rad", 0.0), "$.gait.pd.imu_noise_sigma_rad", minimum=0.0)
        return gait_cfg, PdGains(0.0, 0.0, 0.0, 0.0, imu_noise_sigma=sigma)
    pd_kwargs = {}
    for key, attr in (
        ("kp_roll", "kp_roll"),
        ("kd_roll", "kd_roll"),
        ("kp_pitch", "kp_pitch"),
        ("kd_pitch", "kd_pitch"),
        ("imu_noise_sigma_rad", "imu_noise_sigma"),
        ("max_correction_m", "max_correction_m"),
    ):
        if key in pd_doc:
            pd_kwargs[attr] = _number(pd_doc[key], f"$.gait.pd.{key}", minimum=0.0)
    try:
        return gait_cfg, PdGains(**pd_kwargs)
    except ValueError as exc:
        raise ScenarioError("$.gait.pd", str(exc)) from None


def _parse_sim(doc) -> SimConfig:
    doc = _require_mapping(doc, "$.sim")
    _check_keys(
        doc,
        {"dt_s", "max_steps", "seed", "stop_on_failure", "record_every", "settle_s"},
        "$.sim",
    )
    kwargs = {}
    if "dt_s" in doc:
        kwargs["dt"] = _number(doc["dt_s"], "$.sim.dt_s", minimum=1e-6)
    if "max_steps" in doc:
        kwargs["max_steps"] = _integer(doc["max_steps"], "$.sim.max_steps", minimum=1)
    if "seed" in doc:
        kwargs["seed"] = _integer(doc["seed"], "$.sim.seed", minimum=0)
    if "stop_on_failure" in doc:
        if not isinstance(doc["stop_on_failure"], bool):
            raise ScenarioError("$.sim.stop_on_failure", "expected a boolean")
        kwargs["stop_on_failure"] = doc["stop_on_failure"]
    if "record_every" in doc:
        kwargs["record_every"] = _integer(doc["record_every"], "$.sim.record_every", minimum=1)
    if "settle_s" in doc:
        kwargs["settle_s"] = _number(doc["settle_s"], "$.sim.settle_s", minimum=0.0)
    try:
        return SimConfig(**kwargs)
    except ValueError as exc:
        raise ScenarioError("$.sim", str(exc)) from None


def load_scenario(path) -> ScenarioSpec:
    """Load and validate a scenario file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError("$", f"cannot read {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError("$", f"invalid JSON in {path}: {exc}") from None
    return parse_scenario(doc, name_hint=path.stem)


def loads_scenario(text: str, name_hint: str = "scenario") -> ScenarioSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError("$", f"invalid JSON: {exc}") from None
    return parse_scenario(doc, name_hint=name_hint)


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario shipped with the package (walk, obstacle, pipe, ...)."""
    root = resources.files("zipfold").joinpath("scenarios")
    candidate = root.joinpath(f"{name}.json")
    if not candidate.is_file():
        available = sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))
        raise ScenarioError("$", f"no bundled scenario {name!r}; available: {available}")
    return Path(str(candidate))


def load_bundled(name: str) -> ScenarioSpec:
    return load_scenario(bundled_scenario_path(name))
