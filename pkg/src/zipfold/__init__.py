"""Toolkit for zip-deployed beam actuators and the four-module walker."""

from .actuator import ActuatorState, BucklingReport, ModuleSpec, check_buckling, power_draw, step_extension
from .assembly import (
    ArmConfig,
    BodyPose,
    ChassisSpec,
    LegState,
    RobotAssembly,
    forward_kinematics,
    leg_load_distribution,
    max_reach,
    standing_height,
)
from .beam import (
    BeamSpec,
    EndCondition,
    FIXED_FIXED,
    FIXED_FREE,
    FIXED_PINNED,
    LengthKnockdown,
    PINNED_PINNED,
    bending_stiffness,
    euler_buckling_load,
    second_moment_flat_strip,
    second_moment_square_tube,
    short_length_knockdown,
    torsional_stiffness_scaled,
)
from .calibration import (
    CalibrationResult,
    PowerLawFit,
    SampleSet,
    calibrate_model,
    default_calibration,
    fit_power_law,
)
from .gait import (
    Command,
    CommandKind,
    GaitConfig,
    GaitPhase,
    PdGains,
    expand_command,
    pd_stabilize,
    static_stability_margin,
    stride_displacement,
)
from .sim import (
    Box,
    Environment,
    SimConfig,
    SimSnapshot,
    World,
    resolve_contacts,
    run_scenario,
    step_world,
)

__version__ = "0.1.0"
