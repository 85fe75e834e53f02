"""Power-law fitting and calibration of the beam/actuator model to bench anchors.

Scaling exponents are recovered by ordinary least squares in log-log space,
which keeps exponent recovery linear and deterministic.  Calibration inverts
the closed-form model at a small set of measured anchor points instead of
fitting raw material data: the long-extension buckling point is the
trustworthy anchor, and the short-length measurement only informs the
knockdown curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .actuator import ModuleSpec
from .beam import BeamSpec, EndCondition, LengthKnockdown, PINNED_PINNED

GRAVITY = 9.81

# Bench anchors for the stock module and robot.
ANCHOR_BUCKLING_LONG = ("buckling_force_n", 12.0, 0.28)
ANCHOR_BUCKLING_SHORT = ("buckling_force_n", 30.0 * GRAVITY, 0.03)
ANCHOR_STIFFNESS_RATIO = ("stiffness_ratio", 36.0, None)
ANCHOR_EXPANSION_POWER = ("expansion_power_w", 2.2, None)
ANCHOR_ROBOT_MASS = ("robot_mass_kg", 0.270, None)

DEFAULT_ANCHORS = [
    ANCHOR_BUCKLING_LONG,
    ANCHOR_BUCKLING_SHORT,
    ANCHOR_STIFFNESS_RATIO,
    ANCHOR_EXPANSION_POWER,
    ANCHOR_ROBOT_MASS,
]


@dataclass(frozen=True)
class SampleSet:
    """Measured (length, value) samples for one quantity."""

    points: tuple[tuple[float, float], ...]
    unit: str = "force"       # "force" | "stiffness"
    source: str = ""

    def __post_init__(self) -> None:
        if len(self.points) < 2:
            raise ValueError(f"need at least 2 samples, got {len(self.points)}")
        for l, y in self.points:
            if l <= 0 or y <= 0:
                raise ValueError(f"log-log fit needs positive samples, got ({l}, {y})")


@dataclass(frozen=True)
class PowerLawFit:
    """y = coefficient * l^exponent with l in metres."""

    exponent: float
    coefficient: float
    r_squared: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.r_squared <= 1.0 + 1e-12:
            raise ValueError(f"r_squared must lie in [0, 1], got {self.r_squared}")

    def evaluate(self, l: float) -> float:
        return self.coefficient * l**self.exponent


def fit_power_law(data: SampleSet) -> PowerLawFit:
    """Least-squares power-law fit in log space."""
    log_l = np.log([p[0] for p in data.points])
    log_y = np.log([p[1] for p in data.points])
    exponent, intercept = np.polyfit(log_l, log_y, 1)
    resid = log_y - (exponent * log_l + intercept)
    ss_res = float(np.dot(resid, resid))
    ss_tot = float(np.dot(log_y - log_y.mean(), log_y - log_y.mean()))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    return PowerLawFit(exponent=float(exponent), coefficient=float(math.exp(intercept)), r_squared=r2)


@dataclass
class CalibrationEntry:
    anchor: str
    parameter: str
    fitted: float
    residual: float


@dataclass
class CalibrationResult:
    beam: BeamSpec
    module: ModuleSpec
    entries: list[CalibrationEntry] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def report(self) -> str:
        lines = ["calibration report"]
        for e in self.entries:
            lines.append(
                f"  {e.anchor:<36} -> {e.parameter} = {e.fitted:.6g} (residual {e.residual:.3g})"
            )
        for w in self.warnings:
            lines.append(f"  warning: {w}")
        return "\n".join(lines)


def invert_buckling_anchor(force_n: float, length_m: float, end: EndCondition) -> float:
    """EI that makes the Euler formula hit the anchor exactly."""
    return force_n * length_m**2 / (end.c_factor * math.pi**2)


def fit_load_current_gain(
    power_w: float, robot_mass_kg: float, spec: ModuleSpec, n_modules: int = 4
) -> float:
    """Solve the linear current model so n modules lifting the robot draw power_w."""
    per_leg = robot_mass_kg * GRAVITY / n_modules
    per_module_current = power_w / (n_modules * spec.supply_v)
    return (per_module_current - spec.idle_current) / per_leg


def calibrate_model(
    anchors=None,
    base_beam: BeamSpec | None = None,
    base_module: ModuleSpec | None = None,
    end: EndCondition = PINNED_PINNED,
) -> CalibrationResult:
    """Fit model constants from anchor measurements.

    Anchors are (quantity, value, length_or_None) tuples.  Duplicate anchors
    for one quantity keep the first (by ascending length for buckling) and
    report the conflict.  At least the long-extension buckling point is
    required.
    """
    if anchors is None:
        anchors = DEFAULT_ANCHORS
    beam = base_beam if base_beam is not None else BeamSpec()
    module = base_module if base_module is not None else ModuleSpec()

    buckling: dict[float, float] = {}
    scalars: dict[str, float] = {}
    result = CalibrationResult(beam=beam, module=module)

    for quantity, value, length in anchors:
        if quantity == "buckling_force_n":
            if length is None or length <= 0:
                raise ValueError("buckling anchors need a positive length")
            if length in buckling:
                result.warnings.append(
                    f"duplicate buckling anchor at l={length}; keeping first ({buckling[length]} N)"
                )
                continue
            buckling[length] = value
        else:
            if quantity in scalars:
                result.warnings.append(
                    f"duplicate anchor {quantity}; keeping first ({scalars[quantity]})"
                )
                continue
            scalars[quantity] = value

    if not buckling:
        raise ValueError("calibration requires at least the long-extension buckling anchor")

    l_long = max(buckling)
    f_long = buckling[l_long]
    ei = invert_buckling_anchor(f_long, l_long, end)
    beam = replace(beam, effective_EI=ei)
    result.entries.append(
        CalibrationEntry(f"buckling {f_long} N @ {l_long} m", "effective_EI", ei, 0.0)
    )

    short_points = sorted(l for l in buckling if l != l_long)
    if short_points:
        l_short = short_points[0]
        ideal = end.c_factor * math.pi**2 * ei / l_short**2
        k_short = min(buckling[l_short] / ideal, 1.0)
        knockdown = LengthKnockdown(l_short=l_short, k_short=k_short, l_long=l_long)
        result.entries.append(
            CalibrationEntry(
                f"buckling {buckling[l_short]} N @ {l_short} m",
                "knockdown.k_short",
                k_short,
                buckling[l_short] - ideal * k_short,
            )
        )
    else:
        knockdown = LengthKnockdown(l_short=1e-6, k_short=1.0, l_long=l_long)
        result.warnings.append("uncalibrated short-length: knockdown defaults to 1 everywhere")

    if "stiffness_ratio" in scalars:
        ratio = scalars["stiffness_ratio"]
        beam = replace(beam, stowed_ratio=ratio)
        result.entries.append(
            CalibrationEntry(f"stiffness ratio {ratio}x", "stowed_ratio", ratio, 0.0)
        )

    module = replace(module, beam=beam, knockdown=knockdown)

    if "expansion_power_w" in scalars:
        mass = scalars.get("robot_mass_kg", ANCHOR_ROBOT_MASS[1])
        gain = fit_load_current_gain(scalars["expansion_power_w"], mass, module)
        module = replace(module, load_current_gain=gain)
        predicted = 4 * module.supply_v * (
            module.idle_current + gain * mass * GRAVITY / 4
        )
        result.entries.append(
            CalibrationEntry(
                f"expansion power {scalars['expansion_power_w']} W",
                "load_current_gain",
                gain,
                predicted - scalars["expansion_power_w"],
            )
        )

    result.beam = beam
    result.module = module
    return result


def default_calibration() -> CalibrationResult:
    """Model calibrated to the stock bench anchors."""
    return calibrate_model(DEFAULT_ANCHORS)
