"""Dynamic model of one zip-deployed actuator module.

The motor is a kinematic rate source: commanded duty sets the extension rate
directly (scaled by supply voltage), while axial load affects only the
current draw.  Buckling is checked against the Euler limit corrected by a
length-dependent knockdown factor and latches as a failure until the state
is explicitly reset.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .beam import BeamSpec, EndCondition, LengthKnockdown, PINNED_PINNED, euler_buckling_load

NOMINAL_VOLTAGE = 6.0

# Current gain fitted so four modules lifting the stock robot draw the
# measured whole-robot expansion power (see calibration.fit_load_current_gain).
DEFAULT_LOAD_CURRENT_GAIN = 0.06292395011389235


@dataclass(frozen=True)
class ModuleSpec:
    """Electromechanical parameters of one actuator module."""

    max_extension: float = 0.28
    max_speed: float = 0.010          # m/s at nominal 6 V
    supply_v: float = 6.0
    idle_current: float = 0.050       # A, unloaded extension at 6 V
    load_current_gain: float = DEFAULT_LOAD_CURRENT_GAIN   # A per N of compression
    block_mass: float = 0.028
    strip_mass_per_m: float = 0.004 / 0.3   # both strips together, kg per metre
    beam: BeamSpec = field(default_factory=BeamSpec)
    knockdown: LengthKnockdown = field(default_factory=LengthKnockdown)

    def __post_init__(self) -> None:
        if self.max_extension <= 0:
            raise ValueError(f"max_extension must be positive, got {self.max_extension}")
        if self.max_speed <= 0:
            raise ValueError(f"max_speed must be positive, got {self.max_speed}")
        if self.supply_v <= 0:
            raise ValueError(f"supply_v must be positive, got {self.supply_v}")
        if self.idle_current < 0:
            raise ValueError(f"idle_current must be nonnegative, got {self.idle_current}")
        if self.load_current_gain < 0:
            raise ValueError(f"load_current_gain must be nonnegative, got {self.load_current_gain}")
        if self.block_mass < 0 or self.strip_mass_per_m < 0:
            raise ValueError("masses must be nonnegative")

    @property
    def rated_speed(self) -> float:
        """Extension speed at the configured supply voltage (m/s)."""
        return self.max_speed * self.supply_v / NOMINAL_VOLTAGE


@dataclass(frozen=True)
class ActuatorState:
    """Extension state of one module.  Values, not shared objects."""

    extension_l: float = 0.0
    duty: float = 0.0                 # signed PWM duty in [-1, 1]
    axial_load: float = 0.0          # N, compression positive
    current: float = 0.0             # A
    failed: bool = False
    failure_kind: str | None = None  # "buckled" | "over-travel"
    saturated: bool = False          # clamped at a travel bound last step
    step_ignored: bool = False       # a step was requested on a failed module

    def __post_init__(self) -> None:
        if self.extension_l < 0:
            raise ValueError(f"extension_l must be nonnegative, got {self.extension_l}")
        if self.current < 0:
            raise ValueError(f"current must be nonnegative, got {self.current}")

    def reset_failure(self) -> "ActuatorState":
        return replace(self, failed=False, failure_kind=None, step_ignored=False)


@dataclass(frozen=True)
class BucklingReport:
    limit: float        # N; inf when fully stowed
    headroom: float     # limit - axial_load
    buckled: bool


def step_extension(
    spec: ModuleSpec, state: ActuatorState, duty: float, dt: float
) -> ActuatorState:
    """Advance extension by one timestep under the given signed duty.

    Extension is clamped to [0, max_extension]; hitting a bound reports
    saturation but is not a failure.  A failed module ignores the step and
    comes back flagged.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if abs(duty) > 1.0:
        raise ValueError(f"duty must lie in [-1, 1], got {duty}")
    if state.failed:
        return replace(state, step_ignored=True)

    rate = duty * spec.rated_speed
    raw = state.extension_l + rate * dt
    new_l = min(max(raw, 0.0), spec.max_extension)
    saturated = raw != new_l
    if duty != 0.0:
        current = spec.idle_current + spec.load_current_gain * max(state.axial_load, 0.0)
    else:
        current = 0.0
    return replace(
        state,
        extension_l=new_l,
        duty=duty,
        current=current,
        saturated=saturated,
        step_ignored=False,
    )


def check_buckling(
    spec: ModuleSpec, state: ActuatorState, end: EndCondition = PINNED_PINNED
) -> tuple[BucklingReport, ActuatorState]:
    """Evaluate the knockdown-corrected buckling limit at the current length.

    Fully stowed (l = 0) the compressive path goes through the block, so the
    limit is unbounded.  A negative headroom latches the buckled failure on
    the returned state.
    """
    l = state.extension_l
    if l <= 0:
        report = BucklingReport(limit=float("inf"), headroom=float("inf"), buckled=False)
        return report, state
    limit = euler_buckling_load(spec.beam, end, l) * spec.knockdown.factor(l)
    headroom = limit - state.axial_load
    buckled = headroom < 0
    report = BucklingReport(limit=limit, headroom=headroom, buckled=buckled)
    if buckled and not state.failed:
        state = replace(state, failed=True, failure_kind="buckled")
    return report, state


def power_draw(spec: ModuleSpec, state: ActuatorState) -> float:
    """Electrical power of the module (W)."""
    return spec.supply_v * state.current
