"""Structural mechanics of a zip-deployed beam and its undeployed flat strip.

The deployed actuator is treated as a thin-walled square tube of side ``a``
and wall thickness ``t``.  All stiffness quantities can be driven either by
raw material data (``youngs_E`` times the geometric second moment) or by a
calibrated flexural rigidity ``effective_EI`` measured on real hardware,
which takes precedence when set.

Everything in this module is a pure function of its arguments; there is no
shared mutable state.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field


@dataclass(frozen=True)
class BeamSpec:
    """Cross-section geometry and calibrated stiffness of one zipped beam.

    side_a:       outer side of the square cross-section (m)
    wall_t:       strip wall thickness (m)
    youngs_E:     effective modulus of the printed material (Pa)
    effective_EI: calibrated flexural rigidity (N m^2); overrides
                  ``youngs_E * I`` when set
    stowed_ratio: deployed/stowed bending-stiffness ratio at equal length
    """

    side_a: float = 0.025
    wall_t: float = 0.0006
    youngs_E: float = 2.0e9
    effective_EI: float | None = None
    stowed_ratio: float = 36.0

    def __post_init__(self) -> None:
        if self.side_a <= 0:
            raise ValueError(f"side_a must be positive, got {self.side_a}")
        if not 0 < self.wall_t < self.side_a / 2:
            raise ValueError(
                f"wall_t must lie in (0, side_a/2); got t={self.wall_t}, a={self.side_a}"
            )
        if self.youngs_E <= 0:
            raise ValueError(f"youngs_E must be positive, got {self.youngs_E}")
        if self.effective_EI is not None and self.effective_EI <= 0:
            raise ValueError(f"effective_EI must be positive when set, got {self.effective_EI}")
        if self.stowed_ratio <= 1:
            raise ValueError(f"stowed_ratio must exceed 1, got {self.stowed_ratio}")

    @property
    def flexural_rigidity(self) -> float:
        """EI used by every stiffness formula (N m^2)."""
        if self.effective_EI is not None:
            return self.effective_EI
        return self.youngs_E * second_moment_square_tube(self)


@dataclass(frozen=True)
class EndCondition:
    """Euler end-condition constant C."""

    c_factor: float = 1.0

    def __post_init__(self) -> None:
        if self.c_factor <= 0:
            raise ValueError(f"c_factor must be positive, got {self.c_factor}")


PINNED_PINNED = EndCondition(1.0)
FIXED_FREE = EndCondition(0.25)
FIXED_PINNED = EndCondition(2.046)
FIXED_FIXED = EndCondition(4.0)


def second_moment_square_tube(spec: BeamSpec) -> float:
    """Second moment of area of the thin-walled square tube (m^4).

    I = (a^4 - (a - 2t)^4) / 12, about a centroidal axis parallel to a side.
    """
    a, t = spec.side_a, spec.wall_t
    if t >= a / 2:
        raise ValueError(f"degenerate tube: wall_t={t} >= side_a/2={a / 2}")
    return (a**4 - (a - 2.0 * t) ** 4) / 12.0


def second_moment_flat_strip(width: float, t: float) -> float:
    """Second moment of a flat strip about its weak axis: w t^3 / 12 (m^4)."""
    if width <= 0 or t <= 0:
        raise ValueError(f"strip dimensions must be positive, got width={width}, t={t}")
    return width * t**3 / 12.0


def euler_buckling_load(spec: BeamSpec, end: EndCondition, l: float) -> float:
    """Critical axial buckling load C pi^2 EI / l^2 (N)."""
    if l <= 0:
        raise ValueError(f"length must be positive, got {l}")
    return end.c_factor * math.pi**2 * spec.flexural_rigidity / l**2


def bending_stiffness(spec: BeamSpec, l: float, deployed: bool = True) -> float:
    """Cantilever end-load stiffness 3 EI / l^3 (N/m).

    The stowed (flat strip) value is the deployed value divided by the
    measured stiffness-change ratio, compared at the same length.
    """
    if l <= 0:
        raise ValueError(f"length must be positive, got {l}")
    k = 3.0 * spec.flexural_rigidity / l**3
    if deployed:
        return k
    return k / spec.stowed_ratio


def bending_stiffness_at_angle(
    spec: BeamSpec, l: float, angle_rad: float, deployed: bool = True
) -> float:
    """Bending stiffness for a load applied at any roll angle about the beam axis.

    The zipped beam is modeled as isotropic in bending, so the angle does not
    enter the result; the parameter exists so callers can express orientation
    sweeps.
    """
    del angle_rad
    return bending_stiffness(spec, l, deployed)


def torsional_stiffness_scaled(spec: BeamSpec, l: float, k_ref: float) -> float:
    """Torsional stiffness from a reference product K_tau * l (N m / rad).

    Only the inverse-length scaling is modeled; no absolute torsion constant
    is claimed for the zipped section.
    """
    del spec
    if l <= 0:
        raise ValueError(f"length must be positive, got {l}")
    if k_ref <= 0:
        raise ValueError(f"k_ref must be positive, got {k_ref}")
    return k_ref / l


def short_length_knockdown(ideal: float, measured: float) -> float:
    """Measured-to-ideal strength ratio, clamped to [0, 1].

    A measured value above the ideal prediction is physically suspect; it is
    clamped to 1 and reported via a warning rather than an error.
    """
    if ideal <= 0:
        raise ValueError(f"ideal load must be positive, got {ideal}")
    if measured < 0:
        raise ValueError(f"measured load must be nonnegative, got {measured}")
    ratio = measured / ideal
    if ratio > 1.0:
        warnings.warn(
            f"measured load {measured} exceeds ideal {ideal}; knockdown clamped to 1",
            stacklevel=2,
        )
        return 1.0
    return ratio


@dataclass(frozen=True)
class LengthKnockdown:
    """Piecewise-linear (in log length) knockdown factor between two anchors.

    Below ``l_short`` the factor is held at ``k_short``; above ``l_long`` it
    is held at 1.  Only two trustworthy measurement points exist, so nothing
    fancier is justified.
    """

    l_short: float = 0.03
    k_short: float = 0.28153698979591835
    l_long: float = 0.28

    def __post_init__(self) -> None:
        if not 0 < self.l_short < self.l_long:
            raise ValueError("need 0 < l_short < l_long")
        if not 0 < self.k_short <= 1:
            raise ValueError(f"k_short must lie in (0, 1], got {self.k_short}")

    def factor(self, l: float) -> float:
        if l <= self.l_short:
            return self.k_short
        if l >= self.l_long:
            return 1.0
        s = (math.log(l) - math.log(self.l_short)) / (
            math.log(self.l_long) - math.log(self.l_short)
        )
        return self.k_short + (1.0 - self.k_short) * s
