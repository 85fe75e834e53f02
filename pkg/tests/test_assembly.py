import math

import numpy as np
import pytest

from zipfold.actuator import ActuatorState, ModuleSpec
from zipfold.assembly import (
    AirborneError,
    ArmConfig,
    BodyPose,
    ChassisSpec,
    LegState,
    RobotAssembly,
    center_of_mass_body,
    forward_kinematics,
    leg_load_distribution,
    max_reach,
    pose_from_rotation,
    standing_height,
)
from zipfold.calibration import default_calibration
from oracles import three_contact_loads_oracle

CAL_MODULE = default_calibration().module


def make_legs(extensions, tilts=(0, 0, 0, 0), contacts=(True, True, True, True)):
    return [
        LegState(module=ActuatorState(extension_l=e), tilt_deg=t, in_contact=c)
        for e, t, c in zip(extensions, tilts, contacts)
    ]


def centered_chassis() -> ChassisSpec:
    return ChassisSpec(com_offset=(0.0, 0.0, 0.0))


def grounded_pose(chassis, legs) -> BodyPose:
    # level pose with the feet resting on the ground plane
    drop = max(chassis.leg_offset + leg.module.extension_l for leg in legs)
    return BodyPose(position=(0.0, 0.0, drop))


class TestChassisSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            ChassisSpec(mount_points=((0, 0, 0),) * 3)
        with pytest.raises(ValueError):
            ChassisSpec(mount_points=((0, 0, 0), (0, 0, 0), (0, 0, 0), (0, 0, 0)))
        with pytest.raises(ValueError):
            ChassisSpec(chassis_mass=-1.0)

    def test_mass_bookkeeping_hits_robot_anchor(self):
        assembly = RobotAssembly(modules=tuple(CAL_MODULE for _ in range(4)))
        assert assembly.total_mass() == pytest.approx(0.270, rel=0.05)


class TestForwardKinematics:
    def test_compact_standing_height_exact(self):
        chassis = ChassisSpec()
        legs = make_legs([0.0] * 4)
        pose = grounded_pose(chassis, legs)
        feet = forward_kinematics(chassis, legs, pose)
        assert np.allclose(feet[:, 2], 0.0, atol=1e-12)
        assert standing_height(chassis, pose) == pytest.approx(0.11, abs=1e-12)

    def test_expanded_standing_height(self):
        chassis = ChassisSpec()
        legs = make_legs([0.21] * 4)
        pose = grounded_pose(chassis, legs)
        assert standing_height(chassis, pose) == pytest.approx(0.32, rel=0.05)

    def test_tilt_swings_foot_forward(self):
        chassis = ChassisSpec()
        legs = make_legs([0.1] * 4, tilts=(15, 0, 0, 0))
        pose = grounded_pose(chassis, legs)
        feet = forward_kinematics(chassis, legs, pose)
        length = chassis.leg_offset + 0.1
        assert feet[0, 0] - chassis.mount_points[0][0] == pytest.approx(
            length * math.sin(math.radians(15))
        )
        assert feet[0, 2] > feet[1, 2]  # tilted leg is effectively shorter

    def test_tilt_range_enforced(self):
        chassis = ChassisSpec()
        legs = make_legs([0.1] * 4, tilts=(50, 0, 0, 0))
        with pytest.raises(ValueError):
            forward_kinematics(chassis, legs, BodyPose())

    def test_symmetric_legs_center_com_laterally(self):
        assembly = RobotAssembly(chassis=centered_chassis())
        legs = make_legs([0.1] * 4)
        com, mass = center_of_mass_body(assembly, legs)
        assert com[0] == pytest.approx(0.0, abs=1e-15)
        assert com[1] == pytest.approx(0.0, abs=1e-15)
        assert mass == pytest.approx(assembly.total_mass())

    def test_continuity_under_small_perturbation(self):
        chassis = ChassisSpec()
        legs_a = make_legs([0.1] * 4, tilts=(5, 0, 0, 0))
        legs_b = make_legs([0.1 + 1e-6] * 4, tilts=(5 + 1e-6, 0, 0, 0))
        pose = grounded_pose(chassis, legs_a)
        fa = forward_kinematics(chassis, legs_a, pose)
        fb = forward_kinematics(chassis, legs_b, pose)
        assert np.abs(fa - fb).max() < 1e-5

    def test_pose_rotation_round_trip(self):
        pose = BodyPose(position=(0.3, -0.1, 0.2), roll=0.1, pitch=-0.2, yaw=0.5)
        rebuilt = pose_from_rotation(pose.rotation(), np.asarray(pose.position))
        assert rebuilt.roll == pytest.approx(pose.roll)
        assert rebuilt.pitch == pytest.approx(pose.pitch)
        assert rebuilt.yaw == pytest.approx(pose.yaw)


class TestMaxReach:
    def test_default_hits_anchor(self):
        assert max_reach(ChassisSpec(), CAL_MODULE) == pytest.approx(0.55, rel=0.10)

    def test_zero_arm_equals_expanded_height(self):
        reach = max_reach(ChassisSpec(), CAL_MODULE, arm_extension=0.0)
        assert reach == pytest.approx(0.32)

    def test_upper_bound_from_kinematic_chain(self):
        reach = max_reach(
            ChassisSpec(), CAL_MODULE, arm=ArmConfig(tilt_from_vertical_deg=0.0)
        )
        assert reach <= 0.32 + 0.28 + 1e-9


class TestLegLoadDistribution:
    def test_four_symmetric_contacts_share_weight(self):
        assembly = RobotAssembly(chassis=centered_chassis(), modules=tuple(CAL_MODULE for _ in range(4)))
        legs = make_legs([0.1] * 4)
        pose = grounded_pose(assembly.chassis, legs)
        loads = leg_load_distribution(assembly, legs, pose)
        expected = assembly.total_mass() * 9.81 / 4
        assert np.allclose(loads, expected, rtol=1e-9)
        assert expected == pytest.approx(0.662, abs=0.01)

    @staticmethod
    def _chassis_with_com_at(target_xy, legs):
        """Chassis whose total CoM (all other mass is xy-symmetric) sits at target."""
        base = RobotAssembly(chassis=centered_chassis())
        total = base.total_mass()
        scale = total / base.chassis.chassis_mass
        return ChassisSpec(com_offset=(target_xy[0] * scale, target_xy[1] * scale, 0.0))

    def test_three_contacts_with_com_at_centroid(self):
        legs = make_legs([0.1] * 4, contacts=(True, True, True, False))
        chassis = centered_chassis()
        pose = grounded_pose(chassis, legs)
        feet = forward_kinematics(chassis, legs, pose)
        centroid = feet[:3, :2].mean(axis=0)
        assembly = RobotAssembly(chassis=self._chassis_with_com_at(centroid, legs))
        com, mass = center_of_mass_body(assembly, legs)
        assert np.allclose(com[:2], centroid, atol=1e-12)
        loads = leg_load_distribution(assembly, legs, pose)
        assert np.allclose(loads[:3], mass * 9.81 / 3, rtol=1e-9)
        assert loads[3] == 0.0

    def test_com_over_one_foot_carries_all(self):
        legs = make_legs([0.1] * 4, contacts=(True, True, True, False))
        chassis = centered_chassis()
        pose = grounded_pose(chassis, legs)
        feet = forward_kinematics(chassis, legs, pose)
        assembly = RobotAssembly(chassis=self._chassis_with_com_at(feet[0, :2], legs))
        com, mass = center_of_mass_body(assembly, legs)
        loads = leg_load_distribution(assembly, legs, pose)
        oracle = three_contact_loads_oracle(feet[:3, :2], com[:2], mass * 9.81)
        assert np.allclose(loads[:3], oracle, atol=1e-9)
        assert loads[0] == pytest.approx(mass * 9.81, rel=1e-9)
        assert abs(loads[1]) < 1e-9 and abs(loads[2]) < 1e-9

    def test_airborne_raises(self):
        assembly = RobotAssembly()
        legs = make_legs([0.1] * 4, contacts=(False,) * 4)
        with pytest.raises(AirborneError):
            leg_load_distribution(assembly, legs, BodyPose(position=(0, 0, 0.5)))

    def test_force_and_moment_balance_random_stances(self):
        rng = np.random.default_rng(7)
        assembly = RobotAssembly(modules=tuple(CAL_MODULE for _ in range(4)))
        failures = 0
        for _ in range(1000):
            n_contact = int(rng.integers(3, 5))
            contact_idx = rng.choice(4, size=n_contact, replace=False)
            contacts = [i in contact_idx for i in range(4)]
            exts = rng.uniform(0.02, 0.25, size=4)
            tilts = rng.uniform(-20, 20, size=4)
            legs = make_legs(exts, tilts=tilts, contacts=contacts)
            pose = BodyPose(
                position=(float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)), 0.3),
                roll=float(rng.uniform(-0.1, 0.1)),
                pitch=float(rng.uniform(-0.1, 0.1)),
                yaw=float(rng.uniform(-math.pi, math.pi)),
            )
            loads = leg_load_distribution(assembly, legs, pose)
            com, mass = center_of_mass_body(assembly, legs)
            com_w = pose.transform(com)
            feet = forward_kinematics(assembly.chassis, legs, pose)
            residual_f = abs(loads.sum() - mass * 9.81)
            mx = sum(loads[i] * (feet[i, 0] - com_w[0]) for i in range(4))
            my = sum(loads[i] * (feet[i, 1] - com_w[1]) for i in range(4))
            if residual_f > 1e-6 or abs(mx) > 1e-6 or abs(my) > 1e-6:
                failures += 1
        assert failures == 0
