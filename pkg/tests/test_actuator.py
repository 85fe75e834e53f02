import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zipfold.actuator import (
    ActuatorState,
    ModuleSpec,
    check_buckling,
    power_draw,
    step_extension,
)
from zipfold.calibration import default_calibration

CAL = default_calibration().module


class TestStepExtension:
    def test_full_duty_one_second_is_10mm(self):
        spec = ModuleSpec()
        state = ActuatorState()
        state = step_extension(spec, state, duty=1.0, dt=1.0)
        assert state.extension_l == pytest.approx(0.010, rel=1e-12)

    def test_zero_duty_is_identity_with_zero_current(self):
        spec = ModuleSpec()
        state = ActuatorState(extension_l=0.1, axial_load=3.0)
        out = step_extension(spec, state, duty=0.0, dt=0.5)
        assert out.extension_l == 0.1
        assert out.current == 0.0

    def test_unloaded_current_and_power(self):
        spec = ModuleSpec()
        state = step_extension(spec, ActuatorState(), duty=1.0, dt=0.01)
        assert state.current == pytest.approx(0.050)
        assert power_draw(spec, state) == pytest.approx(0.30, rel=1e-9)

    def test_supply_voltage_scales_rate(self):
        spec = ModuleSpec(supply_v=12.0)
        state = step_extension(spec, ActuatorState(), duty=1.0, dt=1.0)
        assert state.extension_l == pytest.approx(0.020)

    def test_clamping_reports_saturation_not_failure(self):
        spec = ModuleSpec(max_extension=0.05)
        state = ActuatorState(extension_l=0.0499)
        out = step_extension(spec, state, duty=1.0, dt=1.0)
        assert out.extension_l == 0.05
        assert out.saturated
        assert not out.failed
        low = step_extension(spec, ActuatorState(extension_l=0.0), duty=-1.0, dt=0.1)
        assert low.extension_l == 0.0
        assert low.saturated

    def test_failed_actuator_is_left_alone(self):
        spec = ModuleSpec()
        state = ActuatorState(extension_l=0.1, failed=True, failure_kind="buckled")
        out = step_extension(spec, state, duty=1.0, dt=1.0)
        assert out.extension_l == 0.1
        assert out.step_ignored
        revived = out.reset_failure()
        assert not revived.failed
        moved = step_extension(spec, revived, duty=1.0, dt=1.0)
        assert moved.extension_l > 0.1

    def test_rejects_bad_arguments(self):
        spec = ModuleSpec()
        with pytest.raises(ValueError):
            step_extension(spec, ActuatorState(), duty=1.0, dt=0.0)
        with pytest.raises(ValueError):
            step_extension(spec, ActuatorState(), duty=1.5, dt=0.1)

    def test_rate_bound_property(self):
        spec = ModuleSpec()
        for duty in (-1.0, -0.3, 0.2, 0.9):
            for dt in (0.01, 0.37, 2.0):
                state = ActuatorState(extension_l=0.1)
                out = step_extension(spec, state, duty=duty, dt=dt)
                assert abs(out.extension_l - 0.1) <= spec.rated_speed * dt + 1e-15

    @given(
        st.integers(min_value=0, max_value=2**20),
        st.integers(min_value=1, max_value=2**10),
        st.integers(min_value=1, max_value=8),
    )
    @settings(max_examples=200)
    def test_reversibility_on_dyadic_grid(self, l_ticks, d_ticks, dt_pow):
        # dyadic values make float add/subtract exact, so the reversibility
        # contract can be asserted with zero tolerance
        spec = ModuleSpec(max_extension=2.0, max_speed=1.0 / 1024)
        start = l_ticks / 2**22
        dt = 1.0 / 2**dt_pow
        duty = d_ticks / 2**10
        state = ActuatorState(extension_l=start)
        fwd = step_extension(spec, state, duty=duty, dt=dt)
        if fwd.saturated:
            return
        back = step_extension(spec, fwd, duty=-duty, dt=dt)
        if back.saturated:
            return
        assert back.extension_l == start

    def test_determinism(self):
        spec = ModuleSpec()
        def run():
            state = ActuatorState()
            trace = []
            for k in range(50):
                state = step_extension(spec, state, duty=math.sin(k) * 0.5, dt=0.01)
                trace.append(state.extension_l)
            return trace
        assert run() == run()


class TestCheckBuckling:
    def test_headroom_at_anchor_length(self):
        state = ActuatorState(extension_l=0.28, axial_load=6.0)
        report, out = check_buckling(CAL, state)
        assert report.limit == pytest.approx(12.0, rel=1e-6)
        assert report.headroom == pytest.approx(6.0, rel=1e-6)
        assert not out.failed

    def test_overload_latches_buckled(self):
        state = ActuatorState(extension_l=0.28, axial_load=13.0)
        report, out = check_buckling(CAL, state)
        assert report.buckled
        assert out.failed and out.failure_kind == "buckled"
        # latched: stepping will not move it
        stuck = step_extension(CAL, out, duty=1.0, dt=1.0)
        assert stuck.extension_l == 0.28

    def test_stowed_limit_unbounded(self):
        state = ActuatorState(extension_l=0.0, axial_load=500.0)
        report, out = check_buckling(CAL, state)
        assert math.isinf(report.limit)
        assert not out.failed

    def test_headroom_monotone_decreasing_in_length(self):
        headrooms = []
        for l in (0.05, 0.1, 0.15, 0.2, 0.25, 0.28):
            report, _ = check_buckling(CAL, ActuatorState(extension_l=l, axial_load=2.0))
            headrooms.append(report.headroom)
        assert headrooms == sorted(headrooms, reverse=True)

    def test_short_length_knockdown_applied(self):
        report, _ = check_buckling(CAL, ActuatorState(extension_l=0.03))
        assert report.limit == pytest.approx(294.3, rel=0.01)


class TestPower:
    def test_power_nonnegative_and_monotone_in_load(self):
        spec = CAL
        powers = []
        for load in (0.0, 0.5, 1.0, 5.0):
            state = step_extension(spec, ActuatorState(axial_load=load), duty=1.0, dt=0.01)
            powers.append(power_draw(spec, state))
        assert all(p >= 0 for p in powers)
        assert powers == sorted(powers)

    def test_idle_module_draws_nothing(self):
        state = step_extension(CAL, ActuatorState(axial_load=2.0), duty=0.0, dt=0.01)
        assert power_draw(CAL, state) == 0.0

    def test_robot_level_anchor(self):
        # four modules each lifting a quarter of the 270 g robot total 2.2 W
        per_leg = 0.270 * 9.81 / 4
        total = 0.0
        for _ in range(4):
            state = step_extension(CAL, ActuatorState(axial_load=per_leg), duty=1.0, dt=0.01)
            total += power_draw(CAL, state)
        assert total == pytest.approx(2.2, rel=0.10)
