import math

import numpy as np
import pytest

from orbitinspect.attitude import (
    AttitudeState,
    DynamicMode,
    InertiaDiag,
    attitude_in_hill,
    euler_derivative,
    hill_from_eci,
    momentum_magnitude,
    propagate_attitude,
    quat_angle_between,
    quat_derivative,
    quat_from_axis_angle,
    quat_multiply,
    quat_rotate,
    rotational_energy,
    step_attitude,
)
from orbitinspect.orbital import OrbitParams

PARAMS = OrbitParams()
INERTIA = InertiaDiag()  # 100 / 50 / 70 defaults
IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])

ALL_MODES = list(DynamicMode)


class TestInertia:
    def test_defaults(self):
        assert (INERTIA.ixx, INERTIA.iyy, INERTIA.izz) == (100.0, 50.0, 70.0)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            InertiaDiag(0.0, 1.0, 1.0)

    def test_rejects_nonphysical(self):
        with pytest.raises(ValueError):
            InertiaDiag(10.0, 1.0, 1.0)


class TestEulerDerivative:
    @pytest.mark.parametrize("axis", [0, 1, 2])
    def test_principal_axis_spin_is_equilibrium(self, axis):
        omega = np.zeros(3)
        omega[axis] = 0.3
        assert np.all(euler_derivative(omega, INERTIA) == 0.0)

    def test_reference_values(self):
        # (Iyy - Izz)/Ixx * wy * wz = (50 - 70)/100 = -0.2 with wy = wz = 1
        d = euler_derivative([0.0, 1.0, 1.0], INERTIA)
        np.testing.assert_allclose(d, [-0.2, 0.0, 0.0], atol=0.0)

    def test_even_under_sign_flip(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            w = rng.normal(size=3)
            np.testing.assert_array_equal(euler_derivative(w, INERTIA),
                                          euler_derivative(-w, INERTIA))


class TestQuatDerivative:
    def test_zero_rate(self):
        assert np.all(quat_derivative(IDENTITY, np.zeros(3)) == 0.0)

    def test_identity_spin_z(self):
        c = 0.12
        np.testing.assert_allclose(quat_derivative(IDENTITY, [0, 0, c]),
                                   [0.0, 0.0, 0.0, c / 2.0], atol=0.0)

    def test_norm_preserving_direction(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            q = rng.normal(size=4)
            q /= np.linalg.norm(q)
            w = rng.normal(size=3)
            assert abs(float(q @ quat_derivative(q, w))) < 1e-15


class TestStepAttitude:
    def test_principal_axis_rotation_angle(self):
        c = 0.097
        state = AttitudeState(IDENTITY, [0.0, 0.0, c])
        t = 0.0
        for _ in range(50):
            state = step_attitude(state, 1.0, INERTIA)
            t += 1.0
            expected = quat_from_axis_angle([0, 0, 1], c * t)
            assert quat_angle_between(state.q_bf_eci, expected) < 1e-9
            np.testing.assert_allclose(state.omega_bf, [0, 0, c], atol=1e-15)

    @pytest.mark.parametrize("mode", ALL_MODES)
    def test_conservation_one_orbit(self, mode):
        state = AttitudeState.from_mode(mode, PARAMS)
        e0 = rotational_energy(state.omega_bf, INERTIA)
        h0 = momentum_magnitude(state.omega_bf, INERTIA)
        for _ in range(int(round(PARAMS.period))):
            state = step_attitude(state, 1.0, INERTIA)
        assert abs(np.linalg.norm(state.q_bf_eci) - 1.0) < 1e-9
        if e0 > 0:
            assert abs(rotational_energy(state.omega_bf, INERTIA) - e0) / e0 < 1e-8
            assert abs(momentum_magnitude(state.omega_bf, INERTIA) - h0) / h0 < 1e-8

    def test_quaternion_norm_after_every_step(self):
        state = AttitudeState.from_mode(DynamicMode.CHAOTIC_TUMBLE, PARAMS)
        for _ in range(500):
            state = step_attitude(state, 3.0, INERTIA)
            assert abs(np.linalg.norm(state.q_bf_eci) - 1.0) < 1e-9

    def test_fourth_order_convergence(self):
        # Single-substep endpoint error vs an over-resolved reference should
        # shrink ~16x when dt halves.
        state0 = AttitudeState.from_mode(DynamicMode.STABLE_TUMBLE, PARAMS)
        horizon = 64.0

        def endpoint(dt, substeps_per_call=1):
            s = state0.copy()
            for _ in range(int(horizon / dt)):
                s = step_attitude(s, dt, INERTIA, substeps=substeps_per_call)
            return s

        ref = endpoint(0.25)
        errs = []
        for dt in (8.0, 4.0, 2.0):
            s = endpoint(dt)
            errs.append(quat_angle_between(s.q_bf_eci, ref.q_bf_eci)
                        + np.linalg.norm(s.omega_bf - ref.omega_bf))
        assert errs[0] / errs[1] > 10.0
        assert errs[1] / errs[2] > 10.0

    def test_matches_reference_rk4_built_on_public_derivatives(self):
        # The fused scalar stage must agree with an RK4 assembled from
        # quat_derivative / euler_derivative.
        state = AttitudeState(quat_from_axis_angle([1, 2, -1], 0.7), [0.02, -0.05, 0.04])
        dt = 0.5

        def f(y):
            return np.concatenate([quat_derivative(y[:4], y[4:]),
                                   euler_derivative(y[4:], INERTIA)])

        y = np.concatenate([state.q_bf_eci, state.omega_bf])
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1)
        k3 = f(y + 0.5 * dt * k2)
        k4 = f(y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        y[:4] /= np.linalg.norm(y[:4])

        stepped = step_attitude(state, dt, INERTIA, substeps=1)
        np.testing.assert_allclose(stepped.q_bf_eci, y[:4], atol=1e-15)
        np.testing.assert_allclose(stepped.omega_bf, y[4:], atol=1e-15)

    def test_deterministic(self):
        s = AttitudeState.from_mode(DynamicMode.CHAOTIC_TUMBLE, PARAMS)
        a = step_attitude(s, 10.0, INERTIA)
        b = step_attitude(s, 10.0, INERTIA)
        assert np.array_equal(a.q_bf_eci, b.q_bf_eci)
        assert np.array_equal(a.omega_bf, b.omega_bf)


class TestPropagateAttitude:
    def test_zero_duration_copy(self):
        s = AttitudeState.from_mode(DynamicMode.SINGLE_AXIS, PARAMS)
        out = propagate_attitude(s, 0.0, INERTIA)
        assert np.array_equal(out.q_bf_eci, s.q_bf_eci)
        assert out is not s

    def test_analytic_path_matches_rk4(self):
        s = AttitudeState.from_mode(DynamicMode.SINGLE_AXIS, PARAMS)
        fast = propagate_attitude(s, 500.0, INERTIA)
        slow = s.copy()
        for _ in range(500):
            slow = step_attitude(slow, 1.0, INERTIA)
        assert quat_angle_between(fast.q_bf_eci, slow.q_bf_eci) < 1e-8
        np.testing.assert_allclose(fast.omega_bf, slow.omega_bf, atol=1e-12)

    def test_tumble_uses_rk4_and_conserves(self):
        s = AttitudeState.from_mode(DynamicMode.STABLE_TUMBLE, PARAMS)
        e0 = rotational_energy(s.omega_bf, INERTIA)
        out = propagate_attitude(s, 2500.0, INERTIA)
        assert abs(rotational_energy(out.omega_bf, INERTIA) - e0) / e0 < 1e-8


class TestModePresets:
    def test_preset_rates(self):
        n = PARAMS.mean_motion
        np.testing.assert_array_equal(
            DynamicMode.STATIC_HILL.initial_body_rate(PARAMS), [0, 0, n])
        np.testing.assert_array_equal(
            DynamicMode.STATIC_ECI.initial_body_rate(PARAMS), [0, 0, 0])
        np.testing.assert_array_equal(
            DynamicMode.SINGLE_AXIS.initial_body_rate(PARAMS), [0, 0, 0.097])
        np.testing.assert_array_equal(
            DynamicMode.STABLE_TUMBLE.initial_body_rate(PARAMS), [0.0097, 0.097, 0])
        np.testing.assert_array_equal(
            DynamicMode.CHAOTIC_TUMBLE.initial_body_rate(PARAMS), [0.0097, 0, 0.097])


class TestHillFrame:
    def test_identity_at_zero(self):
        np.testing.assert_array_equal(hill_from_eci(0.0, PARAMS), IDENTITY)

    def test_full_revolution_is_identity_rotation(self):
        q = hill_from_eci(PARAMS.period, PARAMS)
        assert quat_angle_between(q, IDENTITY) < 1e-9

    def test_quarter_period_is_90_degrees(self):
        q = hill_from_eci(PARAMS.period / 4.0, PARAMS)
        assert quat_angle_between(q, IDENTITY) == pytest.approx(math.pi / 2, abs=1e-9)
        # Hill x at quarter period points along ECI y; its Hill coordinates
        # must come back as x.
        np.testing.assert_allclose(quat_rotate(q, [0.0, 1.0, 0.0]), [1.0, 0.0, 0.0],
                                   atol=1e-12)


class TestAttitudeInHill:
    def test_static_hill_is_static(self):
        state = AttitudeState.from_mode(DynamicMode.STATIC_HILL, PARAMS)
        for t in np.linspace(0.0, PARAMS.period, 25):
            s_t = propagate_attitude(state, float(t), INERTIA)
            q_bh, w_h = attitude_in_hill(s_t, float(t), PARAMS)
            assert quat_angle_between(q_bh, IDENTITY) < 1e-6
            assert np.linalg.norm(w_h) < 1e-9

    def test_static_eci_rotates_at_minus_n(self):
        state = AttitudeState.from_mode(DynamicMode.STATIC_ECI, PARAMS)
        n = PARAMS.mean_motion
        for t in (100.0, 1500.0, 4000.0):
            s_t = propagate_attitude(state, t, INERTIA)
            q_bh, w_h = attitude_in_hill(s_t, t, PARAMS)
            expected = quat_from_axis_angle([0, 0, 1], -n * t)
            assert quat_angle_between(q_bh, expected) < 1e-9
            np.testing.assert_allclose(w_h, [0, 0, -n], atol=1e-12)

    def test_time_zero_reduces_to_initial(self):
        q0 = quat_from_axis_angle([1, 1, 0], 0.4)
        state = AttitudeState(q0, [0.01, 0.0, 0.02])
        q_bh, _ = attitude_in_hill(state, 0.0, PARAMS)
        assert quat_angle_between(q_bh, q0) < 1e-12

    def test_omega_hill_composition(self):
        # omega_hill is the body rate rotated into Hill axes minus (0, 0, n).
        q0 = quat_from_axis_angle([0, 1, 0], 0.3)
        w = np.array([0.01, -0.02, 0.03])
        state = AttitudeState(q0, w)
        t = 777.0
        q_eh = hill_from_eci(t, PARAMS)
        expected = quat_rotate(q_eh, quat_rotate(q0, w)) - [0, 0, PARAMS.mean_motion]
        _, w_h = attitude_in_hill(state, t, PARAMS)
        np.testing.assert_allclose(w_h, expected, atol=1e-15)


class TestQuaternionAlgebra:
    def test_multiply_identity(self):
        q = quat_from_axis_angle([3, -1, 2], 1.1)
        np.testing.assert_allclose(quat_multiply(IDENTITY, q), q, atol=0.0)
        np.testing.assert_allclose(quat_multiply(q, IDENTITY), q, atol=0.0)

    def test_rotate_matches_composition(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            q1 = quat_from_axis_angle(rng.normal(size=3), rng.uniform(0, math.pi))
            q2 = quat_from_axis_angle(rng.normal(size=3), rng.uniform(0, math.pi))
            v = rng.normal(size=3)
            np.testing.assert_allclose(
                quat_rotate(quat_multiply(q1, q2), v),
                quat_rotate(q1, quat_rotate(q2, v)),
                atol=1e-12,
            )
