import math

import numpy as np
import pytest
from scipy.linalg import expm

from orbitinspect.orbital import (
    D_MIN,
    HillState,
    OrbitParams,
    SingularTransfer,
    ThrustCommand,
    TransferSpec,
    check_tof_singularity,
    cwh_derivative,
    cwh_stm,
    cwh_system_matrices,
    cwh_thrust_matrix,
    nmt_final_velocity,
    nmt_initial_velocity,
    propagate,
    transfer_delta_v,
    transfer_tof,
)

PARAMS = OrbitParams()  # n = 0.001027, unit mass


def zero_state():
    return HillState(np.zeros(3), np.zeros(3))


class TestDerivative:
    def test_origin_at_rest_is_equilibrium(self):
        d = cwh_derivative(zero_state(), ThrustCommand.zero(), PARAMS)
        assert np.all(d == 0.0)

    def test_radial_offset_acceleration(self):
        s = HillState([1.0, 0.0, 0.0], np.zeros(3))
        d = cwh_derivative(s, ThrustCommand.zero(), PARAMS)
        n = PARAMS.mean_motion
        np.testing.assert_allclose(d[3:], [3 * n * n, 0.0, 0.0], atol=0.0)

    def test_cross_track_offset_acceleration(self):
        s = HillState([0.0, 0.0, 1.0], np.zeros(3))
        d = cwh_derivative(s, ThrustCommand.zero(), PARAMS)
        n = PARAMS.mean_motion
        np.testing.assert_allclose(d[3:], [0.0, 0.0, -n * n], atol=0.0)

    def test_matches_system_matrices(self):
        rng = np.random.default_rng(1)
        A, B = cwh_system_matrices(PARAMS)
        for _ in range(20):
            vec = rng.normal(size=6)
            u = rng.normal(size=3)
            s = HillState.from_vector(vec)
            d = cwh_derivative(s, ThrustCommand(u), PARAMS)
            np.testing.assert_allclose(d, A @ vec + B @ u, rtol=1e-14, atol=1e-18)


class TestPropagation:
    def test_equilibrium_unchanged(self):
        s = propagate(zero_state(), ThrustCommand.zero(), 123.4, PARAMS)
        assert np.all(s.as_vector() == 0.0)

    @pytest.mark.parametrize("dt", [1.0, 60.0, 3059.0])
    def test_stm_matches_matrix_exponential(self, dt):
        # Independent oracle: expm of the augmented [A B; 0 0] generator.
        A, B = cwh_system_matrices(PARAMS)
        M = np.zeros((9, 9))
        M[:6, :6] = A
        M[:6, 6:] = B
        E = expm(M * dt)
        np.testing.assert_allclose(cwh_stm(PARAMS, dt), E[:6, :6], rtol=1e-9, atol=1e-10)
        np.testing.assert_allclose(cwh_thrust_matrix(PARAMS, dt), E[:6, 6:], rtol=1e-7, atol=2e-8)

    def test_semigroup_property(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            s0 = HillState(rng.normal(scale=100, size=3), rng.normal(scale=0.1, size=3))
            dt1, dt2 = rng.uniform(1, 2000, size=2)
            a = propagate(propagate(s0, ThrustCommand.zero(), dt1, PARAMS),
                          ThrustCommand.zero(), dt2, PARAMS)
            b = propagate(s0, ThrustCommand.zero(), dt1 + dt2, PARAMS)
            np.testing.assert_allclose(a.as_vector(), b.as_vector(), rtol=1e-9, atol=1e-9)

    def test_z_channel_closed_form(self):
        n = PARAMS.mean_motion
        z0 = 37.0
        s0 = HillState([0, 0, z0], np.zeros(3))
        for t in (10.0, 500.0, 2000.0, 6000.0):
            s = propagate(s0, ThrustCommand.zero(), t, PARAMS)
            assert s.position[2] == pytest.approx(z0 * math.cos(n * t), rel=1e-9)
            assert s.velocity[2] == pytest.approx(-z0 * n * math.sin(n * t), rel=1e-9, abs=1e-15)

    def test_z_channel_harmonic_energy_conserved(self):
        # Only the decoupled cross-track channel carries a conserved
        # oscillator energy; the in-plane channels do not.
        n = PARAMS.mean_motion
        s = HillState([0, 0, 50.0], [0, 0, 0.02])
        e0 = 0.5 * s.velocity[2] ** 2 + 0.5 * n * n * s.position[2] ** 2
        for _ in range(20):
            s = propagate(s, ThrustCommand.zero(), 321.0, PARAMS)
            e = 0.5 * s.velocity[2] ** 2 + 0.5 * n * n * s.position[2] ** 2
            assert e == pytest.approx(e0, rel=1e-9)

    def test_deterministic(self):
        s0 = HillState([10, -20, 30], [0.1, 0.0, -0.2])
        u = ThrustCommand([0.5, -0.1, 0.2])
        a = propagate(s0, u, 77.0, PARAMS).as_vector()
        b = propagate(s0, u, 77.0, PARAMS).as_vector()
        assert np.array_equal(a, b)

    def test_constant_thrust_changes_state(self):
        s = propagate(zero_state(), ThrustCommand([1.0, 0, 0]), 10.0, PARAMS)
        assert s.position[0] == pytest.approx(50.0, rel=1e-3)  # ~ a t^2 / 2 at unit mass


def random_transfer(rng, radius=200.0, min_angle=0.1, max_angle=math.pi - 1e-3):
    while True:
        u1 = rng.normal(size=3)
        u1 /= np.linalg.norm(u1)
        u2 = rng.normal(size=3)
        u2 /= np.linalg.norm(u2)
        ang = math.acos(np.clip(u1 @ u2, -1, 1))
        if min_angle < ang < max_angle:
            return radius * u1, radius * u2, ang / PARAMS.mean_motion


class TestNmtTargeting:
    def test_full_period_parking_is_singular(self):
        start = np.array([200.0, 0.0, 0.0])
        spec = TransferSpec(start, start, PARAMS.period)
        assert not check_tof_singularity(spec, PARAMS)
        with pytest.raises(SingularTransfer):
            nmt_initial_velocity(spec, PARAMS)

    def test_half_period_z_channel_singular(self):
        spec = TransferSpec([200, 0, 0], [0, 200, 0], math.pi / PARAMS.mean_motion)
        check = check_tof_singularity(spec, PARAMS)
        assert not check.ok
        assert abs(check.s_value) < 1e-9

    def test_quarter_period_passes_guard(self):
        spec = TransferSpec([200, 0, 0], [0, 200, 0], 0.5 * math.pi / PARAMS.mean_motion)
        check = check_tof_singularity(spec, PARAMS)
        assert check.ok
        # D = 8 - 3*(pi/2)*1 - 0 at nT = pi/2
        assert check.d_value == pytest.approx(8.0 - 1.5 * math.pi, rel=1e-12)
        assert check.d_value > D_MIN

    def test_round_trip_against_propagation(self):
        # Oracle: exact zero-thrust propagation of the solved velocity.
        rng = np.random.default_rng(3)
        for _ in range(200):
            start, end, tof = random_transfer(rng)
            spec = TransferSpec(start, end, tof)
            v0 = nmt_initial_velocity(spec, PARAMS)
            arrived = propagate(HillState(start, v0), ThrustCommand.zero(), tof, PARAMS)
            assert np.linalg.norm(arrived.position - end) < 1e-6
            vf = nmt_final_velocity(spec, PARAMS)
            assert np.linalg.norm(arrived.velocity - vf) < 1e-6

    def test_pure_z_quarter_period_row(self):
        # nT = pi/2 makes C = 0, S = 1: the cross-track row collapses to
        # zdot_0 = n * z_f independent of z_0.
        n = PARAMS.mean_motion
        tof = 0.5 * math.pi / n
        for z0, zf in [(0.0, 120.0), (50.0, -80.0)]:
            spec = TransferSpec([0, 0, z0], [0, 0, zf], tof)
            v0 = nmt_initial_velocity(spec, PARAMS)
            assert v0[2] == pytest.approx(n * zf, rel=1e-12, abs=1e-15)
            arrived = propagate(HillState(spec.start, v0), ThrustCommand.zero(), tof, PARAMS)
            assert arrived.position[2] == pytest.approx(zf, rel=1e-9, abs=1e-9)

    def test_parking_arc_finite_and_consistent(self):
        start = np.array([0.0, 200.0, 0.0])
        spec = TransferSpec(start, start, 400.0)
        v0 = nmt_initial_velocity(spec, PARAMS)
        assert np.isfinite(v0).all()
        arrived = propagate(HillState(start, v0), ThrustCommand.zero(), 400.0, PARAMS)
        assert np.linalg.norm(arrived.position - start) < 1e-6
        np.testing.assert_allclose(arrived.velocity, nmt_final_velocity(spec, PARAMS),
                                   rtol=1e-9, atol=1e-12)

    def test_z_channel_time_reversal_symmetry(self):
        # The cross-track oscillator is time-reversible: the arrival speed of
        # a transfer matches the departure speed of the reversed transfer.
        tof = 700.0
        fwd = TransferSpec([0, 0, 30.0], [0, 0, -90.0], tof)
        rev = TransferSpec([0, 0, -90.0], [0, 0, 30.0], tof)
        vf = nmt_final_velocity(fwd, PARAMS)
        v0r = nmt_initial_velocity(rev, PARAMS)
        assert abs(vf[2]) == pytest.approx(abs(v0r[2]), rel=1e-12)


class FakeLattice:
    def __init__(self, min_pairwise_angle):
        self.min_pairwise_angle = min_pairwise_angle


class TestTransferHeuristics:
    def test_antipodal_tof_is_half_period(self):
        lattice = FakeLattice(0.5)
        tof = transfer_tof([200.0, 0, 0], [-200.0, 0, 0], lattice, PARAMS)
        assert tof == pytest.approx(6117.99 / 2.0, abs=0.01)

    def test_orthogonal_is_half_antipodal(self):
        lattice = FakeLattice(0.5)
        anti = transfer_tof([200.0, 0, 0], [-200.0, 0, 0], lattice, PARAMS)
        orth = transfer_tof([200.0, 0, 0], [0, 200.0, 0], lattice, PARAMS)
        assert orth == pytest.approx(anti / 2.0, rel=1e-12)

    def test_parking_is_half_nearest_neighbor(self):
        lattice = FakeLattice(0.42)
        v = np.array([0.0, 0.0, 200.0])
        assert transfer_tof(v, v, lattice, PARAMS) == pytest.approx(
            0.5 * 0.42 / PARAMS.mean_motion, rel=1e-12)

    def test_tof_symmetric(self):
        rng = np.random.default_rng(4)
        lattice = FakeLattice(0.5)
        for _ in range(50):
            a, b, _ = random_transfer(rng)
            assert transfer_tof(a, b, lattice, PARAMS) == pytest.approx(
                transfer_tof(b, a, lattice, PARAMS), rel=1e-12)

    def test_delta_v_zero_when_matched(self):
        lattice = FakeLattice(0.5)
        v1 = np.array([200.0, 0, 0])
        v2 = np.array([0, 200.0, 0])
        tof = transfer_tof(v1, v2, lattice, PARAMS)
        v0 = nmt_initial_velocity(TransferSpec(v1, v2, tof), PARAMS)
        assert transfer_delta_v(v1, v2, v0, lattice, PARAMS) == 0.0

    def test_delta_v_from_rest_is_v0_norm(self):
        lattice = FakeLattice(0.5)
        v1 = np.array([200.0, 0, 0])
        v2 = np.array([0, 0, 200.0])
        tof = transfer_tof(v1, v2, lattice, PARAMS)
        v0 = nmt_initial_velocity(TransferSpec(v1, v2, tof), PARAMS)
        assert transfer_delta_v(v1, v2, np.zeros(3), lattice, PARAMS) == pytest.approx(
            float(np.linalg.norm(v0)), rel=1e-12)

    def test_delta_v_triangle_bound(self):
        rng = np.random.default_rng(5)
        lattice = FakeLattice(0.5)
        for _ in range(50):
            a, b, _ = random_transfer(rng)
            w = rng.normal(scale=0.3, size=3)
            lhs = transfer_delta_v(a, b, w, lattice, PARAMS)
            rhs = transfer_delta_v(a, b, np.zeros(3), lattice, PARAMS) + np.linalg.norm(w)
            assert lhs <= rhs + 1e-12
