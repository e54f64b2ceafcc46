"""Translational relative motion in Hill's frame.

Linearized dynamics of an agent relative to a target on a circular orbit
(Clohessy-Wiltshire-Hill equations), closed-form propagation, natural motion
trajectory (NMT) transfer velocity solvers, and the time-of-flight / delta-v
heuristics used by high-level planning.

Conventions
-----------
Hill's frame: x radial (away from Earth), y along-track, z orbit-normal.
All state is SI internally: meters, m/s, seconds, newtons.  The orbital
radius is accepted in km at the configuration boundary only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "OrbitParams",
    "HillState",
    "ThrustCommand",
    "TransferSpec",
    "SingularTransfer",
    "SingularityCheck",
    "D_MIN",
    "S_MIN",
    "cwh_system_matrices",
    "cwh_derivative",
    "cwh_stm",
    "cwh_thrust_matrix",
    "propagate",
    "nmt_initial_velocity",
    "nmt_final_velocity",
    "check_tof_singularity",
    "transfer_tof",
    "transfer_delta_v",
]

# Guards on the 1/D and 1/sin(nT) denominators of the NMT targeting solution.
D_MIN = 1e-6
S_MIN = 1e-6


class SingularTransfer(ValueError):
    """Requested NMT transfer sits on (or too near) a targeting singularity."""


@dataclass(frozen=True)
class OrbitParams:
    """Circular-orbit parameters of the inspection target.

    Parameters
    ----------
    mean_motion : float
        Orbital angular rate n of the target, rad/s.
    orbital_radius_km : float
        Target orbital radius, km.  Informational; the dynamics only ever
        need the mean motion.
    agent_mass : float
        Inspecting-agent mass, kg.  Couples thrust force to acceleration.
    """

    mean_motion: float = 0.001027
    orbital_radius_km: float = 7357.0
    agent_mass: float = 1.0

    def __post_init__(self):
        if not self.mean_motion > 0:
            raise ValueError(f"mean_motion must be positive, got {self.mean_motion}")
        if not self.orbital_radius_km > 0:
            raise ValueError(f"orbital_radius_km must be positive, got {self.orbital_radius_km}")
        if not self.agent_mass > 0:
            raise ValueError(f"agent_mass must be positive, got {self.agent_mass}")

    @property
    def period(self) -> float:
        """Orbital period 2*pi/n, seconds."""
        return 2.0 * math.pi / self.mean_motion


@dataclass
class HillState:
    """Relative position/velocity of one agent in Hill's frame (m, m/s)."""

    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float).reshape(3)
        self.velocity = np.asarray(self.velocity, dtype=float).reshape(3)
        if not (np.isfinite(self.position).all() and np.isfinite(self.velocity).all()):
            raise ValueError("HillState components must be finite")

    def as_vector(self) -> np.ndarray:
        """Stacked [x, y, z, vx, vy, vz] state vector."""
        return np.concatenate([self.position, self.velocity])

    @classmethod
    def from_vector(cls, vec) -> "HillState":
        vec = np.asarray(vec, dtype=float).reshape(6)
        return cls(position=vec[:3].copy(), velocity=vec[3:].copy())

    def copy(self) -> "HillState":
        return HillState(self.position.copy(), self.velocity.copy())


@dataclass
class ThrustCommand:
    """Constant thrust force over one control interval, newtons, Hill frame."""

    force: np.ndarray

    def __post_init__(self):
        self.force = np.asarray(self.force, dtype=float).reshape(3)
        if not np.isfinite(self.force).all():
            raise ValueError("thrust force must be finite")

    @classmethod
    def zero(cls) -> "ThrustCommand":
        return cls(np.zeros(3))


@dataclass(frozen=True)
class TransferSpec:
    """A point-to-point NMT transfer: start and end positions plus TOF."""

    start: np.ndarray
    end: np.ndarray
    tof: float

    def __post_init__(self):
        object.__setattr__(self, "start", np.asarray(self.start, dtype=float).reshape(3))
        object.__setattr__(self, "end", np.asarray(self.end, dtype=float).reshape(3))
        if not self.tof > 0:
            raise ValueError(f"tof must be positive, got {self.tof}")


def cwh_system_matrices(params: OrbitParams) -> tuple[np.ndarray, np.ndarray]:
    """Continuous-time system matrices (A, B) of the linearized CWH dynamics.

    State ordering is [x, y, z, vx, vy, vz]; input is thrust force in newtons.
    """
    n = params.mean_motion
    m = params.agent_mass
    A = np.array(
        [
            [0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
            [3.0 * n * n, 0.0, 0.0, 0.0, 2.0 * n, 0.0],
            [0.0, 0.0, 0.0, -2.0 * n, 0.0, 0.0],
            [0.0, 0.0, -n * n, 0.0, 0.0, 0.0],
        ]
    )
    B = np.zeros((6, 3))
    B[3, 0] = B[4, 1] = B[5, 2] = 1.0 / m
    return A, B


def cwh_derivative(state: HillState, thrust: ThrustCommand, params: OrbitParams) -> np.ndarray:
    """Time derivative of the CWH state under the given thrust force."""
    n = params.mean_motion
    m = params.agent_mass
    x, _, z = state.position
    vx, vy, vz = state.velocity
    ux, uy, uz = thrust.force
    return np.array(
        [
            vx,
            vy,
            vz,
            3.0 * n * n * x + 2.0 * n * vy + ux / m,
            -2.0 * n * vx + uy / m,
            -n * n * z + uz / m,
        ]
    )


def cwh_stm(params: OrbitParams, dt: float) -> np.ndarray:
    """Closed-form state-transition matrix Phi(dt) of the CWH system.

    Exact for any step length; zero-thrust propagation through Phi is the
    analytic NMT solution rather than an integrator approximation.
    """
    n = params.mean_motion
    nt = n * dt
    s = math.sin(nt)
    c = math.cos(nt)
    return np.array(
        [
            [4.0 - 3.0 * c, 0.0, 0.0, s / n, 2.0 * (1.0 - c) / n, 0.0],
            [6.0 * (s - nt), 1.0, 0.0, -2.0 * (1.0 - c) / n, (4.0 * s - 3.0 * nt) / n, 0.0],
            [0.0, 0.0, c, 0.0, 0.0, s / n],
            [3.0 * n * s, 0.0, 0.0, c, 2.0 * s, 0.0],
            [6.0 * n * (c - 1.0), 0.0, 0.0, -2.0 * s, 4.0 * c - 3.0, 0.0],
            [0.0, 0.0, -n * s, 0.0, 0.0, c],
        ]
    )


def cwh_thrust_matrix(params: OrbitParams, dt: float) -> np.ndarray:
    """Zero-order-hold input matrix Gamma(dt) = integral of Phi(s) B ds.

    Maps a constant thrust force held over dt onto the state increment.
    Derived by integrating the velocity columns of the state-transition
    matrix, so propagation with constant thrust stays closed-form.
    """
    n = params.mean_motion
    m = params.agent_mass
    nt = n * dt
    s = math.sin(nt)
    c = math.cos(nt)
    n2 = n * n
    g = np.zeros((6, 3))
    g[0, 0] = (1.0 - c) / n2
    g[0, 1] = (2.0 * nt - 2.0 * s) / n2
    g[1, 0] = -(2.0 * nt - 2.0 * s) / n2
    g[1, 1] = 4.0 * (1.0 - c) / n2 - 1.5 * dt * dt
    g[2, 2] = (1.0 - c) / n2
    g[3, 0] = s / n
    g[3, 1] = 2.0 * (1.0 - c) / n
    g[4, 0] = -2.0 * (1.0 - c) / n
    g[4, 1] = 4.0 * s / n - 3.0 * dt
    g[5, 2] = s / n
    return g / m


# The propagation matrices depend only on (params, dt); control loops hit the
# same step length millions of times.  Cached copies are never mutated.
@lru_cache(maxsize=64)
def _cached_stm(params: OrbitParams, dt: float) -> np.ndarray:
    return cwh_stm(params, dt)


@lru_cache(maxsize=64)
def _cached_thrust_matrix(params: OrbitParams, dt: float) -> np.ndarray:
    return cwh_thrust_matrix(params, dt)


def propagate(state: HillState, thrust: ThrustCommand, dt: float, params: OrbitParams) -> HillState:
    """Advance the state by dt under constant (zero-order-hold) thrust.

    Uses the exact discrete transition of the linear system; u=0 propagation
    is machine-precision natural motion.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    vec = _cached_stm(params, dt) @ state.as_vector()
    if np.any(thrust.force):
        vec = vec + _cached_thrust_matrix(params, dt) @ thrust.force
    return HillState.from_vector(vec)


def _targeting_terms(params: OrbitParams, tof: float) -> tuple[float, float, float, float]:
    n = params.mean_motion
    nt = n * tof
    s = math.sin(nt)
    c = math.cos(nt)
    d = 8.0 - 3.0 * nt * s - 8.0 * c
    return nt, s, c, d


@dataclass(frozen=True)
class SingularityCheck:
    """Diagnostic result of the NMT targeting singularity guard."""

    ok: bool
    d_value: float
    s_value: float
    d_min: float = D_MIN
    s_min: float = S_MIN

    def __bool__(self) -> bool:
        return self.ok


def check_tof_singularity(spec: TransferSpec, params: OrbitParams) -> SingularityCheck:
    """Check whether a transfer's TOF avoids the 1/D and 1/sin(nT) blowups."""
    _, s, _, d = _targeting_terms(params, spec.tof)
    ok = abs(d) >= D_MIN and abs(s) >= S_MIN
    return SingularityCheck(ok=ok, d_value=d, s_value=s)


def _require_nonsingular(tof: float, params: OrbitParams) -> tuple[float, float, float, float]:
    nt, s, c, d = _targeting_terms(params, tof)
    if abs(d) < D_MIN or abs(s) < S_MIN:
        raise SingularTransfer(
            f"transfer TOF {tof:.6g} s is singular: |D|={abs(d):.3g} (min {D_MIN}), "
            f"|sin(nT)|={abs(s):.3g} (min {S_MIN})"
        )
    return nt, s, c, d


def _initial_velocity_raw(start, end, tof: float, params: OrbitParams) -> np.ndarray:
    # Validation-free core shared with the control loops.
    nt, s, c, d = _require_nonsingular(tof, params)
    n = params.mean_motion
    x0, y0, z0 = start
    xf, yf, zf = end
    vx = (n / d) * ((-4.0 * s + 3.0 * nt * c) * x0 + (2.0 - 2.0 * c) * y0
                    + (4.0 * s - 3.0 * nt) * xf + (-2.0 + 2.0 * c) * yf)
    vy = (n / d) * ((-14.0 + 6.0 * nt * s + 14.0 * c) * x0 - s * y0
                    + (2.0 - 2.0 * c) * xf + s * yf)
    vz = (n / s) * (-c * z0 + zf)
    return np.array([vx, vy, vz])


def nmt_initial_velocity(spec: TransferSpec, params: OrbitParams) -> np.ndarray:
    """Initial velocity placing an agent on the NMT from start to end over the TOF.

    The in-plane channel solves the two-point boundary problem of the CWH
    dynamics (coefficients in S = sin(nT), C = cos(nT), D = 8 - 3nT*S - 8C);
    the out-of-plane channel is the decoupled harmonic oscillator.  The whole
    map scales with the mean motion n.
    """
    return _initial_velocity_raw(spec.start, spec.end, spec.tof, params)


def nmt_final_velocity(spec: TransferSpec, params: OrbitParams) -> np.ndarray:
    """Velocity upon arrival at the end of the NMT defined by the spec."""
    nt, s, c, d = _require_nonsingular(spec.tof, params)
    n = params.mean_motion
    x0, y0, z0 = spec.start
    xf, yf, zf = spec.end
    vx = (n / d) * ((-4.0 * s + 3.0 * nt) * x0 + (-2.0 + 2.0 * c) * y0
                    + (4.0 * s - 3.0 * nt * c) * xf + (2.0 - 2.0 * c) * yf)
    vy = (n / d) * ((2.0 - 2.0 * c) * x0 - s * y0
                    + (-14.0 + 6.0 * nt * s + 14.0 * c) * xf + s * yf)
    vz = (n / s) * (-z0 + c * zf)
    return np.array([vx, vy, vz])


def _angle_between(v1: np.ndarray, v2: np.ndarray) -> float:
    # atan2 of (cross, dot): exact zero for identical vectors, full precision
    # near 0 and pi where acos of the dot product loses digits.
    if not (np.any(v1) and np.any(v2)):
        raise ValueError("viewpoint positions must be nonzero")
    return math.atan2(float(np.linalg.norm(np.cross(v1, v2))), float(np.dot(v1, v2)))


def transfer_tof(v1, v2, viewpoints, params: OrbitParams) -> float:
    """Heuristic time of flight for a viewpoint transfer.

    Distinct viewpoints traverse at the natural circumnavigation rate, so the
    TOF is the subtended angle divided by the mean motion.  A parking action
    (v1 == v2) is assigned half the TOF of the closest pair in the lattice.
    """
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    n = params.mean_motion
    angle = _angle_between(v1, v2)
    if angle < 1e-12:
        return 0.5 * viewpoints.min_pairwise_angle / n
    return angle / n


def transfer_delta_v(v1, v2, current_velocity, viewpoints, params: OrbitParams) -> float:
    """Instantaneous delta-v to leave v1 for v2 given the agent's current velocity.

    The magnitude of the single burn moving the agent from its current
    velocity onto the NMT connecting the two viewpoints over the heuristic TOF.
    """
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    tof = transfer_tof(v1, v2, viewpoints, params)
    v0 = _initial_velocity_raw(v1, v2, tof, params)
    return float(np.linalg.norm(v0 - np.asarray(current_velocity, dtype=float)))
