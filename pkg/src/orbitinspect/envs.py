"""High-level multi-agent inspection environment.

Three agents hop between fixed Hill-frame viewpoints around a tumbling
point-cloud target.  A joint step is one simultaneous choice of goal
viewpoints; agents arrive asynchronously (the heuristic transfer time per
agent), image the target on arrival, and earn information-gain minus fuel
rewards until coverage crosses the inspection threshold.

Each agent only ever observes its *own* current image plus everyone's
broadcast positions and velocities; the shared coverage ledger stays hidden,
which is what makes the problem a DEC-POMDP.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, replace

import numpy as np
import yaml

from .attitude import AttitudeState, DynamicMode, InertiaDiag, attitude_in_hill, propagate_attitude
from .geometry import CameraModel, PointCloud, ViewpointSet, fibonacci_viewpoints, synthetic_cloud, visible_points
from .orbital import OrbitParams, TransferSpec, nmt_final_velocity, transfer_delta_v, transfer_tof

__all__ = [
    "NUM_AGENTS",
    "EnvConfig",
    "InspectionLedger",
    "JointState",
    "InspectionWorld",
    "InspectionEnv",
    "InvalidAction",
    "EpisodeDone",
    "LengthMismatch",
    "info_gain",
    "coverage_ratio",
    "observation_slices",
    "build_observation",
    "predict_candidate_reward",
]

NUM_AGENTS = 3


class InvalidAction(ValueError):
    """Viewpoint index outside the action space."""


class EpisodeDone(RuntimeError):
    """step called on a terminated episode."""


class LengthMismatch(ValueError):
    """Boolean vectors of different lengths combined."""


@dataclass
class EnvConfig:
    """Environment parameters; defaults follow the training configuration."""

    alpha: float = 2.0
    beta: float = 1.0
    r0: float = 0.0
    coverage_threshold: float = 0.85
    gamma: float = 0.95  # advisory discount, consumed by trainers only
    viewpoint_count: int = 20
    viewpoint_radius: float = 200.0
    max_joint_steps: int = 100
    dynamic_mode: DynamicMode = DynamicMode.STATIC_HILL
    seed: int = 0
    mean_motion: float = 0.001027
    orbital_radius_km: float = 7357.0
    agent_mass: float = 1.0
    inertia: tuple = (100.0, 50.0, 70.0)
    fov_half_angle_deg: float = 7.5
    hpr_diameter: float = 208874.855
    target_shape: str = "sphere"
    target_points: int = 500
    target_scale: float = 1.0
    target_seed: int = 0
    target_ply: str | None = None
    # The fuel term enters the reward as fuel_reward_sign * beta * delta_v;
    # the default penalizes fuel use.
    fuel_reward_sign: float = -1.0

    def __post_init__(self):
        if isinstance(self.dynamic_mode, str):
            self.dynamic_mode = DynamicMode(self.dynamic_mode)
        self.inertia = tuple(float(v) for v in self.inertia)
        if not 0.0 < self.coverage_threshold <= 1.0:
            raise ValueError("coverage_threshold must be in (0, 1]")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be non-negative")
        if self.viewpoint_count < 2:
            raise ValueError("need at least 2 viewpoints")
        if self.max_joint_steps < 1:
            raise ValueError("max_joint_steps must be positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["dynamic_mode"] = self.dynamic_mode.value
        d["inertia"] = list(self.inertia)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "EnvConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "EnvConfig":
        with open(path) as fh:
            data = yaml.safe_load(fh)
        if not isinstance(data, dict):
            raise ValueError(f"config file {path} must hold a key/value document")
        return cls.from_dict(data)

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def with_overrides(self, **kwargs) -> "EnvConfig":
        return replace(self, **kwargs)


class InspectionLedger:
    """Monotone boolean coverage vector over target POIs."""

    def __init__(self, size: int):
        self.seen = np.zeros(size, dtype=bool)
        self._count = 0

    def __len__(self) -> int:
        return len(self.seen)

    @property
    def count(self) -> int:
        return self._count

    def update(self, image: np.ndarray) -> int:
        """Fold an image in; returns the number of newly seen points."""
        if len(image) != len(self.seen):
            raise LengthMismatch(f"image length {len(image)} != ledger length {len(self.seen)}")
        new = int(np.count_nonzero(image & ~self.seen))
        if new:
            self.seen |= image
            self._count += new
        return new

    def copy(self) -> "InspectionLedger":
        out = InspectionLedger(len(self.seen))
        out.seen = self.seen.copy()
        out._count = self._count
        return out


def info_gain(ledger_before: InspectionLedger, image: np.ndarray) -> tuple[int, int]:
    """Newly seen count of an image against a ledger, plus unseen-before count."""
    if len(image) != len(ledger_before.seen):
        raise LengthMismatch(
            f"image length {len(image)} != ledger length {len(ledger_before.seen)}")
    new_count = int(np.count_nonzero(np.asarray(image, dtype=bool) & ~ledger_before.seen))
    remaining_before = len(ledger_before.seen) - ledger_before.count
    return new_count, remaining_before


def coverage_ratio(ledger: InspectionLedger) -> float:
    """Fraction of POIs seen so far."""
    return ledger.count / len(ledger.seen)


def observation_slices(n_points: int) -> dict[str, slice]:
    """Fixed layout of the flattened per-agent observation vector."""
    return {
        "positions": slice(0, 9),
        "velocities": slice(9, 18),
        "quaternion": slice(18, 22),
        "omega": slice(22, 25),
        "image": slice(25, 25 + n_points),
        "time": slice(25 + n_points, 26 + n_points),
    }


def build_observation(positions, velocities, q_bf_hill, omega_hill, image,
                      arrival_time: float) -> np.ndarray:
    """Flatten one agent's observation; length 26 + |P|."""
    return np.concatenate([
        np.asarray(positions, dtype=float).reshape(9),
        np.asarray(velocities, dtype=float).reshape(9),
        np.asarray(q_bf_hill, dtype=float).reshape(4),
        np.asarray(omega_hill, dtype=float).reshape(3),
        np.asarray(image, dtype=float).reshape(-1),
        [float(arrival_time)],
    ])


@dataclass
class JointState:
    """Full hidden state of the joint environment."""

    viewpoint_indices: np.ndarray        # (3,) current station of each agent
    positions: np.ndarray                # (3, 3) m
    velocities: np.ndarray               # (3, 3) m/s
    attitude: AttitudeState              # target attitude at `time`
    ledger: InspectionLedger
    time: float                          # joint calendar time t_k
    arrival_times: np.ndarray            # (3,) per-agent last arrival
    step_count: int = 0
    done: bool = False
    done_reason: str | None = None

    def copy(self) -> "JointState":
        return JointState(
            viewpoint_indices=self.viewpoint_indices.copy(),
            positions=self.positions.copy(),
            velocities=self.velocities.copy(),
            attitude=self.attitude.copy(),
            ledger=self.ledger.copy(),
            time=self.time,
            arrival_times=self.arrival_times.copy(),
            step_count=self.step_count,
            done=self.done,
            done_reason=self.done_reason,
        )


class InspectionWorld:
    """Shared immutable scene: orbit, target, lattice, camera.

    Also owns a small visibility cache keyed by (viewpoint index, quantized
    attitude); for attitude-stationary modes the 20 masks are computed once.
    """

    CACHE_LIMIT = 8192

    def __init__(self, config: EnvConfig, cloud: PointCloud | None = None):
        self.config = config
        self.params = OrbitParams(
            mean_motion=config.mean_motion,
            orbital_radius_km=config.orbital_radius_km,
            agent_mass=config.agent_mass,
        )
        self.inertia = InertiaDiag(*config.inertia)
        self.camera = CameraModel(
            fov_half_angle_deg=config.fov_half_angle_deg,
            hpr_diameter=config.hpr_diameter,
        )
        self.viewpoints: ViewpointSet = fibonacci_viewpoints(
            config.viewpoint_count, config.viewpoint_radius)
        if cloud is not None:
            self.cloud = cloud
        elif config.target_ply:
            from .ply import load_ply

            self.cloud = load_ply(config.target_ply)
        else:
            self.cloud = synthetic_cloud(
                config.target_shape, config.target_points,
                config.target_scale, config.target_seed)
        self._mask_cache: dict = {}

    @property
    def n_points(self) -> int:
        return len(self.cloud)

    @property
    def observation_width(self) -> int:
        return 26 + self.n_points

    def initial_attitude(self) -> AttitudeState:
        return AttitudeState.from_mode(self.config.dynamic_mode, self.params)

    def attitude_products(self, attitude: AttitudeState, t: float):
        return attitude_in_hill(attitude, t, self.params)

    def image_from_viewpoint(self, vp_index: int, q_bf_hill) -> np.ndarray:
        """Visibility mask from a lattice station, cached on the attitude."""
        key = (int(vp_index), tuple(np.round(q_bf_hill, 12)))
        mask = self._mask_cache.get(key)
        if mask is None:
            mask = visible_points(self.cloud, q_bf_hill,
                                  self.viewpoints.positions[vp_index], self.camera)
            if len(self._mask_cache) < self.CACHE_LIMIT:
                self._mask_cache[key] = mask
        return mask

    def image_from_position(self, camera_pos, q_bf_hill) -> np.ndarray:
        """Uncached visibility mask from an arbitrary camera position."""
        return visible_points(self.cloud, q_bf_hill, camera_pos, self.camera)


def predict_candidate_reward(world: InspectionWorld, cfg: EnvConfig,
                             ledger: InspectionLedger, attitude: AttitudeState,
                             attitude_epoch: float, position, velocity,
                             action: int, now: float) -> float:
    """One-step reward prediction shared by the greedy oracle and the rollout.

    Computes the heuristic TOF/delta-v of the transfer, propagates the target
    to the predicted arrival, images the candidate station, and scores the
    information gain against the supplied ledger.
    """
    if coverage_ratio(ledger) >= cfg.coverage_threshold:
        return cfg.r0
    goal = world.viewpoints.positions[int(action)]
    tof = transfer_tof(position, goal, world.viewpoints, world.params)
    delta_v = transfer_delta_v(position, goal, velocity, world.viewpoints, world.params)
    arrival = now + tof
    att = propagate_attitude(attitude, arrival - attitude_epoch, world.inertia)
    q_bf_hill, _ = world.attitude_products(att, arrival)
    image = world.image_from_viewpoint(int(action), q_bf_hill)
    new_count, remaining = info_gain(ledger, image)
    gain = cfg.alpha * new_count / remaining if remaining > 0 else 0.0
    return gain + cfg.fuel_reward_sign * cfg.beta * delta_v + cfg.r0


class InspectionEnv:
    """Joint-step DEC-POMDP over the viewpoint lattice (Table-1 semantics)."""

    def __init__(self, config: EnvConfig, cloud: PointCloud | None = None):
        self.config = config
        self.world = InspectionWorld(config, cloud)
        self.state: JointState | None = None
        self.trace: list[dict] = []

    @property
    def n_actions(self) -> int:
        return len(self.world.viewpoints)

    @property
    def observation_width(self) -> int:
        return self.world.observation_width

    def reset(self, seed: int | None = None,
              start_indices=None) -> list[np.ndarray]:
        """Start a fresh episode; agents park at distinct random viewpoints.

        ``start_indices`` pins the starting stations (testing hook).
        """
        rng = np.random.default_rng(self.config.seed if seed is None else seed)
        if start_indices is None:
            start_indices = rng.choice(self.n_actions, size=NUM_AGENTS, replace=False)
        start_indices = np.asarray(start_indices, dtype=int)
        if len(np.unique(start_indices)) != NUM_AGENTS:
            raise InvalidAction("start viewpoints must be distinct")

        ledger = InspectionLedger(self.world.n_points)
        attitude = self.world.initial_attitude()
        q_bf_hill, omega_hill = self.world.attitude_products(attitude, 0.0)
        positions = self.world.viewpoints.positions[start_indices].copy()
        velocities = np.zeros((NUM_AGENTS, 3))

        images = []
        for i in range(NUM_AGENTS):
            image = self.world.image_from_viewpoint(start_indices[i], q_bf_hill)
            ledger.update(image)
            images.append(image)

        self.state = JointState(
            viewpoint_indices=start_indices,
            positions=positions,
            velocities=velocities,
            attitude=attitude,
            ledger=ledger,
            time=0.0,
            arrival_times=np.zeros(NUM_AGENTS),
        )
        self.trace = []
        return [
            build_observation(positions, velocities, q_bf_hill, omega_hill, images[i], 0.0)
            for i in range(NUM_AGENTS)
        ]

    def _validate_actions(self, actions) -> np.ndarray:
        actions = np.asarray(actions, dtype=int).reshape(-1)
        if len(actions) != NUM_AGENTS:
            raise InvalidAction(f"expected {NUM_AGENTS} actions, got {len(actions)}")
        if np.any(actions < 0) or np.any(actions >= self.n_actions):
            raise InvalidAction(f"viewpoint index out of range [0, {self.n_actions})")
        return actions

    def plan_transfer(self, agent: int, action: int) -> dict:
        """TOF / arrival / delta-v bookkeeping for one agent's candidate move."""
        state = self.state
        v_from = state.positions[agent]
        v_to = self.world.viewpoints.positions[int(action)]
        tof = transfer_tof(v_from, v_to, self.world.viewpoints, self.world.params)
        delta_v = transfer_delta_v(v_from, v_to, state.velocities[agent],
                                   self.world.viewpoints, self.world.params)
        return {
            "agent": agent,
            "action": int(action),
            "tof": tof,
            "arrival": state.time + tof,
            "delta_v": delta_v,
            "goal": v_to,
        }

    def lookahead_reward(self, agent: int, action: int) -> float:
        """Predicted one-step reward of a candidate action for the true state.

        Privileged oracle used by the scripted greedy baseline: evaluates the
        candidate's image against the current hidden ledger.
        """
        if self.state is None:
            raise EpisodeDone("reset before lookahead")
        s = self.state
        return predict_candidate_reward(
            self.world, self.config, s.ledger, s.attitude, s.time,
            s.positions[agent], s.velocities[agent], int(action), s.time)

    def step_joint(self, actions) -> tuple[list[np.ndarray], np.ndarray, bool, dict]:
        """Advance one joint step: three simultaneous viewpoint commands.

        Agents are processed in ascending arrival order (ties by index): the
        target is propagated to each arrival, the agent images the target,
        collects reward against the ledger as of its arrival, and the ledger
        absorbs its image.
        """
        if self.state is None:
            raise EpisodeDone("reset before stepping")
        if self.state.done:
            raise EpisodeDone("episode already terminated")
        actions = self._validate_actions(actions)
        state = self.state
        cfg = self.config

        plans = [self.plan_transfer(i, actions[i]) for i in range(NUM_AGENTS)]
        order = sorted(range(NUM_AGENTS), key=lambda i: (plans[i]["arrival"], i))
        t_next = max(p["arrival"] for p in plans)

        prev_positions = state.positions.copy()
        prev_velocities = state.velocities.copy()

        rewards = np.zeros(NUM_AGENTS)
        images: list[np.ndarray] = [None] * NUM_AGENTS
        products: list[tuple] = [None] * NUM_AGENTS
        attitude = state.attitude
        att_epoch = state.time
        step_info: list[dict] = [None] * NUM_AGENTS

        for i in order:
            plan = plans[i]
            attitude = propagate_attitude(attitude, plan["arrival"] - att_epoch,
                                          self.world.inertia)
            att_epoch = plan["arrival"]
            q_bf_hill, omega_hill = self.world.attitude_products(attitude, plan["arrival"])
            image = self.world.image_from_viewpoint(plan["action"], q_bf_hill)
            new_count, remaining = info_gain(state.ledger, image)
            crossed = coverage_ratio(state.ledger) >= cfg.coverage_threshold
            if crossed:
                rewards[i] = cfg.r0
            else:
                gain = cfg.alpha * new_count / remaining if remaining > 0 else 0.0
                rewards[i] = gain + cfg.fuel_reward_sign * cfg.beta * plan["delta_v"] + cfg.r0
            state.ledger.update(image)
            images[i] = image
            products[i] = (q_bf_hill, omega_hill)

            spec = TransferSpec(start=state.positions[i], end=plan["goal"], tof=plan["tof"])
            state.velocities[i] = nmt_final_velocity(spec, self.world.params)
            state.positions[i] = plan["goal"].copy()
            state.viewpoint_indices[i] = plan["action"]
            state.arrival_times[i] = plan["arrival"]

            step_info[i] = {
                "step": state.step_count,
                "agent": i,
                "action": plan["action"],
                "tof": plan["tof"],
                "arrival_time": plan["arrival"],
                "delta_v": plan["delta_v"],
                "new_points": new_count,
                "remaining_before": remaining,
                "reward": float(rewards[i]),
                "gated": bool(crossed),
            }

        state.attitude = attitude
        state.time = t_next
        state.step_count += 1

        coverage = coverage_ratio(state.ledger)
        if coverage >= cfg.coverage_threshold:
            state.done = True
            state.done_reason = "coverage"
        elif state.step_count >= cfg.max_joint_steps:
            state.done = True
            state.done_reason = "timeout"

        observations = []
        for i in range(NUM_AGENTS):
            # Peers' kinematics come from the last completed joint update;
            # the agent itself reports its arrival state.
            obs_positions = prev_positions.copy()
            obs_velocities = prev_velocities.copy()
            obs_positions[i] = state.positions[i]
            obs_velocities[i] = state.velocities[i]
            q_bf_hill, omega_hill = products[i]
            observations.append(build_observation(
                obs_positions, obs_velocities, q_bf_hill, omega_hill,
                images[i], state.arrival_times[i]))

        self.trace.extend(step_info)
        info = {
            "coverage": coverage,
            "time": state.time,
            "step": state.step_count,
            "done_reason": state.done_reason,
            "agents": step_info,
        }
        return observations, rewards, state.done, info

    def export_trace(self, path) -> None:
        """Write the episode trace as line-delimited JSON, one row per arrival."""
        with open(path, "w") as fh:
            for row in self.trace:
                fh.write(json.dumps(row) + "\n")
