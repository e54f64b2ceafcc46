"""Low-level point-to-point navigation and the hierarchical rollout engine.

The controller tracks the natural motion trajectory commanded by the
high-level planner: at every control interval it solves for the thrust that
makes the post-step velocity equal the transfer velocity required from the
post-step position, so the agent stays on an NMT that arrives at the goal on
time.  The binding velocity constraint is what implicitly minimizes fuel;
any solver meeting the constraint residual is conformant.

The rollout engine relaxes the high-level environment's joint-step clock:
three agents run asynchronously on a shared one-second calendar, each
alternating high-level viewpoint decisions with low-level thrust steps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .envs import (
    NUM_AGENTS,
    EnvConfig,
    InspectionLedger,
    InspectionWorld,
    build_observation,
    coverage_ratio,
    info_gain,
    predict_candidate_reward,
)
from .attitude import propagate_attitude
from .orbital import (
    HillState,
    OrbitParams,
    SingularTransfer,
    ThrustCommand,
    _initial_velocity_raw,
    cwh_stm,
    cwh_thrust_matrix,
    nmt_initial_velocity,
    propagate,
    transfer_delta_v,
    transfer_tof,
)

__all__ = [
    "ControllerConfig",
    "TransferCommand",
    "LowLevelObservation",
    "NoConvergence",
    "ArrivalFailure",
    "NavigationResult",
    "required_velocity",
    "solve_step_thrust",
    "navigate",
    "EpisodeRecord",
    "HierarchicalEngine",
    "hierarchical_rollout",
]


class NoConvergence(RuntimeError):
    """Fixed-point thrust solve failed to meet the velocity constraint."""


class ArrivalFailure(RuntimeError):
    """Navigation never satisfied the arrival predicate inside the window."""

    def __init__(self, message: str, closest_approach: float, closest_time: float,
                 final_state: HillState):
        super().__init__(message)
        self.closest_approach = closest_approach
        self.closest_time = closest_time
        self.final_state = final_state


@dataclass(frozen=True)
class ControllerConfig:
    """Low-level navigation parameters (hierarchical-environment defaults)."""

    arrival_radius: float = 0.35          # epsilon, m
    arrival_window: float = 50.0          # t-bar, s
    control_dt: float = 1.0               # s
    velocity_match_tolerance: float = 1e-6  # m/s, post-step constraint residual
    max_iterations: int = 25
    fixed_point_tolerance: float = 1e-9   # N, successive-thrust convergence
    terminal_coast_steps: int = 2         # steps before arrival where Eq-solve is singular-ish
    max_thrust: float | None = None       # clamp hook, off by default

    def __post_init__(self):
        if not (self.arrival_radius > 0 and self.arrival_window > 0 and self.control_dt > 0):
            raise ValueError("arrival_radius, arrival_window, control_dt must be positive")


@dataclass
class TransferCommand:
    """A goal viewpoint with departure and planned arrival times."""

    goal: np.ndarray
    departure_time: float
    planned_arrival: float

    def __post_init__(self):
        self.goal = np.asarray(self.goal, dtype=float).reshape(3)
        if not self.planned_arrival > self.departure_time:
            raise ValueError("planned_arrival must be after departure_time")

    @property
    def tof(self) -> float:
        return self.planned_arrival - self.departure_time


@dataclass
class LowLevelObservation:
    """What the navigation controller sees each step; TOF may run negative."""

    position: np.ndarray
    velocity: np.ndarray
    goal: np.ndarray
    t_remaining: float


def low_level_observation(state: HillState, command: TransferCommand,
                          now: float) -> LowLevelObservation:
    return LowLevelObservation(position=state.position.copy(),
                               velocity=state.velocity.copy(),
                               goal=command.goal.copy(),
                               t_remaining=command.planned_arrival - now)


def required_velocity(position, goal, t_remaining: float,
                      params: OrbitParams) -> np.ndarray:
    """Velocity that puts the agent on the NMT reaching the goal in t_remaining."""
    if not t_remaining > 0:
        raise ValueError(f"t_remaining must be positive, got {t_remaining}")
    return _initial_velocity_raw(np.asarray(position, dtype=float),
                                 np.asarray(goal, dtype=float), t_remaining, params)


@lru_cache(maxsize=32)
def _discrete_matrices(params: OrbitParams, dt: float):
    phi = cwh_stm(params, dt)
    gamma = cwh_thrust_matrix(params, dt)
    g_pos = gamma[:3, :]
    g_vel = gamma[3:, :]
    return phi, g_pos, g_vel, np.linalg.inv(g_vel)


def _solve_step(state: HillState, command: TransferCommand, now: float,
                config: ControllerConfig, params: OrbitParams,
                warm_start: np.ndarray | None = None, strict: bool = True):
    """Fixed-point thrust solve; returns (u, iterations, residual).

    With ``strict`` a residual above the velocity-match tolerance raises;
    otherwise the best-effort thrust is returned and the arrival predicate
    downstream decides the transfer's fate.
    """
    dt = config.control_dt
    t_rem = command.planned_arrival - now
    if t_rem <= config.terminal_coast_steps * dt + 1e-9:
        return np.zeros(3), 0, 0.0
    phi, g_pos, g_vel, g_vel_inv = _discrete_matrices(params, dt)
    free = phi @ state.as_vector()
    x_free, v_free = free[:3], free[3:]
    t_rem_next = t_rem - dt

    u = np.zeros(3) if warm_start is None else np.asarray(warm_start, dtype=float)
    iterations = 0
    for iterations in range(1, config.max_iterations + 1):
        x_next = x_free + g_pos @ u
        try:
            v_req = required_velocity(x_next, command.goal, t_rem_next, params)
        except SingularTransfer:
            return np.zeros(3), iterations, 0.0  # defensive terminal coast
        u_new = g_vel_inv @ (v_req - v_free)
        step = float(np.linalg.norm(u_new - u))
        u = u_new
        if step < config.fixed_point_tolerance:
            break
    x_next = x_free + g_pos @ u
    v_next = v_free + g_vel @ u
    residual = float(np.linalg.norm(
        v_next - required_velocity(x_next, command.goal, t_rem_next, params)))
    if strict and residual > config.velocity_match_tolerance:
        raise NoConvergence(
            f"velocity constraint residual {residual:.3e} m/s after "
            f"{iterations} iterations (tolerance {config.velocity_match_tolerance:.1e})")
    if config.max_thrust is not None:
        norm = float(np.linalg.norm(u))
        if norm > config.max_thrust:
            u = u * (config.max_thrust / norm)
    return u, iterations, residual


def solve_step_thrust(state: HillState, command: TransferCommand, now: float,
                      config: ControllerConfig, params: OrbitParams) -> ThrustCommand:
    """Thrust over [now, now + dt] keeping the agent on the commanded NMT.

    Inside the terminal coast band before planned arrival the targeting
    equations turn singular and the controller coasts instead.
    """
    u, _, _ = _solve_step(state, command, now, config, params)
    return ThrustCommand(u)


@dataclass
class NavigationResult:
    success: bool
    arrival_time: float
    final_state: HillState
    fuel_used: float                     # velocity-equivalent, m/s
    position_error: float
    timing_error: float
    closest_approach: float
    max_goal_distance: float             # largest excursion from the goal
    steps: list = field(default_factory=list)  # (t, position, velocity, thrust)


def navigate(state: HillState, command: TransferCommand, config: ControllerConfig,
             params: OrbitParams, record_steps: bool = False) -> NavigationResult:
    """Run the controller until the arrival predicate holds or the window closes.

    Success requires both position within the arrival radius and time within
    the arrival window of the planned arrival, simultaneously.
    """
    dt = config.control_dt
    t = command.departure_time
    s = state.copy()
    fuel = 0.0
    warm = None
    closest = float("inf")
    closest_t = t
    max_dist = 0.0
    steps = []
    while t <= command.planned_arrival + config.arrival_window + 1e-9:
        dist = float(np.linalg.norm(s.position - command.goal))
        closest, closest_t = min((closest, closest_t), (dist, t))
        max_dist = max(max_dist, dist)
        if dist <= config.arrival_radius and abs(command.planned_arrival - t) <= config.arrival_window:
            return NavigationResult(
                success=True, arrival_time=t, final_state=s, fuel_used=fuel,
                position_error=dist, timing_error=abs(command.planned_arrival - t),
                closest_approach=closest, max_goal_distance=max_dist, steps=steps)
        u, _, _ = _solve_step(s, command, t, config, params, warm_start=warm,
                              strict=False)
        warm = u
        if record_steps:
            steps.append((t, s.position.copy(), s.velocity.copy(), u.copy()))
        s = propagate(s, ThrustCommand(u), dt, params)
        fuel += float(np.linalg.norm(u)) * dt / params.agent_mass
        t += dt
    raise ArrivalFailure(
        f"no arrival within the window: closest approach {closest:.3f} m at t={closest_t:.1f}",
        closest_approach=closest, closest_time=closest_t, final_state=s)


@dataclass
class EpisodeRecord:
    """Everything a hierarchical rollout produced, serializable to JSONL."""

    meta: dict
    events: list
    ticks: list
    summary: dict

    def series(self) -> list[dict]:
        """Coverage / cumulative delta-v / transfer-count rows over time."""
        rows = []
        transfers = 0
        for ev in self.events:
            if ev["type"] not in ("image", "arrival"):
                continue
            if ev["type"] == "arrival":
                transfers += 1
            rows.append({
                "time": ev["t"],
                "inspection_pct": 100.0 * ev["coverage"],
                "cumulative_delta_v": ev["total_delta_v"],
                "transfers": transfers,
            })
        return rows

    def to_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(json.dumps({"type": "meta", **self.meta}) + "\n")
            for tick in self.ticks:
                fh.write(json.dumps({"type": "tick", **tick}) + "\n")
            for ev in self.events:
                fh.write(json.dumps(ev) + "\n")
            fh.write(json.dumps({"type": "summary", **self.summary}) + "\n")


class _AgentRuntime:
    __slots__ = ("state", "station", "command", "command_action", "delta_v",
                 "actions", "failures", "warm_thrust")

    def __init__(self, state: HillState, station: int):
        self.state = state
        self.station = station          # lattice index of the last reached viewpoint
        self.command: TransferCommand | None = None
        self.command_action: int | None = None
        self.delta_v = 0.0
        self.actions: list[int] = []
        self.failures = 0
        self.warm_thrust: np.ndarray | None = None


class HierarchicalEngine:
    """Asynchronous three-agent rollout over shared calendar ticks.

    Exposes the same lookahead-oracle surface as the high-level environment
    so scripted policies transfer unchanged.
    """

    def __init__(self, env_config: EnvConfig, controller_config: ControllerConfig,
                 rollout_threshold: float = 0.83, max_actions_per_agent: int = 100,
                 max_sim_time: float = 1e7):
        self.config = env_config
        self.controller = controller_config
        self.world = InspectionWorld(env_config)
        self.rollout_threshold = rollout_threshold
        self.max_actions_per_agent = max_actions_per_agent
        self.max_sim_time = max_sim_time
        self.ledger: InspectionLedger | None = None
        self.agents: list[_AgentRuntime] = []
        self.time = 0.0
        self._attitude = None
        self._attitude_epoch = 0.0

    # -- oracle surface shared with InspectionEnv ---------------------------
    @property
    def n_actions(self) -> int:
        return len(self.world.viewpoints)

    @property
    def observation_width(self) -> int:
        return self.world.observation_width

    def lookahead_reward(self, agent: int, action: int) -> float:
        # The heuristic TOF / delta-v quote anchors to the agent's lattice
        # station (the high-level model's view), not the achieved position a
        # few decimeters off it.
        a = self.agents[agent]
        station_pos = self.world.viewpoints.positions[a.station]
        return predict_candidate_reward(
            self.world, self.config, self.ledger, self._attitude,
            self._attitude_epoch, station_pos, a.state.velocity,
            int(action), self.time)

    def plan_transfer(self, agent: int, action: int) -> dict:
        a = self.agents[agent]
        goal = self.world.viewpoints.positions[int(action)]
        station_pos = self.world.viewpoints.positions[a.station]
        tof = transfer_tof(station_pos, goal, self.world.viewpoints, self.world.params)
        delta_v = transfer_delta_v(station_pos, goal, a.state.velocity,
                                   self.world.viewpoints, self.world.params)
        return {"agent": agent, "action": int(action), "tof": tof,
                "arrival": self.time + tof, "delta_v": delta_v, "goal": goal}

    # -- internals -----------------------------------------------------------
    def _attitude_at(self, t: float):
        self._attitude = propagate_attitude(self._attitude, t - self._attitude_epoch,
                                            self.world.inertia)
        self._attitude_epoch = t
        return self.world.attitude_products(self._attitude, t)

    def _observation(self, agent: int, image, t: float):
        positions = np.stack([a.state.position for a in self.agents])
        velocities = np.stack([a.state.velocity for a in self.agents])
        q_bf_hill, omega_hill = self.world.attitude_products(self._attitude, t)
        return build_observation(positions, velocities, q_bf_hill, omega_hill, image, t)

    def run(self, policy_factory, seed: int, record_ticks: bool = True) -> EpisodeRecord:
        cfg = self.config
        world = self.world
        rng = np.random.default_rng(seed)
        starts = rng.choice(self.n_actions, size=NUM_AGENTS, replace=False)
        self.agents = [
            _AgentRuntime(HillState(world.viewpoints.positions[idx].copy(), np.zeros(3)),
                          int(idx))
            for idx in starts
        ]
        self.ledger = InspectionLedger(world.n_points)
        self._attitude = world.initial_attitude()
        self._attitude_epoch = 0.0
        self.time = 0.0

        policies = [policy_factory(self, i) for i in range(NUM_AGENTS)]
        for p in policies:
            p.reset()

        events: list[dict] = []
        ticks: list[dict] = []
        done_reason = None

        def total_delta_v():
            return float(sum(a.delta_v for a in self.agents))

        # Initial images from the starting stations, then first commands.
        q_bf_hill, _ = self._attitude_at(0.0)
        for i, a in enumerate(self.agents):
            image = world.image_from_viewpoint(a.station, q_bf_hill)
            new, _ = info_gain(self.ledger, image)
            self.ledger.update(image)
            events.append({"type": "image", "t": 0.0, "agent": i,
                           "station": a.station, "new_points": new,
                           "coverage": coverage_ratio(self.ledger),
                           "total_delta_v": 0.0})

        if coverage_ratio(self.ledger) >= self.rollout_threshold:
            done_reason = "coverage"

        def issue_command(i: int, image) -> bool:
            """Query the agent's policy; returns False on action-budget burnout."""
            a = self.agents[i]
            if len(a.actions) >= self.max_actions_per_agent:
                return False
            obs = self._observation(i, image, self.time)
            action = int(policies[i].act(obs, i))
            plan = self.plan_transfer(i, action)
            a.command = TransferCommand(goal=plan["goal"], departure_time=self.time,
                                        planned_arrival=plan["arrival"])
            a.command_action = action
            a.actions.append(action)
            a.warm_thrust = None
            events.append({"type": "command", "t": self.time, "agent": i,
                           "action": action, "tof": plan["tof"],
                           "planned_arrival": plan["arrival"],
                           "delta_v_estimate": plan["delta_v"]})
            return True

        if done_reason is None:
            q_bf_hill, _ = self._attitude_at(0.0)
            for i, a in enumerate(self.agents):
                image = world.image_from_viewpoint(a.station, q_bf_hill)
                issue_command(i, image)

        dt = self.controller.control_dt
        eps = self.controller.arrival_radius
        window = self.controller.arrival_window
        while done_reason is None:
            if all(a.command is None for a in self.agents):
                done_reason = "action-budget"  # everyone idle, nothing left to fly
                break
            self.time += dt
            if self.time > self.max_sim_time:
                done_reason = "sim-time"
                break
            for i, a in enumerate(self.agents):
                if a.command is None:
                    continue
                u, _, _ = _solve_step(a.state, a.command, self.time - dt,
                                      self.controller, world.params,
                                      warm_start=a.warm_thrust, strict=False)
                a.warm_thrust = u
                a.state = propagate(a.state, ThrustCommand(u), dt, world.params)
                a.delta_v += float(np.linalg.norm(u)) * dt / world.params.agent_mass
                if record_ticks:
                    ticks.append({"t": self.time, "agent": i,
                                  "position": [round(v, 9) for v in a.state.position],
                                  "velocity": [round(v, 12) for v in a.state.velocity],
                                  "thrust": [round(v, 12) for v in u]})

            for i, a in enumerate(self.agents):
                if a.command is None:
                    continue
                dist = float(np.linalg.norm(a.state.position - a.command.goal))
                timing = abs(a.command.planned_arrival - self.time)
                if dist <= eps and timing <= window:
                    # Arrival: image at the actual time, from the commanded
                    # station (the epsilon ball around it defines "arrived",
                    # and the high-level model treats the camera as exactly
                    # there).
                    q_bf_hill, _ = self._attitude_at(self.time)
                    image = world.image_from_viewpoint(a.command_action, q_bf_hill)
                    new, _ = info_gain(self.ledger, image)
                    self.ledger.update(image)
                    a.station = a.command_action
                    events.append({"type": "arrival", "t": self.time, "agent": i,
                                   "action": a.command_action, "new_points": new,
                                   "position_error": dist, "timing_error": timing,
                                   "coverage": coverage_ratio(self.ledger),
                                   "total_delta_v": total_delta_v()})
                    a.command = None
                    if coverage_ratio(self.ledger) >= self.rollout_threshold:
                        done_reason = "coverage"
                        break
                    issue_command(i, image)  # agent idles once its budget is spent
                elif self.time > a.command.planned_arrival + window:
                    # Missed arrival: log, re-anchor the TOF quote to the
                    # nearest station, and re-query the high-level policy.
                    a.failures += 1
                    events.append({"type": "failure", "t": self.time, "agent": i,
                                   "action": a.command_action,
                                   "goal_distance": dist,
                                   "planned_arrival": a.command.planned_arrival})
                    a.station = int(np.argmin(np.linalg.norm(
                        world.viewpoints.positions - a.state.position, axis=1)))
                    q_bf_hill, _ = self._attitude_at(self.time)
                    image = world.image_from_position(a.state.position, q_bf_hill)
                    a.command = None
                    issue_command(i, image)

        summary = {
            "coverage": coverage_ratio(self.ledger),
            "inspection_pct": 100.0 * coverage_ratio(self.ledger),
            "sim_time": self.time,
            "done_reason": done_reason,
            "total_delta_v": total_delta_v(),
            "per_agent": [
                {"delta_v": a.delta_v, "actions_total": len(a.actions),
                 "actions_unique": len(set(a.actions)), "failures": a.failures}
                for a in self.agents
            ],
        }
        meta = {
            "seed": int(seed),
            "config_fingerprint": cfg.fingerprint(),
            "rollout_threshold": self.rollout_threshold,
            "max_actions_per_agent": self.max_actions_per_agent,
            "start_stations": [int(s) for s in starts],
        }
        return EpisodeRecord(meta=meta, events=events, ticks=ticks, summary=summary)


def hierarchical_rollout(env_config: EnvConfig, controller_config: ControllerConfig,
                         policy_factory, seed: int, rollout_threshold: float = 0.83,
                         max_actions_per_agent: int = 100,
                         record_ticks: bool = True) -> EpisodeRecord:
    """Run one full hierarchical episode.

    ``policy_factory(engine, agent_index)`` builds each agent's high-level
    policy against the engine's oracle surface.
    """
    engine = HierarchicalEngine(env_config, controller_config,
                                rollout_threshold=rollout_threshold,
                                max_actions_per_agent=max_actions_per_agent)
    return engine.run(policy_factory, seed, record_ticks=record_ticks)
