"""High-level viewpoint-selection policies.

Scripted baselines (random, park, one-step greedy) and an inference-only
recurrent Q-network that loads externally trained weights from a versioned
binary container.  Training lives outside this package; the container format
is the bridge.

Network architecture (fixed): two fully connected layers of width 64 with
tanh activations, one LSTM cell of state size 64, and a linear head with one
Q-value per viewpoint.  Gate rows inside the stacked LSTM weight are ordered
[input, forget, candidate, output]; the stacked matrix multiplies the
concatenation [features, hidden] in that column order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .envs import InspectionEnv, observation_slices

__all__ = [
    "ContainerError",
    "BadMagic",
    "VersionUnsupported",
    "DimensionMismatch",
    "TruncatedPayload",
    "RecurrentQWeights",
    "ObservationNormalizer",
    "save_weights",
    "load_weights",
    "random_weights",
    "recurrent_forward",
    "RandomPolicy",
    "ParkPolicy",
    "GreedyPolicy",
    "RecurrentQPolicy",
    "make_policy",
    "POLICY_KINDS",
]

MAGIC = b"RQWEIGHT"
VERSION = 1

POLICY_KINDS = ("random", "park", "greedy", "recurrent-q")


class ContainerError(ValueError):
    """Base class for weight-container failures."""


class BadMagic(ContainerError):
    pass


class VersionUnsupported(ContainerError):
    pass


class DimensionMismatch(ContainerError):
    pass


class TruncatedPayload(ContainerError):
    pass


@dataclass
class RecurrentQWeights:
    """Tensors of the recurrent Q-network, kept in float32 as stored."""

    w1: np.ndarray       # (fc1, input)
    b1: np.ndarray       # (fc1,)
    w2: np.ndarray       # (fc2, fc1)
    b2: np.ndarray       # (fc2,)
    w_lstm: np.ndarray   # (4*cell, fc2 + cell), gate rows [i, f, g, o]
    b_lstm: np.ndarray   # (4*cell,)
    w_head: np.ndarray   # (actions, cell)
    b_head: np.ndarray   # (actions,)

    def __post_init__(self):
        for name in ("w1", "b1", "w2", "b2", "w_lstm", "b_lstm", "w_head", "b_head"):
            setattr(self, name, np.ascontiguousarray(getattr(self, name), dtype=np.float32))
        fc1, input_width = self.w1.shape
        fc2 = self.w2.shape[0]
        cell = self.b_lstm.shape[0] // 4
        actions = self.w_head.shape[0]
        expect = {
            "b1": (fc1,), "w2": (fc2, fc1), "b2": (fc2,),
            "w_lstm": (4 * cell, fc2 + cell), "b_lstm": (4 * cell,),
            "w_head": (actions, cell), "b_head": (actions,),
        }
        for name, shape in expect.items():
            if getattr(self, name).shape != shape:
                raise DimensionMismatch(
                    f"{name} has shape {getattr(self, name).shape}, expected {shape}")

    @property
    def input_width(self) -> int:
        return self.w1.shape[1]

    @property
    def cell_size(self) -> int:
        return self.b_lstm.shape[0] // 4

    @property
    def n_actions(self) -> int:
        return self.w_head.shape[0]

    def tensors(self) -> list[tuple[str, np.ndarray]]:
        return [(n, getattr(self, n)) for n in
                ("w1", "b1", "w2", "b2", "w_lstm", "b_lstm", "w_head", "b_head")]


def save_weights(weights: RecurrentQWeights, path) -> None:
    """Write the versioned little-endian container."""
    header = MAGIC + struct.pack(
        "<6I", VERSION, weights.input_width, weights.w1.shape[0],
        weights.w2.shape[0], weights.cell_size, weights.n_actions)
    with open(path, "wb") as fh:
        fh.write(header)
        for _, tensor in weights.tensors():
            fh.write(np.ascontiguousarray(tensor, dtype="<f4").tobytes())


def load_weights(path) -> RecurrentQWeights:
    """Read a weight container; validates magic, version, and payload size."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(MAGIC) + 24:
        raise TruncatedPayload(f"container holds {len(blob)} bytes, header needs "
                               f"{len(MAGIC) + 24}")
    if blob[:len(MAGIC)] != MAGIC:
        raise BadMagic(f"bad magic {blob[:len(MAGIC)]!r}")
    version, input_width, fc1, fc2, cell, actions = struct.unpack_from("<6I", blob, len(MAGIC))
    if version != VERSION:
        raise VersionUnsupported(f"container version {version}, reader supports {VERSION}")
    shapes = [
        (fc1, input_width), (fc1,), (fc2, fc1), (fc2,),
        (4 * cell, fc2 + cell), (4 * cell,), (actions, cell), (actions,),
    ]
    expected = len(MAGIC) + 24 + sum(int(np.prod(s)) * 4 for s in shapes)
    if len(blob) != expected:
        raise TruncatedPayload(f"container holds {len(blob)} bytes, expected {expected}")
    offset = len(MAGIC) + 24
    arrays = []
    for shape in shapes:
        count = int(np.prod(shape))
        arrays.append(np.frombuffer(blob, dtype="<f4", count=count,
                                    offset=offset).reshape(shape).copy())
        offset += count * 4
    return RecurrentQWeights(*arrays)


def random_weights(input_width: int, seed: int = 0, fc1: int = 64, fc2: int = 64,
                   cell: int = 64, actions: int = 20,
                   scale: float = 0.2) -> RecurrentQWeights:
    """Small random network (untrained stand-in and test fixture)."""
    rng = np.random.default_rng(seed)

    def w(*shape):
        return rng.normal(scale=scale, size=shape).astype(np.float32)

    return RecurrentQWeights(
        w1=w(fc1, input_width), b1=w(fc1), w2=w(fc2, fc1), b2=w(fc2),
        w_lstm=w(4 * cell, fc2 + cell), b_lstm=w(4 * cell),
        w_head=w(actions, cell), b_head=w(actions))


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def recurrent_forward(weights: RecurrentQWeights, x: np.ndarray,
                      hidden: tuple[np.ndarray, np.ndarray]) -> tuple[np.ndarray, tuple]:
    """One deterministic pass: FC stack, LSTM cell update, linear head.

    ``x`` is the (already normalized) observation vector; ``hidden`` is the
    (h, c) pair.  Returns (q_values, new_hidden).
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != weights.input_width:
        raise DimensionMismatch(
            f"observation width {x.shape[0]} != network input {weights.input_width}")
    h, c = hidden
    cell = weights.cell_size
    a1 = np.tanh(weights.w1 @ x + weights.b1)
    a2 = np.tanh(weights.w2 @ a1 + weights.b2)
    z = weights.w_lstm @ np.concatenate([a2, h]) + weights.b_lstm
    gate_i = _sigmoid(z[:cell])
    gate_f = _sigmoid(z[cell:2 * cell])
    gate_g = np.tanh(z[2 * cell:3 * cell])
    gate_o = _sigmoid(z[3 * cell:])
    c_new = gate_f * c + gate_i * gate_g
    h_new = gate_o * np.tanh(c_new)
    q = weights.w_head @ h_new + weights.b_head
    return q, (h_new, c_new)


@dataclass(frozen=True)
class ObservationNormalizer:
    """Scales raw observations for network input.

    Positions are divided by the viewpoint-sphere radius, velocities kept in
    m/s, and the arrival time divided by roughly one orbital period.  Images
    and attitude terms are already O(1).
    """

    position_scale: float = 200.0
    velocity_scale: float = 1.0
    time_scale: float = 6118.0

    def __call__(self, observation: np.ndarray) -> np.ndarray:
        obs = np.asarray(observation, dtype=float).copy()
        n_points = obs.shape[0] - 26
        sl = observation_slices(n_points)
        obs[sl["positions"]] /= self.position_scale
        obs[sl["velocities"]] /= self.velocity_scale
        obs[sl["time"]] /= self.time_scale
        return obs


class RandomPolicy:
    """Uniform over the viewpoint indices."""

    def __init__(self, n_actions: int = 20, seed: int = 0):
        self.n_actions = n_actions
        self.rng = np.random.default_rng(seed)

    def reset(self):
        pass

    def act(self, observation=None, agent_index: int = 0) -> int:
        return int(self.rng.integers(self.n_actions))


class ParkPolicy:
    """Always re-selects the station the agent currently occupies."""

    def __init__(self, viewpoints, n_points: int):
        self.positions = np.asarray(viewpoints.positions, dtype=float)
        self.slices = observation_slices(n_points)

    def reset(self):
        pass

    def act(self, observation, agent_index: int = 0) -> int:
        own = np.asarray(observation)[self.slices["positions"]].reshape(3, 3)[agent_index]
        return int(np.argmin(np.linalg.norm(self.positions - own, axis=1)))


class GreedyPolicy:
    """One-step reward maximizer with privileged access to the true state.

    Evaluates every candidate viewpoint through the environment's lookahead
    (heuristic TOF, propagated attitude, predicted image against the hidden
    ledger) and takes the argmax; ties resolve to the lowest index.
    """

    def __init__(self, env: InspectionEnv):
        self.env = env

    def reset(self):
        pass

    def act(self, observation=None, agent_index: int = 0) -> int:
        rewards = [self.env.lookahead_reward(agent_index, a)
                   for a in range(self.env.n_actions)]
        return int(np.argmax(rewards))


class RecurrentQPolicy:
    """Greedy argmax over the recurrent network's Q-values.

    Hidden state persists across act() calls within an episode; reset()
    clears it.  Optional epsilon-greedy exploration with a seeded generator.
    """

    def __init__(self, weights: RecurrentQWeights,
                 normalizer: ObservationNormalizer | None = None,
                 epsilon: float = 0.0, seed: int = 0):
        self.weights = weights
        self.normalizer = normalizer or ObservationNormalizer()
        self.epsilon = float(epsilon)
        self.rng = np.random.default_rng(seed)
        self.hidden = self._zero_hidden()

    def _zero_hidden(self):
        return (np.zeros(self.weights.cell_size), np.zeros(self.weights.cell_size))

    def reset(self):
        self.hidden = self._zero_hidden()

    def q_values(self, observation) -> np.ndarray:
        q, self.hidden = recurrent_forward(self.weights,
                                           self.normalizer(observation), self.hidden)
        return q

    def act(self, observation, agent_index: int = 0) -> int:
        q = self.q_values(observation)
        if self.epsilon > 0.0 and self.rng.random() < self.epsilon:
            return int(self.rng.integers(self.weights.n_actions))
        return int(np.argmax(q))


def make_policy(kind: str, env: InspectionEnv, seed: int = 0,
                weights_path=None, epsilon: float = 0.0):
    """Policy factory over the supported kinds, bound to an environment."""
    if kind == "random":
        return RandomPolicy(n_actions=env.n_actions, seed=seed)
    if kind == "park":
        return ParkPolicy(env.world.viewpoints, env.world.n_points)
    if kind == "greedy":
        return GreedyPolicy(env)
    if kind == "recurrent-q":
        if weights_path is None:
            raise ValueError("recurrent-q policy needs a weights_path")
        weights = load_weights(weights_path)
        if weights.input_width != env.observation_width:
            raise DimensionMismatch(
                f"weights expect observation width {weights.input_width}, "
                f"environment produces {env.observation_width}")
        if weights.n_actions != env.n_actions:
            raise DimensionMismatch(
                f"weights expect {weights.n_actions} actions, environment has "
                f"{env.n_actions}")
        return RecurrentQPolicy(weights, epsilon=epsilon, seed=seed)
    raise ValueError(f"unknown policy kind {kind!r}; expected one of {POLICY_KINDS}")
