"""Multi-agent episodic reset/step wrapper over the core inspection environment.

Observations, rewards, and termination flags are keyed per agent id so the
environment drops into dictionary-style multi-agent training frameworks.  The
wrapper adds no semantics of its own: every value it returns is produced by
the core environment, which the equivalence tests verify bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from orbitinspect.envs import NUM_AGENTS, EnvConfig, InspectionEnv

__all__ = ["AGENT_IDS", "SpaceDescriptor", "BoundEnv"]

AGENT_IDS = tuple(range(NUM_AGENTS))


@dataclass(frozen=True)
class SpaceDescriptor:
    """Shape/bounds declaration of an observation or action space."""

    shape: tuple
    dtype: str
    low: float | None = None
    high: float | None = None
    discrete_n: int | None = None

    @property
    def is_discrete(self) -> bool:
        return self.discrete_n is not None


class BoundEnv:
    """The high-level DEC-POMDP behind a per-agent keyed reset/step protocol."""

    def __init__(self, config: EnvConfig | dict | str, cloud=None):
        if isinstance(config, str):
            config = EnvConfig.from_file(config)
        elif isinstance(config, dict):
            config = EnvConfig.from_dict(config)
        self.core = InspectionEnv(config, cloud)
        self.agent_ids = AGENT_IDS

    @property
    def observation_space(self) -> SpaceDescriptor:
        return SpaceDescriptor(shape=(self.core.observation_width,), dtype="float64",
                               low=-np.inf, high=np.inf)

    @property
    def action_space(self) -> SpaceDescriptor:
        return SpaceDescriptor(shape=(), dtype="int64", discrete_n=self.core.n_actions)

    def reset(self, seed: int | None = None) -> dict[int, np.ndarray]:
        observations = self.core.reset(seed=seed)
        return dict(zip(self.agent_ids, observations))

    def step(self, actions: dict[int, int]):
        """Advance one joint step from a full set of per-agent actions.

        Returns ``(observations, rewards, dones, infos)`` keyed by agent id;
        ``dones`` also carries the conventional ``"__all__"`` flag.
        """
        missing = set(self.agent_ids) - set(actions)
        if missing:
            raise KeyError(f"actions missing for agents {sorted(missing)}")
        ordered = [int(actions[i]) for i in self.agent_ids]
        observations, rewards, done, info = self.core.step_joint(ordered)
        obs = dict(zip(self.agent_ids, observations))
        rew = {i: float(rewards[i]) for i in self.agent_ids}
        dones = {i: bool(done) for i in self.agent_ids}
        dones["__all__"] = bool(done)
        infos = {i: dict(info["agents"][i], coverage=info["coverage"],
                         done_reason=info["done_reason"])
                 for i in self.agent_ids}
        return obs, rew, dones, infos
