"""Training-side bindings for the on-orbit inspection environment."""

from .env_binding import AGENT_IDS, BoundEnv, SpaceDescriptor
from .export import REQUIRED_KEYS, export_weights, weights_from_params

__version__ = "0.1.0"
