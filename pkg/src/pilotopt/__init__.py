"""Pilot design and MMSE channel-estimation experiments for multi-cell massive MIMO."""

__version__ = "0.1.0"

from .errors import ConfigError, SolverError
from .estimation import ChannelRealization, EstimateBundle, PilotSet
from .network import NetworkRealization, SystemConfig

__all__ = [
    "ChannelRealization",
    "ConfigError",
    "EstimateBundle",
    "NetworkRealization",
    "PilotSet",
    "SolverError",
    "SystemConfig",
    "__version__",
]
