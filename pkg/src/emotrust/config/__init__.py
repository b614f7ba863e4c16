"""
Configuration Management
========================

Environment settings, the run-config schema and its loader.
"""

from emotrust.config.manager import ConfigManager
from emotrust.config.settings import (
    DataSection,
    EngineSettings,
    ModelSection,
    ProfileSection,
    RunConfig,
)

__all__ = [
    "ConfigManager",
    "EngineSettings",
    "RunConfig",
    "DataSection",
    "ModelSection",
    "ProfileSection",
]
