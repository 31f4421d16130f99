"""Simulator and training harness for robot-photographer view adjustment."""

from .env import ActionSpec, EnvConfig, PhotoEnv, action_space, reward, transition
from .world import PersonModel, RobotPose, Scene

__all__ = [
    "ActionSpec",
    "EnvConfig",
    "PhotoEnv",
    "PersonModel",
    "RobotPose",
    "Scene",
    "action_space",
    "reward",
    "transition",
]

__version__ = "0.1.0"
