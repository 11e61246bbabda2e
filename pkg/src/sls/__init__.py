"""Vision-guided pan/tilt lighting controller with a simulated hardware rig."""

__version__ = "0.1.0"
