"""Guided diffusion sampling with exact scores for mixtures of uniform laws on compact planar sets."""

__version__ = "0.1.0"
