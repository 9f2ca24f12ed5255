"""Polar codes for lossy source coding, successive refinement and Wyner-Ziv."""

__version__ = "0.1.0"
