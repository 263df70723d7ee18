"""Structural classification of tracking and functional JavaScript programs."""

__version__ = "0.1.0"
