"""Switched model-reference admittance control for a planar two-link arm."""

__version__ = "0.1.0"
