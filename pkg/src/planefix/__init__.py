"""Computational tools for fixed points of plane maps."""

__version__ = "0.1.0"
