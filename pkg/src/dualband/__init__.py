"""Dual-band (28/140 GHz) millimetre-wave channel analysis and generation."""

__version__ = "0.1.0"
