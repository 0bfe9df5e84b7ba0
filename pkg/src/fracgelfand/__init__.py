"""Spectral solver and verification suite for the fractional Gelfand problem on the unit ball."""

__version__ = "0.1.0"
