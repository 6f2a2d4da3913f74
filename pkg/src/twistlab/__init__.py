"""Numerical laboratory for the twisted Hilbert spaces Z_2(alpha)."""

__version__ = "0.1.0"
