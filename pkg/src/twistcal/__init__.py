"""Numerical verification of twisted calibrated subbundles."""

__version__ = "0.1.0"
