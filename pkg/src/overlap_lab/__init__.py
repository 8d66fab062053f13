"""Overlap numbers and dimension bounds for affine iterated function systems."""

__version__ = "0.1.0"
