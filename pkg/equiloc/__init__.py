"""Numerical verification of equivariant localization with two commuting Killing fields."""

__version__ = "0.1"
