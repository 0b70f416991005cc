"""Numerical verification of a half-space conormal pseudo-differential calculus."""

__version__ = "0.1.0"
