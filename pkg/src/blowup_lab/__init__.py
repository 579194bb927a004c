"""Numerical laboratory for exponential reaction-diffusion blow-up on a ball."""

__version__ = "0.1.0"
