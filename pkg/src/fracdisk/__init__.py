"""Spectral Petrov-Galerkin tools for the fractional diffusion problem on the unit disk."""

__version__ = "0.1.0"
