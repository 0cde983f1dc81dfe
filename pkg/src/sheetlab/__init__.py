"""Additive Brownian surfaces: Fourier spectrum, decay and restriction exponents."""

__version__ = "0.1.0"
