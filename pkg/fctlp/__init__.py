"""Flux-corrected transport with limiters from linear programming."""

__version__ = "0.1.0"
