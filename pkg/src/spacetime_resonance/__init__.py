"""Space-time resonance toolkit for quadratic wave interactions."""

__version__ = "0.1.0"
