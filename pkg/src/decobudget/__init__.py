"""Decoherence budgets for space matter-wave interferometers."""

__version__ = "0.1.0"
