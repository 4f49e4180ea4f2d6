"""Numerical experiments on Bell bounds, polarizer chains, Bohm fields and irreversible evolution."""

__version__ = "0.1.0"
