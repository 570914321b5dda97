"""Dual entanglement of identical particles: states, Bell tests, identicity loss."""

__version__ = "0.1.0"
