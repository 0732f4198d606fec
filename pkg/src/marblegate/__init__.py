"""Simulation and truth-table verification of liquid-marble collision gates."""

__version__ = "0.1.0"
