"""Moment maps, moment map flows and stability for Hamiltonian group actions."""

__version__ = "0.1.0"
