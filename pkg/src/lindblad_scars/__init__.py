"""Exact diagonalization of dissipative SYK and XXZ Lindbladians: scars, operator size, entanglement."""

__version__ = "0.1.0"
