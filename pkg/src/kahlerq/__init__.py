"""Quantum mechanics on a real Kähler space."""
__version__ = "0.1.0"
