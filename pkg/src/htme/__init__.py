"""Markovian master equations for small spin systems: Lindblad, high-temperature and inhomogeneous forms."""

__version__ = "0.1.0"
