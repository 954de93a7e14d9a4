"""Coherence control against a thermal reservoir and polarization dynamics of the
supersymmetric multiphoton Jaynes-Cummings model."""

__version__ = "0.1.0"
