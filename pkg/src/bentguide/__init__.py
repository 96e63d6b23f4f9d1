"""Reflectionless bent waveguides: curve design, curvature-induced potentials,
scattering and wavepacket dynamics."""

__version__ = "0.1.0"
