"""FDTD simulation and sensing analysis for capsule antennas in tissue phantoms."""

__version__ = "0.1.0"
