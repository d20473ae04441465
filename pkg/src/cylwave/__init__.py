"""Exact frequency-domain solution and phase geometry for the Dirichlet wave
problem exterior to the unit cylinder, with dispersive-decay measurement tools."""

__version__ = "0.1.0"
