"""Borel-plane solver for third-order nonlinear evolution PDEs."""

__version__ = "0.1.0"
