"""Nonholonomic metric ansatz: construction and residual verification."""
__version__ = "0.1.0"
