"""Residual empirical processes for regression with long-memory errors."""

__version__ = "0.1.0"
