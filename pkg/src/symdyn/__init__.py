"""Coupled-expansion checks and symbolic dynamics for non-autonomous maps."""

__version__ = "0.1.0"
