"""Deterministic simulator of a four-robot percussion quartet."""

__version__ = "0.1.0"
