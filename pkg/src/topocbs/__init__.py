"""Conflict-based search over structural-semantic topometric maps."""

__version__ = "0.1.0"
