"""Flower pollination optimization with a dimension-keyed switch probability."""

__version__ = "0.1.0"
