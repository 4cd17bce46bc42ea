"""Linguistic behavior profiles for grid-world game bots."""

__version__ = "0.1.0"
