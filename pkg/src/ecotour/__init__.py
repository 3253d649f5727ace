"""Bi-objective (left turns, energy) Steiner tour planning with time windows."""

__version__ = "0.1.0"
