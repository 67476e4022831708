"""Hop counts of minimum-weight paths in the complete graph with exponential weights."""

__version__ = "0.1.0"
